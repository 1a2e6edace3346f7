/* Copyright 2026 The PoseWarp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef POSEWARP_EVAL_HPP_
#define POSEWARP_EVAL_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "posewarp/backbone.hpp"
#include "posewarp/heatmaps.hpp"
#include "posewarp/synthdata.hpp"
#include "posewarp/training.hpp"
#include "posewarp/warper.hpp"

namespace posewarp {

/// One measured condition. `pck` is empty for rows that only carry values.
struct ReportRow {
  std::string condition;
  std::optional<std::uint64_t> seed;
  PckResult pck;
  std::vector<std::pair<std::string, double>> values;

  std::optional<double> value(const std::string& name) const;
};

struct ExperimentReport {
  std::string experiment_id;
  std::vector<std::uint64_t> seeds;
  std::string config_snapshot;
  /// Checkpoint path or description the numbers came from.
  std::string checkpoint;
  double wall_clock_seconds = 0.0;
  std::vector<ReportRow> rows;
  std::vector<std::string> flags;

  void append(const ExperimentReport& other);
  std::vector<const ReportRow*> find(const std::string& condition) const;
  /// Mean over rows of `condition` of their PCK means.
  std::optional<double> mean_pck(const std::string& condition) const;
  /// Mean over rows of `condition` of a named value.
  std::optional<double> mean_value(const std::string& condition, const std::string& name) const;

  /// A header object followed by one object per row.
  std::string to_jsonl() const;
  /// condition,seed,pck,correct,visible,pck_j0..pck_jN-1 then named values.
  /// Metrics only: wall-clock time is left out so that reruns compare equal.
  std::string to_csv() const;
  /// Writes report.jsonl and metrics.csv into `dir`.
  void write(const std::filesystem::path& dir) const;
};

struct EvalOptions {
  double pck_threshold = 0.1;
  /// PCK reference length (torso length of the synthetic skeleton).
  double reference_scale = 14.0;
  double sigma = 2.0;
  int radius = 3;
  double min_confidence = 0.05;
  int threads = 1;
  std::optional<std::uint64_t> seed;

  void validate() const;
};

/// Frame `target` receives the manual label of frame `labeled`.
struct PropagationTarget {
  int video = 0;
  int labeled = 0;
  int target = 0;
};

/// Every unlabelled frame within +-radius of a manually labelled frame, once
/// per labelled source. Throws when no video has a manual label.
std::vector<PropagationTarget> propagation_targets(const std::vector<VideoSample>& videos, int radius);

/// Decoded propagated poses for every propagation target.
template <typename T>
std::vector<PropagatedPose> propagate_labels(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                                             const WarperParams<T>& warper, const EvalOptions& options);

/// Scores poses placed on propagation targets against full ground truth.
PckResult score_targets(const std::vector<VideoSample>& videos, const std::vector<PropagatedPose>& poses,
                        const EvalOptions& options);

template <typename T>
ExperimentReport eval_propagation(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                                  const WarperParams<T>& warper, const EvalOptions& options);

/// Copies each labelled pose unchanged onto its neighbours.
ExperimentReport baseline_copy(const std::vector<VideoSample>& videos, const EvalOptions& options);

struct BlockMatchOptions {
  int patch = 9;
  int search = 6;
  void validate() const;
};

/// Moves each labelled joint by the integer displacement minimising the SSD
/// of the surrounding patch between the labelled and the target frame. Ties
/// prefer the smallest displacement. Patches cut by the border are clamped
/// and counted in the report.
ExperimentReport baseline_blockmatch(const std::vector<VideoSample>& videos, const EvalOptions& options,
                                     const BlockMatchOptions& match = {});

/// Single-frame backbone PCK over every frame of `videos`.
template <typename T>
ExperimentReport eval_backbone(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                               const EvalOptions& options, const std::string& condition = "backbone");

/// One row per (dilation configuration, seed): a fresh head trained from the
/// same backbone and evaluated by eval_propagation. Condition names are
/// "dilations=<list>".
template <typename T>
ExperimentReport ablate_dilations(const std::vector<VideoSample>& train, const std::vector<VideoSample>& test,
                                  const BackboneParams<T>& backbone, const std::vector<std::vector<int>>& configurations,
                                  const WarperConfig& base, const TrainConfig& train_config,
                                  const std::vector<std::uint64_t>& seeds, const EvalOptions& options);

std::string dilation_condition(const std::vector<int>& dilations);

struct DegradationSpec {
  DegradationMode mode = DegradationMode::kBlur;
  double magnitude = 1.5;
  /// Fraction of frames per video that get degraded.
  double fraction = 0.5;
  std::uint64_t seed = 0;
};

/// Degraded copy of `videos` plus the indices of degraded frames per video.
std::pair<std::vector<VideoSample>, std::vector<std::vector<int>>> degrade_videos(
    const std::vector<VideoSample>& videos, const DegradationSpec& spec);

/// Rows "clean/single", "clean/aggregate" over all frames, and
/// "degraded/single", "degraded/aggregate" over the degraded frames of the
/// degraded copy. Per-joint PCK is in every row.
template <typename T>
ExperimentReport eval_aggregation(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                                  const WarperParams<T>& warper, const std::vector<int>& deltas,
                                  const DegradationSpec& degradation, const EvalOptions& options);

// ---------------------------------------------------------------------------
// Offset interpretation

/// Offsets of every branch at one pixel, concatenated (|dilations| * 2*kh*kw).
template <typename T>
std::vector<double> offset_features(const std::vector<OffsetField<T>>& offsets, int y, int x);

struct MotionProbeOptions {
  int max_delta = 3;
  /// Pairs start at every frame_stride-th frame.
  int frame_stride = 1;
  int threads = 1;
};

struct MotionSample {
  std::vector<double> features;
  double dx = 0.0;
  double dy = 0.0;
};

/// Samples at visible joints of pairs (t, t+delta), delta in +-max_delta
/// except 0, t a multiple of frame_stride: offsets from warping f_{t+delta} toward frame t, target the
/// joint's displacement from frame t to frame t+delta.
template <typename T>
std::vector<MotionSample> collect_motion_samples(const std::vector<VideoSample>& videos,
                                                 const BackboneParams<T>& backbone, const WarperParams<T>& warper,
                                                 const MotionProbeOptions& options);

/// Affine map features -> (dx, dy).
struct LinearMotionModel {
  /// [features + 1, 2]; the last row is the intercept.
  std::vector<std::vector<double>> coefficients;
  bool ridge_fallback = false;
  int feature_dim = 0;

  std::pair<double, double> predict(const std::vector<double>& features) const;
};

/// Ordinary least squares with intercept. A rank-deficient design falls back
/// to ridge with lambda = 1e-6 and sets ridge_fallback.
LinearMotionModel fit_motion_model(const std::vector<MotionSample>& samples);

double mean_endpoint_error(const LinearMotionModel& model, const std::vector<MotionSample>& samples);
double zero_predictor_error(const std::vector<MotionSample>& samples);

struct MotionRegressionResult {
  LinearMotionModel model;
  double train_error = 0.0;
  double test_error = 0.0;
  double zero_error = 0.0;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  ExperimentReport report;
};

/// Fits on `train` pairs and reports endpoint errors on held-out `test`
/// pairs against the always-zero predictor.
template <typename T>
MotionRegressionResult offset_motion_regression(const std::vector<VideoSample>& train,
                                                const std::vector<VideoSample>& test,
                                                const BackboneParams<T>& backbone, const WarperParams<T>& warper,
                                                const MotionProbeOptions& options);

/// For the pair (t, t+delta) of `video`: colour-wheel PPM of the predicted
/// dense motion, one PGM of offset magnitude per dilation, and a CSV of
/// per-pixel predictions.
template <typename T>
void export_motion_fields(const std::filesystem::path& dir, const VideoSample& video, int t, int delta,
                          const BackboneParams<T>& backbone, const WarperParams<T>& warper,
                          const LinearMotionModel& model);

}  // namespace posewarp

#endif  // POSEWARP_EVAL_HPP_
