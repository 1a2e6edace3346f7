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

#ifndef POSEWARP_TRAINING_HPP_
#define POSEWARP_TRAINING_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "posewarp/backbone.hpp"
#include "posewarp/params.hpp"
#include "posewarp/rng.hpp"
#include "posewarp/synthdata.hpp"
#include "posewarp/warper.hpp"

namespace posewarp {

// ---------------------------------------------------------------------------
// Adam

template <typename T>
struct AdamState {
  std::vector<std::string> names;
  std::vector<Tensor<T>> first_moment;
  std::vector<Tensor<T>> second_moment;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  template <typename Params>
  static AdamState for_params(const Params& params) {
    AdamState s;
    for (const auto& p : named_tensors(params)) {
      s.names.push_back(p.name);
      s.first_moment.emplace_back(p.tensor->shape());
      s.second_moment.emplace_back(p.tensor->shape());
    }
    return s;
  }
};

/// One bias-corrected Adam update. Checks every gradient first; a non-finite
/// entry raises NumericError naming the parameter and nothing is modified.
template <typename T>
void adam_step(const std::vector<ParamRef<T>>& params, const std::vector<ConstParamRef<T>>& grads,
               AdamState<T>& state, double lr);

// ---------------------------------------------------------------------------
// Configuration and schedule

struct AugmentConfig {
  bool enabled = true;
  double rotation_degrees = 30.0;
  double scale_min = 0.75;
  double scale_max = 1.25;
  double flip_probability = 0.5;
};

struct TrainConfig {
  double base_lr = 1e-4;
  std::vector<int> milestones{10, 15};
  int epochs = 20;
  int batch_size = 8;
  int max_delta = 3;
  std::vector<int> dilations{3, 6, 12, 18, 24};
  double sigma = 2.0;
  AugmentConfig augment;
  std::uint64_t seed = 0;
  std::string precision = "f32";
  bool finetune_backbone = true;
  double pseudo_label_threshold = 0.2;
  int threads = 1;
  /// Validate every this many epochs (0: only after the last epoch).
  int validate_every = 0;

  /// Defaults with the 10/15-of-20 milestones rescaled to `epochs`.
  static TrainConfig with_epochs(int epochs);

  void validate() const;
  /// key=value lines.
  std::string to_text() const;
  /// Applies key=value pairs on top of `base`; unknown keys raise ConfigError.
  static TrainConfig from_kv(const std::vector<std::pair<std::string, std::string>>& kv, TrainConfig base);
  static TrainConfig from_kv(const std::vector<std::pair<std::string, std::string>>& kv) {
    return from_kv(kv, TrainConfig());
  }
};

/// Piecewise-constant: base_lr, divided by 10 at each milestone reached.
double lr_schedule(int epoch, const TrainConfig& config);

// ---------------------------------------------------------------------------
// Augmentation

struct AugmentTransform {
  double angle = 0.0;  ///< radians, positive turns +x toward +y
  double scale = 1.0;
  bool flip = false;

  bool is_identity() const { return angle == 0.0 && scale == 1.0 && !flip; }
};

AugmentTransform sample_transform(const AugmentConfig& config, Rng& rng);

/// Applies the same similarity transform about the frame centre to the image
/// (bilinear, zero fill) and the joints. A flip mirrors x and swaps joint
/// labels through `mirror`. Joints that leave the frame become invisible.
template <typename T>
std::pair<Tensor<T>, Pose> apply_transform(const Tensor<T>& frame, const Pose& pose, const AugmentTransform& transform,
                                           const std::vector<int>& mirror);

/// Samples a transform from `seed` and applies it.
template <typename T>
std::pair<Tensor<T>, Pose> augment(const Tensor<T>& frame, const Pose& pose, const AugmentConfig& config,
                                   std::uint64_t seed, const std::vector<int>& mirror);

// ---------------------------------------------------------------------------
// Training

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> val_pck;
};

/// Validation hook, called outside the ground-truth guard.
template <typename T>
using BackboneValidator = std::function<double(const BackboneParams<T>&)>;

template <typename T>
struct BackboneTrainResult {
  BackboneParams<T> params;
  std::vector<EpochMetrics> history;
};

/// Fits the backbone to Gaussian targets rendered from the training labels
/// (manual or pseudo) of `videos`.
template <typename T>
BackboneTrainResult<T> train_backbone(const std::vector<VideoSample>& videos, const BackboneArch& arch,
                                      const TrainConfig& config, const BackboneValidator<T>& validator = {},
                                      const BackboneParams<T>* init = nullptr);

template <typename T>
using WarperValidator = std::function<double(const BackboneParams<T>&, const WarperParams<T>&)>;

template <typename T>
struct WarperTrainResult {
  BackboneParams<T> backbone;
  WarperParams<T> warper;
  std::vector<EpochMetrics> history;
  /// Mean pair loss of the untrained head on the first epoch's pairs.
  double initial_loss = 0.0;
};

/// A training pair: predict the labelled frame from frame `source`.
struct FramePair {
  int video = 0;
  int labeled = 0;
  int source = 0;
};

/// One pair per manually labelled frame, source = labeled + delta with delta
/// uniform in [-max_delta, max_delta], clamped to the clip.
std::vector<FramePair> sample_pairs(const std::vector<VideoSample>& videos, int max_delta, Rng& rng);

/// Trains the warping head, and the backbone unless
/// config.finetune_backbone is false, on sampled pairs.
template <typename T>
WarperTrainResult<T> train_warper(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                                  const WarperConfig& warper_config, const TrainConfig& config,
                                  const WarperValidator<T>& validator = {}, const WarperParams<T>* init = nullptr);

/// Mean pair loss mse(warp(f_B, f_A - f_B), y_A) over `pairs`, without
/// augmentation.
template <typename T>
double mean_pair_loss(const std::vector<VideoSample>& videos, const std::vector<FramePair>& pairs,
                      const BackboneParams<T>& backbone, const WarperParams<T>& warper, double sigma);

/// Mean mse(f_B, y_A): the loss of using frame B's own heatmap as frame A's.
template <typename T>
double mean_copy_loss(const std::vector<VideoSample>& videos, const std::vector<FramePair>& pairs,
                      const BackboneParams<T>& backbone, double sigma);

// ---------------------------------------------------------------------------
// Pseudo labels

struct PropagatedPose {
  int video = 0;
  int frame = 0;
  Pose pose;
};

/// Adds propagated poses as pseudo labels. Joints whose confidence is below
/// `confidence_threshold` become invisible; frames with a manual label keep
/// it; the first pseudo label for a frame wins.
std::vector<VideoSample> merge_pseudo_labels(std::vector<VideoSample> dataset,
                                             const std::vector<PropagatedPose>& propagated,
                                             double confidence_threshold);

}  // namespace posewarp

#endif  // POSEWARP_TRAINING_HPP_
