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

#ifndef POSEWARP_SYNTHDATA_HPP_
#define POSEWARP_SYNTHDATA_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "posewarp/heatmaps.hpp"
#include "posewarp/tensor.hpp"

namespace posewarp {

/// Planar articulated skeleton. Every joint hangs off a parent joint, or off
/// the root (pelvis centre) when parent == -1. A joint's absolute segment
/// angle is its parent's absolute angle (the torso angle for root children)
/// plus `rest_angle` plus a time-varying articulation limited to
/// +-angle_range. Joints with angle_range == 0 are rigid.
struct SkeletonSpec {
  std::vector<std::string> names;
  std::vector<int> parents;
  std::vector<double> lengths;
  /// Angle relative to the parent segment (or torso) at rest, radians, image
  /// coordinates (y down).
  std::vector<double> rest_angles;
  std::vector<double> angle_ranges;
  /// Index of the left/right counterpart (self for central joints).
  std::vector<int> mirror;
  /// Drawn segments as (from, to) joint indices; -1 denotes the root.
  std::vector<std::pair<int, int>> limbs;
  std::vector<double> limb_intensity;
  double head_radius = 2.5;
  int head_joint = 0;
  double torso_angle_range = 0.25;
  /// PCK reference: distance between shoulder midpoint and hip midpoint.
  int shoulder_pair[2] = {1, 2};
  int hip_pair[2] = {7, 8};

  int num_joints() const { return static_cast<int>(names.size()); }
  double torso_length() const;
  /// Longest root-to-joint chain length.
  double max_chain_length() const;
  void validate() const;

  /// 13-joint figure: head, shoulders, elbows, wrists, hips, knees, ankles.
  static SkeletonSpec default_human();
};

struct MotionParams {
  double root_speed_min = 0.3;   ///< px/frame
  double root_speed_max = 1.0;   ///< px/frame
  double limb_speed_min = 0.02;  ///< rad/frame
  double limb_speed_max = 0.08;  ///< rad/frame
  double torso_speed_max = 0.015;
  double occlusion_probability = 0.0;
  double blur_sigma_min = 0.0;
  double blur_sigma_max = 0.0;
  double background_amplitude = 0.12;
  double limb_sigma = 0.8;  ///< Gaussian limb profile width, px
  std::uint64_t seed = 0;

  void validate() const;
  /// Every velocity zero: all frames identical.
  static MotionParams static_scene(std::uint64_t seed);
};

enum class LabelSource : std::uint8_t { kNone = 0, kManual = 1, kPseudo = 2 };

/// Frames, full ground truth and the sparse labels visible to training.
///
/// Ground truth of frames without a manual label is evaluation-only: while a
/// GroundTruthGuard is alive, ground_truth(t) throws for such frames.
class VideoSample {
 public:
  VideoSample() = default;
  VideoSample(std::vector<Tensorf> frames, std::vector<Pose> poses, int label_interval, std::uint64_t seed);

  int num_frames() const { return static_cast<int>(frames_.size()); }
  int height() const { return frames_.empty() ? 0 : frames_.front().dim(1); }
  int width() const { return frames_.empty() ? 0 : frames_.front().dim(2); }
  std::uint64_t seed() const { return seed_; }
  int label_interval() const { return label_interval_; }

  const Tensorf& frame(int t) const { return frames_.at(static_cast<std::size_t>(t)); }
  Tensorf& mutable_frame(int t) { return frames_.at(static_cast<std::size_t>(t)); }
  const std::vector<Tensorf>& frames() const { return frames_; }

  bool labeled(int t) const { return labeled_mask_.at(static_cast<std::size_t>(t)); }
  const std::vector<bool>& labeled_mask() const { return labeled_mask_; }
  LabelSource label_source(int t) const { return label_source_.at(static_cast<std::size_t>(t)); }
  std::vector<int> labeled_indices() const;
  std::vector<int> manual_indices() const;

  /// Full ground truth for evaluation.
  const Pose& ground_truth(int t) const;
  /// The label training may use: the manual annotation or the pseudo label.
  const Pose& training_label(int t) const;

  void set_pseudo_label(int t, Pose pose);
  /// Replaces the manual labels with the given set of frame indices.
  void set_manual_labels(const std::vector<int>& indices);

  friend bool operator==(const VideoSample&, const VideoSample&) = default;

 private:
  std::vector<Tensorf> frames_;
  std::vector<Pose> poses_;
  std::vector<bool> labeled_mask_;
  std::vector<LabelSource> label_source_;
  std::vector<Pose> pseudo_poses_;
  int label_interval_ = 1;
  std::uint64_t seed_ = 0;
};

/// While alive, reading ground truth of a frame without a manual label throws.
class GroundTruthGuard {
 public:
  GroundTruthGuard();
  ~GroundTruthGuard();
  GroundTruthGuard(const GroundTruthGuard&) = delete;
  GroundTruthGuard& operator=(const GroundTruthGuard&) = delete;
  static bool active();
};

class GroundTruthAccessError : public ContractError {
 public:
  using ContractError::ContractError;
};

struct GeneratorConfig {
  SkeletonSpec skeleton = SkeletonSpec::default_human();
  MotionParams motion;
  int frames = 29;
  int height = 64;
  int width = 64;
  int label_interval = 7;
};

/// Renders one clip with forward kinematics under constant sampled
/// velocities, reflecting off joint limits and the frame border. Frames are
/// quantised to 8 bits so they survive PGM round trips unchanged.
VideoSample generate_video(const SkeletonSpec& skeleton, const MotionParams& motion, int frames, int height,
                           int width, int label_interval);

/// Upper bound on any joint's per-frame displacement under `motion`.
double kinematic_displacement_bound(const SkeletonSpec& skeleton, const MotionParams& motion);

/// Per-joint positions at one time step, for tests and analysis.
Pose forward_kinematics(const SkeletonSpec& skeleton, double root_x, double root_y, double torso_angle,
                        const std::vector<double>& articulation);

enum class DegradationMode { kBlur, kOcclusion };

DegradationMode parse_degradation_mode(const std::string& name);

/// Blur: separable Gaussian of sigma = magnitude with symmetric reflection.
/// Occlusion: a square of half-size `magnitude` filled with 0.5 around a joint
/// drawn from `seed`. Poses are left untouched.
VideoSample apply_degradation(const VideoSample& video, const std::vector<int>& frame_indices, DegradationMode mode,
                              double magnitude, std::uint64_t seed = 0);

Tensorf gaussian_blur(const Tensorf& image, double sigma);

struct DatasetSplits {
  std::vector<VideoSample> train;
  std::vector<VideoSample> val;
  std::vector<VideoSample> test;
};

struct SplitSizes {
  int train = 0, val = 0, test = 0;
};

/// Sizes of a split of n items by fractions (train and val rounded, test
/// takes the rest). Throws when a positive fraction gets no item.
SplitSizes split_sizes(int n_videos, const std::vector<double>& fractions);

/// n seeded videos, video i generated from derive_seed(seed, "video", i),
/// assigned in index order to train, val, test.
DatasetSplits split_dataset(int n_videos, const std::vector<double>& fractions, std::uint64_t seed,
                            const GeneratorConfig& generator);

}  // namespace posewarp

#endif  // POSEWARP_SYNTHDATA_HPP_
