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

#ifndef POSEWARP_HEATMAPS_HPP_
#define POSEWARP_HEATMAPS_HPP_

#include <optional>
#include <span>
#include <vector>

#include "posewarp/tensor.hpp"

namespace posewarp {

struct Joint {
  double x = 0.0;
  double y = 0.0;
  bool visible = false;
  /// Peak heatmap value when the joint was decoded; 1 for annotations.
  double confidence = 1.0;

  friend bool operator==(const Joint&, const Joint&) = default;
};

struct Pose {
  std::vector<Joint> joints;

  Pose() = default;
  explicit Pose(int num_joints) : joints(static_cast<std::size_t>(num_joints)) {}
  int size() const { return static_cast<int>(joints.size()); }
  std::vector<bool> visibility() const;
  friend bool operator==(const Pose&, const Pose&) = default;
};

/// Per-joint confidence maps [J, H, W]; channel j is joint j of the skeleton's
/// global joint ordering.
template <typename T>
using Heatmap = Tensor<T>;

/// Unit-amplitude Gaussian per visible joint, evaluated at integer pixel
/// centres; invisible joints give an all-zero channel.
template <typename T>
Heatmap<T> render_gaussian(const Pose& pose, double sigma, int height, int width);

template <typename T>
struct MseResult {
  double loss = 0.0;
  Tensor<T> grad;
  /// Set when every joint was masked; loss and grad are then zero.
  bool all_masked = false;
};

/// Mean squared error over the channels whose mask entry is true. An empty
/// mask counts every channel.
template <typename T>
MseResult<T> mse_loss(const Heatmap<T>& pred, const Heatmap<T>& gt, const std::vector<bool>& visible = {});

/// Argmax per channel with a quarter-pixel step toward the larger neighbour on
/// each axis. Channels whose maximum is below `min_confidence` decode as
/// invisible. Ties go to the lowest row-major index.
template <typename T>
Pose decode_peaks(const Heatmap<T>& heatmap, double min_confidence = 0.05);

struct PckResult {
  /// Fraction of visible ground-truth joints predicted within threshold;
  /// nullopt where joint j was never visible.
  std::vector<std::optional<double>> per_joint;
  std::vector<long> correct;
  std::vector<long> visible;
  /// Total correct / total visible; nullopt when nothing was visible.
  std::optional<double> mean;
};

/// PCK@threshold_fraction with the given reference length in pixels.
PckResult pck_evaluate(std::span<const Pose> predictions, std::span<const Pose> ground_truth,
                       double threshold_fraction, double reference_scale);

}  // namespace posewarp

#endif  // POSEWARP_HEATMAPS_HPP_
