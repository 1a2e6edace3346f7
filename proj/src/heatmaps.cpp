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

#include "posewarp/heatmaps.hpp"

#include <cmath>

namespace posewarp {

std::vector<bool> Pose::visibility() const {
  std::vector<bool> v(joints.size());
  for (std::size_t j = 0; j < joints.size(); ++j) v[j] = joints[j].visible;
  return v;
}

template <typename T>
Heatmap<T> render_gaussian(const Pose& pose, double sigma, int height, int width) {
  POSEWARP_REQUIRE(sigma > 0.0, "render_gaussian: sigma must be positive");
  POSEWARP_REQUIRE(height > 0 && width > 0, "render_gaussian: empty frame");
  Heatmap<T> out({pose.size(), height, width});
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int j = 0; j < pose.size(); ++j) {
    const Joint& jt = pose.joints[j];
    if (!jt.visible) continue;
    for (int y = 0; y < height; ++y) {
      const double dy2 = (y - jt.y) * (y - jt.y);
      for (int x = 0; x < width; ++x) {
        const double d2 = (x - jt.x) * (x - jt.x) + dy2;
        out(j, y, x) = static_cast<T>(std::exp(-d2 * inv));
      }
    }
  }
  return out;
}

template <typename T>
MseResult<T> mse_loss(const Heatmap<T>& pred, const Heatmap<T>& gt, const std::vector<bool>& visible) {
  pred.require_same_shape(gt, "mse_loss");
  POSEWARP_REQUIRE(pred.rank() == 3, "mse_loss: heatmaps must be [J,H,W]");
  const int joints = pred.dim(0);
  POSEWARP_REQUIRE(visible.empty() || static_cast<int>(visible.size()) == joints,
                   "mse_loss: visibility mask length must equal joint count");
  MseResult<T> r;
  r.grad = Tensor<T>(pred.shape());
  int active = 0;
  for (int j = 0; j < joints; ++j) active += visible.empty() || visible[j];
  if (active == 0) {
    r.all_masked = true;
    return r;
  }
  const std::size_t plane = static_cast<std::size_t>(pred.dim(1)) * pred.dim(2);
  const double n = static_cast<double>(active) * static_cast<double>(plane);
  double total = 0.0;
  for (int j = 0; j < joints; ++j) {
    if (!(visible.empty() || visible[j])) continue;
    const T* p = pred.channel(j).data();
    const T* t = gt.channel(j).data();
    T* g = r.grad.channel(j).data();
    for (std::size_t i = 0; i < plane; ++i) {
      const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
      total += d * d;
      g[i] = static_cast<T>(2.0 * d / n);
    }
  }
  r.loss = total / n;
  return r;
}

template <typename T>
Pose decode_peaks(const Heatmap<T>& heatmap, double min_confidence) {
  POSEWARP_REQUIRE(heatmap.rank() == 3, "decode_peaks: heatmap must be [J,H,W]");
  const int joints = heatmap.dim(0), height = heatmap.dim(1), width = heatmap.dim(2);
  Pose pose(joints);
  for (int j = 0; j < joints; ++j) {
    const T* h = heatmap.channel(j).data();
    int best = 0;
    for (int i = 1; i < height * width; ++i) {
      if (h[i] > h[best]) best = i;
    }
    const int by = best / width, bx = best % width;
    double x = bx, y = by;
    if (bx > 0 && bx < width - 1) {
      const T l = h[best - 1], r = h[best + 1];
      if (r > l) x += 0.25;
      else if (l > r) x -= 0.25;
    }
    if (by > 0 && by < height - 1) {
      const T u = h[best - width], d = h[best + width];
      if (d > u) y += 0.25;
      else if (u > d) y -= 0.25;
    }
    Joint& jt = pose.joints[j];
    jt.x = x;
    jt.y = y;
    jt.confidence = static_cast<double>(h[best]);
    jt.visible = jt.confidence >= min_confidence;
  }
  return pose;
}

PckResult pck_evaluate(std::span<const Pose> predictions, std::span<const Pose> ground_truth,
                       double threshold_fraction, double reference_scale) {
  POSEWARP_REQUIRE(predictions.size() == ground_truth.size(), "pck_evaluate: prediction/ground-truth count mismatch");
  POSEWARP_REQUIRE(reference_scale > 0.0, "pck_evaluate: reference_scale must be positive");
  PckResult r;
  const int joints = ground_truth.empty() ? 0 : ground_truth.front().size();
  r.correct.assign(static_cast<std::size_t>(joints), 0);
  r.visible.assign(static_cast<std::size_t>(joints), 0);
  const double threshold = threshold_fraction * reference_scale;
  for (std::size_t n = 0; n < ground_truth.size(); ++n) {
    const Pose& gt = ground_truth[n];
    const Pose& pr = predictions[n];
    POSEWARP_REQUIRE(gt.size() == joints && pr.size() == joints, "pck_evaluate: joint count mismatch");
    for (int j = 0; j < joints; ++j) {
      if (!gt.joints[j].visible) continue;
      ++r.visible[j];
      const Joint& p = pr.joints[j];
      if (p.visible && std::hypot(p.x - gt.joints[j].x, p.y - gt.joints[j].y) <= threshold) ++r.correct[j];
    }
  }
  long total_correct = 0, total_visible = 0;
  r.per_joint.resize(static_cast<std::size_t>(joints));
  for (int j = 0; j < joints; ++j) {
    total_correct += r.correct[j];
    total_visible += r.visible[j];
    if (r.visible[j] > 0) r.per_joint[j] = static_cast<double>(r.correct[j]) / static_cast<double>(r.visible[j]);
  }
  if (total_visible > 0) r.mean = static_cast<double>(total_correct) / static_cast<double>(total_visible);
  return r;
}

template Heatmap<float> render_gaussian<float>(const Pose&, double, int, int);
template Heatmap<double> render_gaussian<double>(const Pose&, double, int, int);
template MseResult<float> mse_loss<float>(const Heatmap<float>&, const Heatmap<float>&, const std::vector<bool>&);
template MseResult<double> mse_loss<double>(const Heatmap<double>&, const Heatmap<double>&, const std::vector<bool>&);
template Pose decode_peaks<float>(const Heatmap<float>&, double);
template Pose decode_peaks<double>(const Heatmap<double>&, double);

}  // namespace posewarp
