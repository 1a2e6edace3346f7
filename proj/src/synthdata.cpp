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

#include "posewarp/synthdata.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <set>

#include "posewarp/rng.hpp"

namespace posewarp {
namespace {

std::atomic<int> g_guard_depth{0};

double wrap_reflect(double value, double lo, double hi, double& velocity) {
  if (value > hi) {
    value = 2 * hi - value;
    velocity = -velocity;
  } else if (value < lo) {
    value = 2 * lo - value;
    velocity = -velocity;
  }
  return std::clamp(value, lo, hi);
}

// Articulation depth: number of non-rigid links from the root down to j.
int articulated_depth(const SkeletonSpec& s, int j) {
  int depth = 0;
  for (int k = j; k >= 0; k = s.parents[k]) depth += s.angle_ranges[k] > 0 ? 1 : 0;
  return depth;
}

struct Extent {
  double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
};

// Bounding box of every joint relative to the root over the whole range of
// torso and limb angles, found by a grid search over each joint's chain.
Extent reachable_extent(const SkeletonSpec& s) {
  Extent e;
  constexpr int kSteps = 16;
  for (int j = 0; j < s.num_joints(); ++j) {
    std::vector<int> chain;
    for (int k = j; k >= 0; k = s.parents[k]) chain.push_back(k);
    std::reverse(chain.begin(), chain.end());
    std::vector<int> idx(chain.size() + 1, 0);
    auto value_of = [&](int level, int step) {
      const double range = level == 0 ? s.torso_angle_range : s.angle_ranges[chain[level - 1]];
      return range == 0 ? 0.0 : -range + 2.0 * range * step / kSteps;
    };
    auto steps_of = [&](int level) {
      const double range = level == 0 ? s.torso_angle_range : s.angle_ranges[chain[level - 1]];
      return range == 0 ? 1 : kSteps + 1;
    };
    while (true) {
      double angle = value_of(0, idx[0]);
      double x = 0, y = 0;
      for (std::size_t l = 0; l < chain.size(); ++l) {
        const int k = chain[l];
        angle += s.rest_angles[k] + value_of(static_cast<int>(l) + 1, idx[l + 1]);
        x += s.lengths[k] * std::cos(angle);
        y += s.lengths[k] * std::sin(angle);
      }
      e.x_min = std::min(e.x_min, x);
      e.x_max = std::max(e.x_max, x);
      e.y_min = std::min(e.y_min, y);
      e.y_max = std::max(e.y_max, y);
      std::size_t level = 0;
      while (level < idx.size() && ++idx[level] >= steps_of(static_cast<int>(level))) idx[level++] = 0;
      if (level == idx.size()) break;
    }
  }
  // The grid misses the true extreme by at most len * (1 - cos(step / 2)).
  const double slack = 0.5;
  e.x_min -= slack;
  e.y_min -= slack;
  e.x_max += slack;
  e.y_max += slack;
  return e;
}

double segment_distance2(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = px - (ax + t * vx), dy = py - (ay + t * vy);
  return dx * dx + dy * dy;
}

Tensorf background_texture(int height, int width, double amplitude, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "background"));
  Tensorf noise({1, height, width});
  for (auto& v : noise.data()) v = static_cast<float>(rng.normal());
  Tensorf smooth = gaussian_blur(noise, 1.5);
  double mean = 0, var = 0;
  for (float v : smooth.data()) mean += v;
  mean /= static_cast<double>(smooth.size());
  for (float v : smooth.data()) var += (v - mean) * (v - mean);
  const double stddev = std::sqrt(var / static_cast<double>(smooth.size())) + 1e-12;
  for (auto& v : smooth.data()) {
    v = static_cast<float>(std::clamp(0.18 + amplitude * (v - mean) / stddev, 0.0, 0.4));
  }
  return smooth;
}

Tensorf render_frame(const SkeletonSpec& s, const Pose& pose, double root_x, double root_y, const Tensorf& background,
                     double limb_sigma) {
  const int height = background.dim(1), width = background.dim(2);
  Tensorf frame = background;
  const double inv = 1.0 / (2.0 * limb_sigma * limb_sigma);
  auto point = [&](int j, double& x, double& y) {
    if (j < 0) {
      x = root_x;
      y = root_y;
    } else {
      x = pose.joints[j].x;
      y = pose.joints[j].y;
    }
  };
  const auto& head = pose.joints[static_cast<std::size_t>(s.head_joint)];
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double best_alpha = 0.0, best_intensity = 0.0;
      for (std::size_t l = 0; l < s.limbs.size(); ++l) {
        double ax, ay, bx, by;
        point(s.limbs[l].first, ax, ay);
        point(s.limbs[l].second, bx, by);
        const double alpha = std::exp(-segment_distance2(x, y, ax, ay, bx, by) * inv);
        if (alpha > best_alpha) {
          best_alpha = alpha;
          best_intensity = s.limb_intensity[l];
        }
      }
      const double hd = std::hypot(x - head.x, y - head.y) - s.head_radius;
      const double head_alpha = hd <= 0 ? 1.0 : std::exp(-hd * hd * inv);
      if (head_alpha > best_alpha) {
        best_alpha = head_alpha;
        best_intensity = 0.95;
      }
      float& px = frame(0, y, x);
      const double v = px * (1.0 - best_alpha) + best_intensity * best_alpha;
      px = static_cast<float>(std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0);
    }
  }
  return frame;
}

}  // namespace

double SkeletonSpec::torso_length() const {
  const Pose p = forward_kinematics(*this, 0, 0, 0, std::vector<double>(names.size(), 0.0));
  const double sx = 0.5 * (p.joints[shoulder_pair[0]].x + p.joints[shoulder_pair[1]].x);
  const double sy = 0.5 * (p.joints[shoulder_pair[0]].y + p.joints[shoulder_pair[1]].y);
  const double hx = 0.5 * (p.joints[hip_pair[0]].x + p.joints[hip_pair[1]].x);
  const double hy = 0.5 * (p.joints[hip_pair[0]].y + p.joints[hip_pair[1]].y);
  return std::hypot(sx - hx, sy - hy);
}

double SkeletonSpec::max_chain_length() const {
  double best = 0;
  for (int j = 0; j < num_joints(); ++j) {
    double len = 0;
    for (int k = j; k >= 0; k = parents[k]) len += lengths[k];
    best = std::max(best, len);
  }
  return best;
}

void SkeletonSpec::validate() const {
  const std::size_t n = names.size();
  POSEWARP_REQUIRE(n >= 1, "SkeletonSpec: no joints");
  POSEWARP_REQUIRE(parents.size() == n && lengths.size() == n && rest_angles.size() == n &&
                       angle_ranges.size() == n && mirror.size() == n,
                   "SkeletonSpec: per-joint arrays must have one entry per joint");
  POSEWARP_REQUIRE(limbs.size() == limb_intensity.size(), "SkeletonSpec: one intensity per limb");
  for (std::size_t j = 0; j < n; ++j) {
    POSEWARP_REQUIRE(parents[j] < static_cast<int>(j), "SkeletonSpec: parents must precede children (tree order)");
    POSEWARP_REQUIRE(lengths[j] > 0, "SkeletonSpec: segment lengths must be positive");
    POSEWARP_REQUIRE(angle_ranges[j] >= 0, "SkeletonSpec: angle ranges must be non-negative");
    POSEWARP_REQUIRE(mirror[j] >= 0 && mirror[j] < static_cast<int>(n) && mirror[mirror[j]] == static_cast<int>(j),
                     "SkeletonSpec: mirror table must be an involution");
  }
  POSEWARP_REQUIRE(head_joint >= 0 && head_joint < static_cast<int>(n), "SkeletonSpec: head joint out of range");
}

SkeletonSpec SkeletonSpec::default_human() {
  SkeletonSpec s;
  s.names = {"head",    "l_shoulder", "r_shoulder", "l_elbow", "r_elbow", "l_wrist",  "r_wrist",
             "l_hip",   "r_hip",      "l_knee",     "r_knee",  "l_ankle", "r_ankle"};
  s.mirror = {0, 2, 1, 4, 3, 6, 5, 8, 7, 10, 9, 12, 11};
  s.parents = {-1, -1, -1, 1, 2, 3, 4, -1, -1, 7, 8, 9, 10};
  const double half_pi = M_PI / 2;
  // Absolute rest angles; converted to parent-relative below.
  const std::vector<double> absolute = {-half_pi,
                                        std::atan2(-14.0, 5.0),
                                        std::atan2(-14.0, -5.0),
                                        half_pi - 0.3,
                                        half_pi + 0.3,
                                        half_pi - 0.6,
                                        half_pi + 0.6,
                                        0.0,
                                        M_PI,
                                        half_pi - 0.1,
                                        half_pi + 0.1,
                                        half_pi,
                                        half_pi};
  s.lengths = {19.0, std::hypot(5.0, 14.0), std::hypot(5.0, 14.0), 7.0, 7.0, 6.0, 6.0, 4.0, 4.0, 9.0, 9.0, 9.0, 9.0};
  s.angle_ranges = {0, 0, 0, 0.9, 0.9, 0.9, 0.9, 0, 0, 0.45, 0.45, 0.45, 0.45};
  s.rest_angles.resize(absolute.size());
  for (std::size_t j = 0; j < absolute.size(); ++j) {
    s.rest_angles[j] = s.parents[j] < 0 ? absolute[j] : absolute[j] - absolute[s.parents[j]];
  }
  s.limbs = {{-1, 0}, {1, 2}, {1, 7}, {2, 8}, {7, 8}, {1, 3}, {3, 5}, {2, 4}, {4, 6}, {7, 9}, {9, 11}, {8, 10}, {10, 12}};
  s.limb_intensity = {0.55, 0.6, 0.5, 0.5, 0.45, 1.0, 0.85, 0.72, 0.62, 0.92, 0.78, 0.68, 0.58};
  return s;
}

void MotionParams::validate() const {
  for (double v : {root_speed_min, root_speed_max, limb_speed_min, limb_speed_max, torso_speed_max,
                   blur_sigma_min, blur_sigma_max, background_amplitude, limb_sigma}) {
    POSEWARP_REQUIRE(std::isfinite(v) && v >= 0, "MotionParams: ranges must be finite and non-negative");
  }
  POSEWARP_REQUIRE(root_speed_min <= root_speed_max && limb_speed_min <= limb_speed_max &&
                       blur_sigma_min <= blur_sigma_max,
                   "MotionParams: range minimum exceeds maximum");
  POSEWARP_REQUIRE(occlusion_probability >= 0 && occlusion_probability <= 1,
                   "MotionParams: occlusion probability must lie in [0, 1]");
  POSEWARP_REQUIRE(limb_sigma > 0, "MotionParams: limb_sigma must be positive");
}

MotionParams MotionParams::static_scene(std::uint64_t seed) {
  MotionParams m;
  m.root_speed_min = m.root_speed_max = 0;
  m.limb_speed_min = m.limb_speed_max = 0;
  m.torso_speed_max = 0;
  m.seed = seed;
  return m;
}

Pose forward_kinematics(const SkeletonSpec& s, double root_x, double root_y, double torso_angle,
                        const std::vector<double>& articulation) {
  const int n = s.num_joints();
  Pose pose(n);
  std::vector<double> absolute(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const int p = s.parents[j];
    const double base = p < 0 ? torso_angle : absolute[p];
    absolute[j] = base + s.rest_angles[j] + articulation[j];
    const double ox = p < 0 ? root_x : pose.joints[p].x;
    const double oy = p < 0 ? root_y : pose.joints[p].y;
    pose.joints[j].x = ox + s.lengths[j] * std::cos(absolute[j]);
    pose.joints[j].y = oy + s.lengths[j] * std::sin(absolute[j]);
    pose.joints[j].visible = true;
    pose.joints[j].confidence = 1.0;
  }
  return pose;
}

double kinematic_displacement_bound(const SkeletonSpec& s, const MotionParams& motion) {
  double worst = 0;
  for (int j = 0; j < s.num_joints(); ++j) {
    double d = 0;
    for (int k = j; k >= 0; k = s.parents[k]) {
      d += s.lengths[k] * (motion.torso_speed_max + articulated_depth(s, k) * motion.limb_speed_max);
    }
    worst = std::max(worst, d);
  }
  return motion.root_speed_max + worst;
}

VideoSample generate_video(const SkeletonSpec& skeleton, const MotionParams& motion, int frames, int height,
                           int width, int label_interval) {
  skeleton.validate();
  motion.validate();
  POSEWARP_REQUIRE(frames >= 1, "generate_video: need at least one frame");
  POSEWARP_REQUIRE(label_interval >= 1, "generate_video: label interval must be >= 1");
  POSEWARP_REQUIRE(height >= 16 && width >= 16, "generate_video: frame must be at least 16x16");
  const Extent e = reachable_extent(skeleton);
  const double margin = 1.0;
  const double x_lo = margin - e.x_min, x_hi = width - 1 - margin - e.x_max;
  const double y_lo = margin - e.y_min, y_hi = height - 1 - margin - e.y_max;
  POSEWARP_REQUIRE(x_lo <= x_hi && y_lo <= y_hi, "generate_video: skeleton larger than frame");

  Rng rng(derive_seed(motion.seed, "motion"));
  const int n = skeleton.num_joints();
  double rx = rng.uniform(x_lo, x_hi), ry = rng.uniform(y_lo, y_hi);
  const double heading = rng.uniform(0, 2 * M_PI);
  const double speed = rng.uniform(motion.root_speed_min, motion.root_speed_max);
  double vx = speed * std::cos(heading), vy = speed * std::sin(heading);
  const double torso_range = skeleton.torso_angle_range;
  double torso = rng.uniform(-torso_range, torso_range);
  double torso_v = rng.uniform(-motion.torso_speed_max, motion.torso_speed_max);
  std::vector<double> phi(static_cast<std::size_t>(n), 0.0), omega(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    const double range = skeleton.angle_ranges[j];
    if (range == 0) continue;
    phi[j] = rng.uniform(-range, range);
    const double w = rng.uniform(motion.limb_speed_min, motion.limb_speed_max);
    omega[j] = rng.bernoulli(0.5) ? w : -w;
  }

  const Tensorf background = background_texture(height, width, motion.background_amplitude, motion.seed);
  std::vector<Tensorf> images;
  std::vector<Pose> poses;
  for (int t = 0; t < frames; ++t) {
    Pose pose = forward_kinematics(skeleton, rx, ry, torso, phi);
    images.push_back(render_frame(skeleton, pose, rx, ry, background, motion.limb_sigma));
    poses.push_back(std::move(pose));
    rx = wrap_reflect(rx + vx, x_lo, x_hi, vx);
    ry = wrap_reflect(ry + vy, y_lo, y_hi, vy);
    torso = wrap_reflect(torso + torso_v, -torso_range, torso_range, torso_v);
    for (int j = 0; j < n; ++j) {
      const double range = skeleton.angle_ranges[j];
      if (range > 0) phi[j] = wrap_reflect(phi[j] + omega[j], -range, range, omega[j]);
    }
  }

  VideoSample video(std::move(images), std::move(poses), label_interval, motion.seed);
  if (motion.occlusion_probability > 0 || motion.blur_sigma_max > 0) {
    Rng drng(derive_seed(motion.seed, "degrade"));
    for (int t = 0; t < frames; ++t) {
      if (motion.occlusion_probability > 0 && drng.bernoulli(motion.occlusion_probability)) {
        video = apply_degradation(video, {t}, DegradationMode::kOcclusion, 3.0, drng.next());
      }
      if (motion.blur_sigma_max > 0) {
        const double sigma = drng.uniform(motion.blur_sigma_min, motion.blur_sigma_max);
        video = apply_degradation(video, {t}, DegradationMode::kBlur, sigma);
      }
    }
  }
  return video;
}

VideoSample::VideoSample(std::vector<Tensorf> frames, std::vector<Pose> poses, int label_interval, std::uint64_t seed)
    : frames_(std::move(frames)), poses_(std::move(poses)), label_interval_(label_interval), seed_(seed) {
  POSEWARP_REQUIRE(frames_.size() == poses_.size(), "VideoSample: one pose per frame required");
  POSEWARP_REQUIRE(label_interval >= 1, "VideoSample: label interval must be >= 1");
  const std::size_t n = frames_.size();
  labeled_mask_.assign(n, false);
  label_source_.assign(n, LabelSource::kNone);
  pseudo_poses_.assign(n, Pose());
  for (std::size_t t = 0; t < n; t += static_cast<std::size_t>(label_interval)) {
    labeled_mask_[t] = true;
    label_source_[t] = LabelSource::kManual;
  }
}

std::vector<int> VideoSample::labeled_indices() const {
  std::vector<int> out;
  for (int t = 0; t < num_frames(); ++t) {
    if (labeled_mask_[t]) out.push_back(t);
  }
  return out;
}

std::vector<int> VideoSample::manual_indices() const {
  std::vector<int> out;
  for (int t = 0; t < num_frames(); ++t) {
    if (label_source_[t] == LabelSource::kManual) out.push_back(t);
  }
  return out;
}

const Pose& VideoSample::ground_truth(int t) const {
  const auto i = static_cast<std::size_t>(t);
  if (GroundTruthGuard::active() && label_source_.at(i) != LabelSource::kManual) {
    throw GroundTruthAccessError("ground truth of unlabelled frame " + std::to_string(t) +
                                 " read while the training guard is active");
  }
  return poses_.at(i);
}

const Pose& VideoSample::training_label(int t) const {
  const auto i = static_cast<std::size_t>(t);
  switch (label_source_.at(i)) {
    case LabelSource::kManual:
      return poses_[i];
    case LabelSource::kPseudo:
      return pseudo_poses_[i];
    case LabelSource::kNone:
      break;
  }
  throw GroundTruthAccessError("frame " + std::to_string(t) + " has no training label");
}

void VideoSample::set_pseudo_label(int t, Pose pose) {
  const auto i = static_cast<std::size_t>(t);
  POSEWARP_REQUIRE(label_source_.at(i) != LabelSource::kManual, "set_pseudo_label: frame has a manual label");
  pseudo_poses_[i] = std::move(pose);
  label_source_[i] = LabelSource::kPseudo;
  labeled_mask_[i] = true;
}

void VideoSample::set_manual_labels(const std::vector<int>& indices) {
  std::fill(labeled_mask_.begin(), labeled_mask_.end(), false);
  std::fill(label_source_.begin(), label_source_.end(), LabelSource::kNone);
  for (int t : indices) {
    POSEWARP_REQUIRE(t >= 0 && t < num_frames(), "set_manual_labels: index out of range");
    labeled_mask_[static_cast<std::size_t>(t)] = true;
    label_source_[static_cast<std::size_t>(t)] = LabelSource::kManual;
  }
}

GroundTruthGuard::GroundTruthGuard() { ++g_guard_depth; }
GroundTruthGuard::~GroundTruthGuard() { --g_guard_depth; }
bool GroundTruthGuard::active() { return g_guard_depth.load() > 0; }

DegradationMode parse_degradation_mode(const std::string& name) {
  if (name == "blur") return DegradationMode::kBlur;
  if (name == "occlusion") return DegradationMode::kOcclusion;
  throw ConfigError("degradation", "unknown degradation mode '" + name + "' (expected blur|occlusion)");
}

Tensorf gaussian_blur(const Tensorf& image, double sigma) {
  if (sigma <= 0) return image;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0;
  for (int i = -radius; i <= radius; ++i) total += kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& k : kernel) k /= total;
  const int channels = image.dim(0), height = image.dim(1), width = image.dim(2);
  // Half-sample symmetric reflection: index -1 maps to 0, n maps to n-1.
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
  };
  Tensorf tmp(image.shape()), out(image.shape());
  for (int c = 0; c < channels; ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * image(c, y, reflect(x + i, width));
        tmp(c, y, x) = static_cast<float>(acc);
      }
    }
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp(c, reflect(y + i, height), x);
        out(c, y, x) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

VideoSample apply_degradation(const VideoSample& video, const std::vector<int>& frame_indices, DegradationMode mode,
                              double magnitude, std::uint64_t seed) {
  POSEWARP_REQUIRE(magnitude >= 0, "apply_degradation: magnitude must be non-negative");
  VideoSample out = video;
  Rng rng(derive_seed(seed, "occlusion"));
  for (int t : frame_indices) {
    POSEWARP_REQUIRE(t >= 0 && t < video.num_frames(), "apply_degradation: frame index out of range");
    Tensorf& frame = out.mutable_frame(t);
    if (mode == DegradationMode::kBlur) {
      frame = gaussian_blur(frame, magnitude);
      continue;
    }
    // The pose only places the patch; labels are left untouched.
    const Pose& pose = video.ground_truth(t);
    const int j = rng.uniform_int(0, pose.size() - 1);
    const int cx = static_cast<int>(std::lround(pose.joints[j].x));
    const int cy = static_cast<int>(std::lround(pose.joints[j].y));
    const int half = static_cast<int>(std::lround(magnitude));
    for (int y = std::max(0, cy - half); y <= std::min(frame.dim(1) - 1, cy + half); ++y) {
      for (int x = std::max(0, cx - half); x <= std::min(frame.dim(2) - 1, cx + half); ++x) frame(0, y, x) = 0.5f;
    }
  }
  return out;
}

SplitSizes split_sizes(int n_videos, const std::vector<double>& fractions) {
  POSEWARP_REQUIRE(fractions.size() == 3, "split_dataset: expected three fractions (train, val, test)");
  double total = 0;
  for (double f : fractions) {
    POSEWARP_REQUIRE(f >= 0, "split_dataset: fractions must be non-negative");
    total += f;
  }
  POSEWARP_REQUIRE(std::abs(total - 1.0) < 1e-9, "split_dataset: fractions must sum to 1");
  SplitSizes s;
  s.train = static_cast<int>(std::lround(fractions[0] * n_videos));
  s.val = static_cast<int>(std::lround(fractions[1] * n_videos));
  s.test = n_videos - s.train - s.val;
  POSEWARP_REQUIRE(s.test >= 0, "split_dataset: rounding left no room for the test split");
  const int sizes[3] = {s.train, s.val, s.test};
  for (int i = 0; i < 3; ++i) {
    POSEWARP_REQUIRE(fractions[i] == 0 || sizes[i] > 0,
                     "split_dataset: n_videos = " + std::to_string(n_videos) + " too small for requested fractions");
  }
  return s;
}

DatasetSplits split_dataset(int n_videos, const std::vector<double>& fractions, std::uint64_t seed,
                            const GeneratorConfig& generator) {
  const SplitSizes sizes = split_sizes(n_videos, fractions);
  DatasetSplits out;
  for (int i = 0; i < n_videos; ++i) {
    MotionParams motion = generator.motion;
    motion.seed = derive_seed(seed, "video", static_cast<std::uint64_t>(i));
    VideoSample v = generate_video(generator.skeleton, motion, generator.frames, generator.height, generator.width,
                                   generator.label_interval);
    if (i < sizes.train) out.train.push_back(std::move(v));
    else if (i < sizes.train + sizes.val) out.val.push_back(std::move(v));
    else out.test.push_back(std::move(v));
  }
  return out;
}

}  // namespace posewarp
