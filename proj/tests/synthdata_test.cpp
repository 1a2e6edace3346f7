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

#include <gtest/gtest.h>

#include <cmath>

#include "posewarp/synthdata.hpp"

namespace posewarp {
namespace {

VideoSample make_video(std::uint64_t seed, MotionParams motion = {}) {
  motion.seed = seed;
  return generate_video(SkeletonSpec::default_human(), motion, 29, 64, 64, 7);
}

TEST(SkeletonTest, DefaultHumanIsConsistent) {
  const auto s = SkeletonSpec::default_human();
  EXPECT_EQ(s.num_joints(), 13);
  EXPECT_NO_THROW(s.validate());
  for (int j = 0; j < s.num_joints(); ++j) EXPECT_EQ(s.mirror[s.mirror[j]], j);
  EXPECT_GT(s.torso_length(), 0.0);
}

TEST(SkeletonTest, ForwardKinematicsPreservesBoneLengths) {
  const auto s = SkeletonSpec::default_human();
  std::vector<double> art(13);
  for (int j = 0; j < 13; ++j) art[j] = 0.1 * j - 0.5;
  const Pose p = forward_kinematics(s, 30, 32, 0.2, art);
  for (int j = 0; j < 13; ++j) {
    const int parent = s.parents[j];
    const double ox = parent < 0 ? 30.0 : p.joints[parent].x;
    const double oy = parent < 0 ? 32.0 : p.joints[parent].y;
    EXPECT_NEAR(std::hypot(p.joints[j].x - ox, p.joints[j].y - oy), s.lengths[j], 1e-12);
  }
}

TEST(GeneratorTest, DeterministicPerSeed) {
  EXPECT_EQ(make_video(5), make_video(5));
  EXPECT_NE(make_video(5), make_video(6));
}

TEST(GeneratorTest, SparseLabelMask) {
  const auto v = make_video(1);
  EXPECT_EQ(v.num_frames(), 29);
  EXPECT_EQ(v.labeled_indices(), (std::vector<int>{0, 7, 14, 21, 28}));
  EXPECT_EQ(v.manual_indices(), v.labeled_indices());
  EXPECT_EQ(v.label_source(3), LabelSource::kNone);
}

TEST(GeneratorTest, FramesAreQuantisedToEightBits) {
  const auto v = make_video(2);
  for (const auto& f : v.frames()) {
    for (float px : f.data()) {
      ASSERT_GE(px, 0.0f);
      ASSERT_LE(px, 1.0f);
      ASSERT_EQ(std::round(px * 255.0f) / 255.0f, px);
    }
  }
}

TEST(GeneratorTest, MotionRespectsKinematicBound) {
  const auto s = SkeletonSpec::default_human();
  const MotionParams motion;
  const double bound = kinematic_displacement_bound(s, motion);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto v = make_video(seed);
    double moved = 0.0;
    for (int t = 1; t < v.num_frames(); ++t) {
      for (int j = 0; j < 13; ++j) {
        const auto& a = v.ground_truth(t - 1).joints[j];
        const auto& b = v.ground_truth(t).joints[j];
        const double d = std::hypot(b.x - a.x, b.y - a.y);
        EXPECT_LE(d, bound + 1e-9);
        moved = std::max(moved, d);
      }
    }
    EXPECT_GT(moved, 0.0);
  }
}

TEST(GeneratorTest, JointsStayInsideFrame) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto v = make_video(seed);
    for (int t = 0; t < v.num_frames(); ++t) {
      for (const auto& j : v.ground_truth(t).joints) {
        EXPECT_GE(j.x, 0.0);
        EXPECT_LE(j.x, 63.0);
        EXPECT_GE(j.y, 0.0);
        EXPECT_LE(j.y, 63.0);
      }
    }
  }
}

TEST(GeneratorTest, StaticSceneDoesNotMove) {
  const auto v = generate_video(SkeletonSpec::default_human(), MotionParams::static_scene(3), 10, 64, 64, 7);
  for (int t = 1; t < 10; ++t) {
    EXPECT_EQ(v.frame(t), v.frame(0));
    EXPECT_EQ(v.ground_truth(t), v.ground_truth(0));
  }
}

TEST(GeneratorTest, RejectsTooSmallFrames) {
  MotionParams m;
  EXPECT_THROW(generate_video(SkeletonSpec::default_human(), m, 5, 16, 16, 7), ContractError);
}

TEST(GuardTest, HidesUnlabelledGroundTruth) {
  const auto v = make_video(4);
  {
    GroundTruthGuard guard;
    EXPECT_TRUE(GroundTruthGuard::active());
    EXPECT_NO_THROW(v.ground_truth(7));
    EXPECT_THROW(v.ground_truth(8), GroundTruthAccessError);
    EXPECT_NO_THROW(v.training_label(7));
  }
  EXPECT_FALSE(GroundTruthGuard::active());
  EXPECT_NO_THROW(v.ground_truth(8));
}

TEST(LabelTest, PseudoLabelsNeverOverrideManual) {
  auto v = make_video(4);
  Pose p(13);
  EXPECT_THROW(v.set_pseudo_label(7, p), ContractError);
  v.set_pseudo_label(8, p);
  EXPECT_EQ(v.label_source(8), LabelSource::kPseudo);
  EXPECT_EQ(v.training_label(8), p);
  EXPECT_EQ(v.labeled_indices().size(), 6u);
  EXPECT_EQ(v.manual_indices().size(), 5u);
}

TEST(SplitTest, SizesAndValidation) {
  const auto s = split_sizes(50, {0.8, 0.1, 0.1});
  EXPECT_EQ(s.train, 40);
  EXPECT_EQ(s.val, 5);
  EXPECT_EQ(s.test, 5);
  EXPECT_THROW(split_sizes(50, {0.5, 0.1, 0.1}), ContractError);
  EXPECT_THROW(split_sizes(50, {0.8, 0.2}), ContractError);
  EXPECT_THROW(split_sizes(2, {0.8, 0.1, 0.1}), ContractError);
}

TEST(SplitTest, VideosAreIndependentOfSplitFractions) {
  GeneratorConfig g;
  g.frames = 8;
  const auto a = split_dataset(4, {0.5, 0.25, 0.25}, 9, g);
  const auto b = split_dataset(4, {0.25, 0.25, 0.5}, 9, g);
  EXPECT_EQ(a.train[1], b.val[0]);
  EXPECT_EQ(a.test[0], b.test[1]);
}

TEST(DegradationTest, TouchesOnlySelectedFrames) {
  const auto v = make_video(6);
  const auto blurred = apply_degradation(v, {3, 10}, DegradationMode::kBlur, 1.5);
  for (int t = 0; t < v.num_frames(); ++t) {
    if (t == 3 || t == 10) EXPECT_NE(blurred.frame(t), v.frame(t));
    else EXPECT_EQ(blurred.frame(t), v.frame(t));
    EXPECT_EQ(blurred.ground_truth(t), v.ground_truth(t));
  }
  const auto occluded = apply_degradation(v, {5}, DegradationMode::kOcclusion, 3.0, 1);
  EXPECT_NE(occluded.frame(5), v.frame(5));
  EXPECT_THROW(parse_degradation_mode("rain"), ConfigError);
}

TEST(DegradationTest, BlurPreservesConstantImage) {
  Tensorf flat({1, 9, 9}, 0.25f);
  const auto out = gaussian_blur(flat, 2.0);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], 0.25f, 1e-6f);
}

}  // namespace
}  // namespace posewarp
