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

#include "oracles.hpp"
#include "posewarp/deformable.hpp"
#include "posewarp/error.hpp"

namespace posewarp {
namespace {

using testing::brute_force_conv;
using testing::brute_force_deform;
using testing::random_tensor;

double dot(const Tensord& a, const Tensord& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

class ZeroOffsetTest : public ::testing::TestWithParam<int> {};

TEST_P(ZeroOffsetTest, EqualsRegularConvolution) {
  const int d = GetParam();
  Rng rng(40 + d);
  for (int trial = 0; trial < 4; ++trial) {
    KernelSpec s{2 + trial, 1 + trial, 3, 3, d};
    const int H = 5 + 2 * trial + d, W = 6 + d;
    const auto in = random_tensor({s.in_channels, H, W}, rng);
    const auto w = random_tensor({s.out_channels, s.in_channels, 3, 3}, rng);
    const auto b = random_tensor({s.out_channels}, rng);
    const auto deform = deform_conv_forward(in, OffsetField<double>::zeros(s, H, W), w, b, s);
    EXPECT_LT(max_abs_diff(deform, conv2d_forward(in, w, b, s)), 1e-12);
    EXPECT_LT(max_abs_diff(deform, brute_force_conv(in, w, b, s)), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Dilations, ZeroOffsetTest, ::testing::Values(1, 2, 3, 6, 12));

TEST(DeformConvTest, FractionalOffsetsMatchOracle) {
  Rng rng(11);
  for (int groups : {1, 2}) {
    KernelSpec s{3, 4, 3, 3, 2};
    const auto in = random_tensor({4, 7, 8}, rng);
    OffsetField<double> off(random_tensor({2 * groups * 9, 7, 8}, rng, -4.0, 4.0), groups);
    const auto w = random_tensor({3, 4, 3, 3}, rng);
    const auto b = random_tensor({3}, rng);
    EXPECT_LT(max_abs_diff(deform_conv_forward(in, off, w, b, s), brute_force_deform(in, off, w, b, s)), 1e-12);
  }
}

TEST(DeformConvTest, IntegerOffsetShiftsSampling) {
  // Every tap displaced by (+1, -2) is a convolution of the input translated
  // by that amount.
  Rng rng(12);
  KernelSpec s{1, 1, 3, 3, 1};
  const auto in = random_tensor({1, 9, 9}, rng);
  OffsetField<double> off = OffsetField<double>::zeros(s, 9, 9);
  for (int k = 0; k < 9; ++k) {
    for (auto& v : off.data.channel(2 * k)) v = 1.0;
    for (auto& v : off.data.channel(2 * k + 1)) v = -2.0;
  }
  const auto w = random_tensor({1, 1, 3, 3}, rng);
  Tensord shifted({1, 9, 9});
  for (int y = 0; y < 9; ++y)
    for (int x = 0; x < 9; ++x) {
      if (y + 1 < 9 && x - 2 >= 0) shifted(0, y, x) = in(0, y + 1, x - 2);
    }
  // Taps that fall outside the original map read zero in both formulations
  // only when the shifted map also has zero there, so compare the interior.
  const auto a = deform_conv_forward(in, off, w, Tensord({1}), s);
  const auto b = conv2d_forward(shifted, w, Tensord({1}), s);
  for (int y = 1; y < 7; ++y)
    for (int x = 3; x < 8; ++x) EXPECT_NEAR(a(0, y, x), b(0, y, x), 1e-12);
}

TEST(BilinearTest, IntegerPointsReadPixels) {
  Rng rng(13);
  const auto map = random_tensor({2, 4, 5}, rng);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) {
      const auto v = bilinear_sample(map, double(y), double(x));
      EXPECT_DOUBLE_EQ(v[0], map(0, y, x));
      EXPECT_DOUBLE_EQ(v[1], map(1, y, x));
    }
}

TEST(BilinearTest, ZeroOutsideAndBlendsAtBorder) {
  Tensord map({1, 2, 2}, std::vector<double>{1, 2, 3, 4});
  EXPECT_EQ(bilinear_sample(map, -1.5, 0.0)[0], 0.0);
  EXPECT_EQ(bilinear_sample(map, 0.0, 7.0)[0], 0.0);
  EXPECT_DOUBLE_EQ(bilinear_sample(map, 0.5, 0.5)[0], 2.5);
  // Half a pixel beyond the right edge keeps half of the edge value.
  EXPECT_DOUBLE_EQ(bilinear_sample(map, 0.0, 1.5)[0], 1.0);
  EXPECT_DOUBLE_EQ(bilinear_sample(map, -0.25, 0.0)[0], 0.75);
}

TEST(DeformConvTest, BackwardIsAdjointOfForward) {
  // The output is linear in the input and in the weights for fixed offsets.
  Rng rng(14);
  KernelSpec s{2, 3, 3, 3, 3};
  const auto in = random_tensor({3, 8, 6}, rng);
  OffsetField<double> off(random_tensor({18, 8, 6}, rng, -2.5, 2.5));
  const auto w = random_tensor({2, 3, 3, 3}, rng);
  const Tensord zero_bias({2});
  const auto g = random_tensor({2, 8, 6}, rng);
  const auto out = deform_conv_forward(in, off, w, zero_bias, s);
  const auto grads = deform_conv_backward(in, off, w, s, g);
  EXPECT_NEAR(dot(out, g), dot(grads.grad_input, in), 1e-10);
  EXPECT_NEAR(dot(out, g), dot(grads.grad_weights, w), 1e-10);
  EXPECT_EQ(grads.grad_offsets.shape(), off.data.shape());
}

TEST(DeformConvTest, RejectsMismatchedOffsets) {
  KernelSpec s{1, 1, 3, 3, 1};
  const Tensord in({1, 5, 5}), w({1, 1, 3, 3}), b({1});
  EXPECT_THROW(deform_conv_forward(in, OffsetField<double>(Tensord({17, 5, 5})), w, b, s), ContractError);
  EXPECT_THROW(deform_conv_forward(in, OffsetField<double>(Tensord({18, 4, 5})), w, b, s), ContractError);
}

}  // namespace
}  // namespace posewarp
