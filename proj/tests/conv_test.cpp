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
#include "posewarp/conv.hpp"
#include "posewarp/error.hpp"
#include "posewarp/tensor.hpp"

namespace posewarp {
namespace {

using testing::brute_force_conv;
using testing::random_tensor;

TEST(TensorTest, ShapeAndIndexing) {
  Tensord t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  t(1, 2, 3) = 5.0;
  EXPECT_EQ(t[23], 5.0);
  EXPECT_EQ(t.channel(1).size(), 12u);
  EXPECT_THROW(Tensord({1, 2, 3, 4, 5}), ContractError);
  EXPECT_THROW(Tensord({2, -1}), ContractError);
  EXPECT_THROW(Tensord({2, 2}, std::vector<double>{1, 2, 3}), ContractError);
}

TEST(TensorTest, StorageIsCacheLineAligned) {
  for (int n : {1, 3, 17, 1000}) {
    Tensorf t({n});
    EXPECT_EQ(reinterpret_cast<std::uintptr_t>(t.raw()) % 64, 0u);
  }
}

TEST(TensorTest, ArithmeticRejectsShapeMismatch) {
  Tensord a({2, 2}), b({4});
  EXPECT_THROW(a += b, ContractError);
  EXPECT_THROW(max_abs_diff(a, b), ContractError);
}

TEST(TensorTest, CastRoundTrip) {
  Rng rng(1);
  const auto t = random_tensor({3, 4, 5}, rng);
  EXPECT_EQ(t.cast<float>().cast<double>().shape(), t.shape());
  EXPECT_LT(max_abs_diff(t.cast<float>().cast<double>(), t), 1e-7);
}

class ConvOracleTest : public ::testing::TestWithParam<int> {};

TEST_P(ConvOracleTest, MatchesDirectSummation) {
  Rng rng(100 + GetParam());
  KernelSpec s;
  s.in_channels = 3;
  s.out_channels = 4;
  s.dilation = GetParam();
  for (auto [h, w] : {std::pair{7, 9}, std::pair{13, 5}, std::pair{1, 1}}) {
    const auto in = random_tensor({3, h, w}, rng);
    const auto wt = random_tensor({4, 3, 3, 3}, rng);
    const auto b = random_tensor({4}, rng);
    EXPECT_LT(max_abs_diff(conv2d_forward(in, wt, b, s), brute_force_conv(in, wt, b, s)), 1e-12);
  }
}

INSTANTIATE_TEST_SUITE_P(Dilations, ConvOracleTest, ::testing::Values(1, 2, 3, 6, 12));

TEST(ConvTest, NonSquareKernel) {
  Rng rng(7);
  KernelSpec s{2, 2, 1, 5, 2};
  const auto in = random_tensor({2, 6, 11}, rng);
  const auto w = random_tensor({2, 2, 1, 5}, rng);
  const auto b = random_tensor({2}, rng);
  EXPECT_LT(max_abs_diff(conv2d_forward(in, w, b, s), brute_force_conv(in, w, b, s)), 1e-12);
}

TEST(ConvTest, OneByOneKernelIsChannelMix) {
  KernelSpec s{1, 2, 1, 1, 1};
  Tensord in({2, 1, 2}, std::vector<double>{1, 2, 3, 4});
  Tensord w({1, 2, 1, 1}, std::vector<double>{10, 100});
  Tensord b({1}, std::vector<double>{0.5});
  const auto out = conv2d_forward(in, w, b, s);
  EXPECT_DOUBLE_EQ(out(0, 0, 0), 310.5);
  EXPECT_DOUBLE_EQ(out(0, 0, 1), 420.5);
}

TEST(ConvTest, IdentityKernelCopiesInput) {
  Rng rng(3);
  KernelSpec s{4, 4, 3, 3, 6};
  const auto in = random_tensor({4, 8, 8}, rng);
  const auto out = conv2d_forward(in, identity_kernel<double>(s), Tensord({4}), s);
  EXPECT_EQ(out, in);
}

TEST(ConvTest, Im2colAndCol2imAreAdjoint) {
  // <im2col(x), c> == <x, col2im(c)> for any x, c.
  Rng rng(5);
  KernelSpec s{1, 3, 3, 3, 2};
  const auto x = random_tensor({3, 6, 7}, rng);
  const auto cols = im2col(x, s);
  const auto c = random_tensor(cols.shape(), rng);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) lhs += cols[i] * c[i];
  const auto back = col2im(c, s, 6, 7);
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x[i] * back[i];
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
}

TEST(ConvTest, BackwardBiasIsUpstreamSum) {
  Rng rng(9);
  KernelSpec s{2, 1, 3, 3, 1};
  const auto in = random_tensor({1, 5, 5}, rng);
  const auto g = random_tensor({2, 5, 5}, rng);
  const auto grads = conv2d_backward(in, random_tensor({2, 1, 3, 3}, rng), s, g);
  for (int o = 0; o < 2; ++o) {
    double total = 0.0;
    for (double v : g.channel(o)) total += v;
    EXPECT_NEAR(grads.grad_bias[o], total, 1e-12);
  }
}

TEST(ConvTest, RejectsBadShapes) {
  KernelSpec s{2, 3, 3, 3, 1};
  EXPECT_THROW(conv2d_forward(Tensord({2, 4, 4}), Tensord({2, 3, 3, 3}), Tensord({2}), s), ContractError);
  EXPECT_THROW(conv2d_forward(Tensord({3, 4, 4}), Tensord({2, 3, 3, 3}), Tensord({3}), s), ContractError);
  KernelSpec even{1, 1, 2, 2, 1};
  EXPECT_THROW(even.validate(), ContractError);
  KernelSpec zero_dilation{1, 1, 3, 3, 0};
  EXPECT_THROW(zero_dilation.validate(), ContractError);
}

TEST(ConvTest, ReluAndBackward) {
  Tensord x({4}, std::vector<double>{-1, 0, 2, -3});
  const auto y = relu(x);
  EXPECT_EQ(y, Tensord({4}, std::vector<double>{0, 0, 2, 0}));
  const auto g = relu_backward(x, Tensord({4}, std::vector<double>{1, 1, 1, 1}));
  EXPECT_EQ(g, Tensord({4}, std::vector<double>{0, 0, 1, 0}));
}

}  // namespace
}  // namespace posewarp
