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
#include "posewarp/backbone.hpp"
#include "posewarp/error.hpp"
#include "posewarp/warper.hpp"

namespace posewarp {
namespace {

using testing::random_tensor;

WarperConfig small_config() {
  WarperConfig c;
  c.joints = 3;
  c.res_blocks = 2;
  c.res_width = 5;
  c.dilations = {1, 3, 6};
  return c;
}

WarperParams<double> random_params(const WarperConfig& c, Rng& rng, double offset_scale) {
  auto p = WarperParams<double>::identity_initialized(c, 3);
  p.for_each_layer([&](const std::string& name, ConvLayer<double>& layer) {
    const bool offset = name.find(".offset") != std::string::npos;
    const double s = offset ? offset_scale : 0.3;
    layer.weights = random_tensor(layer.weights.shape(), rng, -s, s);
    layer.bias = random_tensor(layer.bias.shape(), rng, -s, s);
  });
  return p;
}

TEST(WarperTest, IdentityInitReturnsSourceOnZeroMotion) {
  Rng rng(1);
  const auto c = small_config();
  const auto p = WarperParams<double>::identity_initialized(c, 9);
  const auto f = random_tensor({3, 10, 12}, rng, 0.0, 1.0);
  const auto out = warp_heatmap(f, compute_difference(f, f), p).first;
  EXPECT_LT(max_abs_diff(out.warped, f), 1e-12);
  ASSERT_EQ(out.offsets.size(), 3u);
  for (const auto& o : out.offsets) {
    for (double v : o.data.data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(WarperTest, UnitIdentityKernelsScaleByBranchCount) {
  Rng rng(2);
  for (const auto& c : {WarperConfig{}, small_config()}) {
    auto p = WarperParams<double>::identity_initialized(c, 4);
    for (auto& br : p.branches) br.deform.weights = identity_kernel<double>(br.deform.spec, 1.0);
    const auto y = random_tensor({c.joints, 16, 16}, rng, 0.0, 1.0);
    const auto f = random_tensor({c.joints, 16, 16}, rng, 0.0, 1.0);
    const auto out = propagate_annotation(y, f, f, p);
    EXPECT_LT(max_abs_diff(out, static_cast<double>(c.dilations.size()) * y), 1e-12);
  }
}

TEST(WarperTest, OutputIsSumOfPartials) {
  Rng rng(3);
  const auto c = small_config();
  const auto p = random_params(c, rng, 0.5);
  const auto f_source = random_tensor({3, 9, 11}, rng, 0.0, 1.0);
  const auto psi = random_tensor({3, 9, 11}, rng);
  const auto out = warp_heatmap(f_source, psi, p).first;
  ASSERT_EQ(out.partials.size(), c.dilations.size());
  Tensord total(out.warped.shape());
  for (const auto& part : out.partials) total += part;
  EXPECT_LT(max_abs_diff(total, out.warped), 1e-12);
}

TEST(WarperTest, ResidualStackIsPaddedIdentityAtInit) {
  Rng rng(4);
  const auto c = small_config();
  const auto p = WarperParams<double>::identity_initialized(c, 1);
  const auto psi = random_tensor({3, 6, 7}, rng);
  const auto feat = residual_stack_forward(psi, p);
  ASSERT_EQ(feat.shape(), (std::vector<int>{5, 6, 7}));
  for (int ch = 0; ch < 5; ++ch)
    for (int y = 0; y < 6; ++y)
      for (int x = 0; x < 7; ++x) EXPECT_EQ(feat(ch, y, x), ch < 3 ? psi(ch, y, x) : 0.0);
}

TEST(WarperTest, DifferenceIsTargetMinusSource) {
  Tensord a({1, 1, 2}, std::vector<double>{3, 1}), b({1, 1, 2}, std::vector<double>{1, 1});
  EXPECT_EQ(compute_difference(a, b), Tensord({1, 1, 2}, std::vector<double>{2, 0}));
}

TEST(WarperTest, BackwardGradientsHaveParameterShapes) {
  Rng rng(5);
  const auto c = small_config();
  const auto p = random_params(c, rng, 0.5);
  const auto f = random_tensor({3, 8, 8}, rng, 0.0, 1.0);
  const auto psi = random_tensor({3, 8, 8}, rng);
  const auto [out, cache] = warp_heatmap(f, psi, p);
  const auto g = warper_backward(cache, p, random_tensor(out.warped.shape(), rng));
  EXPECT_EQ(g.grad_f_source.shape(), f.shape());
  EXPECT_EQ(g.grad_psi.shape(), psi.shape());
  EXPECT_NO_THROW(g.params.validate());
}

TEST(WarperTest, StaleCacheIsRejected) {
  Rng rng(6);
  const auto c = small_config();
  auto p = random_params(c, rng, 0.5);
  const auto f = random_tensor({3, 8, 8}, rng, 0.0, 1.0);
  const auto [out, cache] = warp_heatmap(f, f, p);
  ++p.revision;
  EXPECT_THROW(warper_backward(cache, p, out.warped), ContractError);
}

TEST(AggregateTest, ZeroDeltaWithIdentityInitIsCurrentHeatmap) {
  Rng rng(7);
  const auto c = small_config();
  const auto p = WarperParams<double>::identity_initialized(c, 2);
  std::vector<Tensord> hs;
  for (int t = 0; t < 5; ++t) hs.push_back(random_tensor({3, 8, 8}, rng, 0.0, 1.0));
  const std::vector<int> zero{0};
  EXPECT_LT(max_abs_diff(temporal_aggregate_heatmaps<double>(hs, 2, zero, p), hs[2]), 1e-12);
}

TEST(AggregateTest, DeltasClampAtVideoEnds) {
  Rng rng(8);
  const auto c = small_config();
  const auto p = random_params(c, rng, 0.5);
  std::vector<Tensord> hs;
  for (int t = 0; t < 4; ++t) hs.push_back(random_tensor({3, 8, 8}, rng, 0.0, 1.0));
  const std::vector<int> far{-3}, near{0};
  EXPECT_EQ(temporal_aggregate_heatmaps<double>(hs, 0, far, p), temporal_aggregate_heatmaps<double>(hs, 0, near, p));
  const std::vector<int> none;
  EXPECT_THROW(temporal_aggregate_heatmaps<double>(hs, 0, none, p), ContractError);
  EXPECT_THROW(temporal_aggregate_heatmaps<double>(hs, 4, near, p), ContractError);
}

TEST(WarperConfigTest, ValidationAndTextRoundTrip) {
  auto c = small_config();
  EXPECT_EQ(WarperConfig::parse(c.to_string()), c);
  c.res_width = 2;
  EXPECT_THROW(c.validate(), ContractError);
  c = small_config();
  c.dilations.clear();
  EXPECT_THROW(c.validate(), ContractError);
  c = small_config();
  c.dilations = {0};
  EXPECT_THROW(c.validate(), ContractError);
}

TEST(BackboneTest, ShapesAndDeterministicInit) {
  BackboneArch arch;
  arch.width = 6;
  arch.hidden_layers = 2;
  arch.joints = 4;
  arch.dilations = {1, 2, 4, 1};
  EXPECT_EQ(BackboneArch::parse(arch.to_string()), arch);
  const auto a = BackboneParams<float>::he_initialized(arch, 5);
  const auto b = BackboneParams<float>::he_initialized(arch, 5);
  const auto other = BackboneParams<float>::he_initialized(arch, 6);
  EXPECT_EQ(a.layers[0].weights, b.layers[0].weights);
  EXPECT_NE(a.layers[0].weights, other.layers[0].weights);
  Rng rng(1);
  const Tensorf frame = random_tensor({1, 20, 18}, rng, 0.0, 1.0).cast<float>();
  const auto [h, cache] = backbone_forward(frame, a);
  EXPECT_EQ(h.shape(), (std::vector<int>{4, 20, 18}));
  EXPECT_EQ(backbone_predict(frame, a), h);
}

TEST(BackboneTest, RejectsMismatchedDilations) {
  BackboneArch arch;
  arch.dilations = {1, 2};
  EXPECT_THROW(arch.validate(), ContractError);
}

}  // namespace
}  // namespace posewarp
