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

#include "posewarp/warper.hpp"

#include <algorithm>
#include <sstream>

#include "posewarp/text_kv.hpp"

namespace posewarp {

WarperConfig WarperConfig::full_scale(int joints) {
  WarperConfig c;
  c.joints = joints;
  c.res_blocks = 20;
  c.res_width = 128;
  return c;
}

KernelSpec WarperConfig::offset_head_spec(int dilation) const {
  KernelSpec s;
  s.in_channels = feature_channels();
  s.out_channels = 2 * offset_groups * kernel * kernel;
  s.kernel_h = s.kernel_w = kernel;
  s.dilation = dilation;
  return s;
}

KernelSpec WarperConfig::deform_spec(int dilation) const {
  KernelSpec s;
  s.in_channels = s.out_channels = joints;
  s.kernel_h = s.kernel_w = kernel;
  s.dilation = dilation;
  return s;
}

void WarperConfig::validate() const {
  POSEWARP_REQUIRE(joints >= 1, "WarperConfig: joints must be >= 1");
  POSEWARP_REQUIRE(res_blocks >= 0, "WarperConfig: res_blocks must be >= 0");
  POSEWARP_REQUIRE(res_blocks == 0 || res_width >= joints,
                   "WarperConfig: res_width must be >= joints for the zero-padded skip");
  POSEWARP_REQUIRE(!dilations.empty(), "WarperConfig: dilation list must not be empty");
  for (std::size_t i = 0; i < dilations.size(); ++i) {
    POSEWARP_REQUIRE(dilations[i] >= 1, "WarperConfig: dilations must be >= 1");
    POSEWARP_REQUIRE(i == 0 || dilations[i] > dilations[i - 1], "WarperConfig: dilations must be strictly increasing");
  }
  POSEWARP_REQUIRE(kernel >= 1 && kernel % 2 == 1, "WarperConfig: kernel must be odd");
  POSEWARP_REQUIRE(offset_groups >= 1 && joints % offset_groups == 0,
                   "WarperConfig: offset_groups must divide joints");
}

std::string WarperConfig::to_string() const {
  std::ostringstream os;
  os << "joints=" << joints << ",res_blocks=" << res_blocks << ",res_width=" << res_width
     << ",dilations=" << join_ints(dilations, ':') << ",kernel=" << kernel << ",offset_groups=" << offset_groups;
  return os.str();
}

WarperConfig WarperConfig::parse(const std::string& text) {
  WarperConfig c;
  for (const auto& [key, value] : parse_inline_kv(text)) {
    if (key == "joints") c.joints = parse_int(key, value);
    else if (key == "res_blocks") c.res_blocks = parse_int(key, value);
    else if (key == "res_width") c.res_width = parse_int(key, value);
    else if (key == "dilations") c.dilations = parse_int_list(key, value, ':');
    else if (key == "kernel") c.kernel = parse_int(key, value);
    else if (key == "offset_groups") c.offset_groups = parse_int(key, value);
    else throw ConfigError(key, "WarperConfig: unknown key '" + key + "'");
  }
  c.validate();
  return c;
}

template <typename T>
WarperParams<T> WarperParams<T>::zeros(const WarperConfig& config) {
  config.validate();
  WarperParams<T> p;
  p.config = config;
  for (int b = 0; b < config.res_blocks; ++b) {
    KernelSpec a;
    a.in_channels = b == 0 ? config.joints : config.res_width;
    a.out_channels = config.res_width;
    a.kernel_h = a.kernel_w = config.kernel;
    KernelSpec bs = a;
    bs.in_channels = config.res_width;
    p.blocks.push_back({ConvLayer<T>(a), ConvLayer<T>(bs)});
  }
  for (int d : config.dilations) {
    p.branches.push_back({d, ConvLayer<T>(config.offset_head_spec(d)), ConvLayer<T>(config.deform_spec(d))});
  }
  return p;
}

template <typename T>
WarperParams<T> WarperParams<T>::identity_initialized(const WarperConfig& config, std::uint64_t seed) {
  WarperParams<T> p = zeros(config);
  Rng rng(derive_seed(seed, "warper_init"));
  // conv_b starts at zero so every block is the identity at initialisation.
  for (auto& b : p.blocks) he_init(b.conv_a, rng);
  const T scale = T(1) / static_cast<T>(config.dilations.size());
  for (auto& br : p.branches) br.deform.weights = identity_kernel<T>(br.deform.spec, scale);
  return p;
}

template <typename T>
void WarperParams<T>::validate() const {
  config.validate();
  POSEWARP_REQUIRE(static_cast<int>(blocks.size()) == config.res_blocks,
                   "WarperParams: residual block count does not match config");
  POSEWARP_REQUIRE(branches.size() == config.dilations.size(), "WarperParams: branch count does not match dilations");
  const WarperParams<T> ref = zeros(config);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    POSEWARP_REQUIRE(blocks[b].conv_a.weights.shape() == ref.blocks[b].conv_a.weights.shape() &&
                         blocks[b].conv_b.weights.shape() == ref.blocks[b].conv_b.weights.shape(),
                     "WarperParams: residual block " + std::to_string(b) + " shape mismatch");
  }
  for (std::size_t i = 0; i < branches.size(); ++i) {
    const auto& br = branches[i];
    POSEWARP_REQUIRE(br.dilation == config.dilations[i], "WarperParams: branch dilation mismatch");
    POSEWARP_REQUIRE(br.offset_head.spec.out_channels == 2 * config.offset_groups * br.deform.spec.taps(),
                     "WarperParams: offset head must emit 2*groups*kh*kw channels");
    POSEWARP_REQUIRE(br.offset_head.weights.shape() == ref.branches[i].offset_head.weights.shape() &&
                         br.deform.weights.shape() == ref.branches[i].deform.weights.shape(),
                     "WarperParams: branch d=" + std::to_string(br.dilation) + " shape mismatch");
  }
}

template <typename T>
Tensor<T> compute_difference(const Heatmap<T>& f_target, const Heatmap<T>& f_source) {
  f_target.require_same_shape(f_source, "compute_difference");
  return f_target - f_source;
}

namespace {

template <typename T>
Tensor<T> pad_channels(const Tensor<T>& x, int channels) {
  if (x.dim(0) == channels) return x;
  Tensor<T> out({channels, x.dim(1), x.dim(2)});
  std::copy(x.data().begin(), x.data().end(), out.data().begin());
  return out;
}

template <typename T>
Tensor<T> run_blocks(const Tensor<T>& psi, const WarperParams<T>& params, WarpCache<T>* cache) {
  Tensor<T> x = psi;
  for (const auto& block : params.blocks) {
    Tensor<T> a = conv2d_forward(x, block.conv_a);
    Tensor<T> out = conv2d_forward(relu(a), block.conv_b);
    out += pad_channels(x, params.config.res_width);
    if (cache) {
      cache->block_inputs.push_back(std::move(x));
      cache->block_pre_activations.push_back(std::move(a));
    }
    x = std::move(out);
  }
  return x;
}

}  // namespace

template <typename T>
Tensor<T> residual_stack_forward(const Tensor<T>& psi, const WarperParams<T>& params) {
  return run_blocks<T>(psi, params, nullptr);
}

template <typename T>
std::pair<WarpOutput<T>, WarpCache<T>> warp_heatmap(const Heatmap<T>& f_source, const Tensor<T>& psi,
                                                    const WarperParams<T>& params) {
  params.validate();
  POSEWARP_REQUIRE(f_source.rank() == 3 && f_source.dim(0) == params.config.joints,
                   "warp_heatmap: source heatmap must have " + std::to_string(params.config.joints) + " channels");
  f_source.require_same_shape(psi, "warp_heatmap(psi vs f_source)");

  WarpCache<T> cache;
  cache.params_id = &params;
  cache.revision = params.revision;
  cache.f_source = f_source;
  cache.features = run_blocks(psi, params, &cache);

  WarpOutput<T> out;
  out.warped = Tensor<T>(f_source.shape());
  for (const auto& br : params.branches) {
    OffsetField<T> offsets(conv2d_forward(cache.features, br.offset_head), params.config.offset_groups);
    Tensor<T> partial = deform_conv_forward(f_source, offsets, br.deform.weights, br.deform.bias, br.deform.spec);
    out.warped += partial;
    out.partials.push_back(std::move(partial));
    out.offsets.push_back(offsets);
    cache.offsets.push_back(std::move(offsets));
  }
  return {std::move(out), std::move(cache)};
}

template <typename T>
WarperGrads<T> warper_backward(const WarpCache<T>& cache, const WarperParams<T>& params,
                               const Tensor<T>& upstream_grad) {
  POSEWARP_REQUIRE(cache.params_id == &params && cache.revision == params.revision,
                   "warper_backward: stale cache (parameters changed since forward)");
  POSEWARP_REQUIRE(cache.offsets.size() == params.branches.size() &&
                       cache.block_inputs.size() == params.blocks.size(),
                   "warper_backward: cache does not match parameter structure");
  cache.f_source.require_same_shape(upstream_grad, "warper_backward(upstream)");

  WarperGrads<T> grads;
  grads.params = zeros_like(params);
  grads.grad_f_source = Tensor<T>(cache.f_source.shape());
  Tensor<T> grad_features(cache.features.shape());

  for (std::size_t i = 0; i < params.branches.size(); ++i) {
    const auto& br = params.branches[i];
    auto& gbr = grads.params.branches[i];
    DeformGrads<T> dg = deform_conv_backward(cache.f_source, cache.offsets[i], br.deform.weights, br.deform.spec,
                                             upstream_grad);
    gbr.deform.weights = std::move(dg.grad_weights);
    gbr.deform.bias = std::move(dg.grad_bias);
    grads.grad_f_source += dg.grad_input;
    ConvGrads<T> hg = conv2d_backward(cache.features, br.offset_head.weights, br.offset_head.spec, dg.grad_offsets);
    gbr.offset_head.weights = std::move(hg.grad_weights);
    gbr.offset_head.bias = std::move(hg.grad_bias);
    grad_features += hg.grad_input;
  }

  Tensor<T> g = std::move(grad_features);
  for (std::size_t b = params.blocks.size(); b-- > 0;) {
    const auto& block = params.blocks[b];
    auto& gblock = grads.params.blocks[b];
    const Tensor<T>& pre = cache.block_pre_activations[b];
    ConvGrads<T> gb = conv2d_backward(relu(pre), block.conv_b.weights, block.conv_b.spec, g);
    gblock.conv_b.weights = std::move(gb.grad_weights);
    gblock.conv_b.bias = std::move(gb.grad_bias);
    ConvGrads<T> ga = conv2d_backward(cache.block_inputs[b], block.conv_a.weights, block.conv_a.spec,
                                      relu_backward(pre, gb.grad_input));
    gblock.conv_a.weights = std::move(ga.grad_weights);
    gblock.conv_a.bias = std::move(ga.grad_bias);
    // Skip path: the first in_channels channels of g flow straight through.
    Tensor<T> gx = std::move(ga.grad_input);
    std::transform(gx.data().begin(), gx.data().end(), g.data().begin(), gx.data().begin(), std::plus<T>());
    g = std::move(gx);
  }
  grads.grad_psi = std::move(g);
  return grads;
}

template <typename T>
Heatmap<T> propagate_annotation(const Heatmap<T>& y_labeled, const Heatmap<T>& f_labeled,
                                const Heatmap<T>& f_unlabeled, const WarperParams<T>& params) {
  y_labeled.require_same_shape(f_labeled, "propagate_annotation(y_labeled vs f_labeled)");
  return warp_heatmap(y_labeled, compute_difference(f_unlabeled, f_labeled), params).first.warped;
}

template <typename T>
Heatmap<T> temporal_aggregate_heatmaps(std::span<const Heatmap<T>> heatmaps, int t, std::span<const int> deltas,
                                       const WarperParams<T>& params) {
  POSEWARP_REQUIRE(!deltas.empty(), "temporal_aggregate: delta list must not be empty");
  POSEWARP_REQUIRE(t >= 0 && t < static_cast<int>(heatmaps.size()), "temporal_aggregate: t out of range");
  const int last = static_cast<int>(heatmaps.size()) - 1;
  Heatmap<T> total(heatmaps[static_cast<std::size_t>(t)].shape());
  for (int delta : deltas) {
    const int s = std::clamp(t + delta, 0, last);
    const Heatmap<T>& f_t = heatmaps[static_cast<std::size_t>(t)];
    const Heatmap<T>& f_s = heatmaps[static_cast<std::size_t>(s)];
    total += warp_heatmap(f_s, compute_difference(f_t, f_s), params).first.warped;
  }
  return total;
}

template <typename T>
Heatmap<T> temporal_aggregate(std::span<const Tensor<T>> frames, int t, std::span<const int> deltas,
                              const BackboneParams<T>& backbone, const WarperParams<T>& warper) {
  POSEWARP_REQUIRE(!deltas.empty(), "temporal_aggregate: delta list must not be empty");
  POSEWARP_REQUIRE(t >= 0 && t < static_cast<int>(frames.size()), "temporal_aggregate: t out of range");
  const int last = static_cast<int>(frames.size()) - 1;
  // Only the frames the deltas touch are pushed through the backbone.
  std::vector<Heatmap<T>> heatmaps(frames.size());
  auto need = [&](int i) {
    if (heatmaps[static_cast<std::size_t>(i)].empty()) {
      heatmaps[static_cast<std::size_t>(i)] = backbone_predict(frames[static_cast<std::size_t>(i)], backbone);
    }
  };
  need(t);
  for (int delta : deltas) need(std::clamp(t + delta, 0, last));
  for (auto& h : heatmaps) {
    if (h.empty()) h = Heatmap<T>(heatmaps[static_cast<std::size_t>(t)].shape());
  }
  return temporal_aggregate_heatmaps<T>(heatmaps, t, deltas, warper);
}

#define POSEWARP_INSTANTIATE_WARPER(T)                                                                        \
  template struct WarperParams<T>;                                                                           \
  template Tensor<T> compute_difference<T>(const Heatmap<T>&, const Heatmap<T>&);                             \
  template Tensor<T> residual_stack_forward<T>(const Tensor<T>&, const WarperParams<T>&);                     \
  template std::pair<WarpOutput<T>, WarpCache<T>> warp_heatmap<T>(const Heatmap<T>&, const Tensor<T>&,        \
                                                                  const WarperParams<T>&);                    \
  template WarperGrads<T> warper_backward<T>(const WarpCache<T>&, const WarperParams<T>&, const Tensor<T>&);  \
  template Heatmap<T> propagate_annotation<T>(const Heatmap<T>&, const Heatmap<T>&, const Heatmap<T>&,        \
                                              const WarperParams<T>&);                                        \
  template Heatmap<T> temporal_aggregate_heatmaps<T>(std::span<const Heatmap<T>>, int, std::span<const int>,  \
                                                     const WarperParams<T>&);                                 \
  template Heatmap<T> temporal_aggregate<T>(std::span<const Tensor<T>>, int, std::span<const int>,            \
                                            const BackboneParams<T>&, const WarperParams<T>&);

POSEWARP_INSTANTIATE_WARPER(float)
POSEWARP_INSTANTIATE_WARPER(double)

}  // namespace posewarp
