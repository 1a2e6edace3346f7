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

#include "posewarp/backbone.hpp"

#include <sstream>

#include "posewarp/text_kv.hpp"

namespace posewarp {

std::vector<KernelSpec> BackboneArch::layer_specs() const {
  std::vector<KernelSpec> specs;
  for (int l = 0; l < num_layers(); ++l) {
    KernelSpec s;
    s.in_channels = l == 0 ? in_channels : width;
    s.out_channels = l == num_layers() - 1 ? joints : width;
    s.kernel_h = s.kernel_w = kernel;
    s.dilation = dilations.empty() ? 1 : dilations[static_cast<std::size_t>(l)];
    specs.push_back(s);
  }
  return specs;
}

void BackboneArch::validate() const {
  POSEWARP_REQUIRE(in_channels >= 1, "BackboneArch: in_channels must be >= 1");
  POSEWARP_REQUIRE(width >= 1, "BackboneArch: width must be >= 1");
  POSEWARP_REQUIRE(hidden_layers >= 0, "BackboneArch: hidden_layers must be >= 0");
  POSEWARP_REQUIRE(joints >= 1, "BackboneArch: joints must be >= 1");
  POSEWARP_REQUIRE(kernel >= 1 && kernel % 2 == 1, "BackboneArch: kernel must be odd");
  POSEWARP_REQUIRE(dilations.empty() || static_cast<int>(dilations.size()) == num_layers(),
                   "BackboneArch: one dilation per layer required");
}

std::string BackboneArch::to_string() const {
  std::ostringstream os;
  os << "in=" << in_channels << ",width=" << width << ",hidden=" << hidden_layers << ",joints=" << joints
     << ",kernel=" << kernel << ",dilations=" << join_ints(dilations, ':');
  return os.str();
}

BackboneArch BackboneArch::parse(const std::string& text) {
  BackboneArch a;
  for (const auto& [key, value] : parse_inline_kv(text)) {
    if (key == "in") a.in_channels = parse_int(key, value);
    else if (key == "width") a.width = parse_int(key, value);
    else if (key == "hidden") a.hidden_layers = parse_int(key, value);
    else if (key == "joints") a.joints = parse_int(key, value);
    else if (key == "kernel") a.kernel = parse_int(key, value);
    else if (key == "dilations") a.dilations = parse_int_list(key, value, ':');
    else throw ContractError("BackboneArch: unknown key '" + key + "'");
  }
  a.validate();
  return a;
}

template <typename T>
BackboneParams<T> BackboneParams<T>::zeros(const BackboneArch& arch) {
  arch.validate();
  BackboneParams<T> p;
  p.arch = arch;
  for (const auto& spec : arch.layer_specs()) p.layers.emplace_back(spec);
  return p;
}

template <typename T>
BackboneParams<T> BackboneParams<T>::he_initialized(const BackboneArch& arch, std::uint64_t seed) {
  BackboneParams<T> p = zeros(arch);
  Rng rng(derive_seed(seed, "backbone_init"));
  for (auto& layer : p.layers) he_init(layer, rng);
  return p;
}

template <typename T>
void BackboneParams<T>::validate() const {
  arch.validate();
  const auto specs = arch.layer_specs();
  POSEWARP_REQUIRE(layers.size() == specs.size(), "BackboneParams: layer count " + std::to_string(layers.size()) +
                                                      " does not match architecture (" +
                                                      std::to_string(specs.size()) + ")");
  for (std::size_t l = 0; l < specs.size(); ++l) {
    const auto& s = specs[l];
    const auto& layer = layers[l];
    POSEWARP_REQUIRE(layer.spec.in_channels == s.in_channels && layer.spec.out_channels == s.out_channels &&
                         layer.spec.kernel_h == s.kernel_h && layer.spec.kernel_w == s.kernel_w &&
                         layer.spec.dilation == s.dilation,
                     "BackboneParams: layer " + std::to_string(l) + " spec " + layer.spec.to_string() +
                         " does not match architecture " + s.to_string());
    POSEWARP_REQUIRE(layer.weights.shape() == std::vector<int>({s.out_channels, s.in_channels, s.kernel_h, s.kernel_w}),
                     "BackboneParams: layer " + std::to_string(l) + " weight shape mismatch");
    POSEWARP_REQUIRE(layer.bias.shape() == std::vector<int>({s.out_channels}),
                     "BackboneParams: layer " + std::to_string(l) + " bias shape mismatch");
  }
}

template <typename T>
std::pair<Heatmap<T>, BackboneCache<T>> backbone_forward(const Tensor<T>& frame, const BackboneParams<T>& params) {
  params.validate();
  POSEWARP_REQUIRE(frame.rank() == 3 && frame.dim(0) == params.arch.in_channels,
                   "backbone_forward: frame must be [" + std::to_string(params.arch.in_channels) + ",H,W], got " +
                       frame.shape_string());
  POSEWARP_REQUIRE(frame.dim(1) >= 16 && frame.dim(2) >= 16, "backbone_forward: frame must be at least 16x16");
  BackboneCache<T> cache;
  cache.params_id = &params;
  cache.revision = params.revision;
  Tensor<T> x = frame;
  const std::size_t last = params.layers.size() - 1;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Tensor<T> out = conv2d_forward(x, params.layers[l]);
    cache.layer_inputs.push_back(std::move(x));
    if (l == last) return {std::move(out), std::move(cache)};
    x = relu(out);
    cache.pre_activations.push_back(std::move(out));
  }
  return {};  // unreachable: an architecture always has >= 2 layers
}

template <typename T>
Heatmap<T> backbone_predict(const Tensor<T>& frame, const BackboneParams<T>& params) {
  params.validate();
  POSEWARP_REQUIRE(frame.rank() == 3 && frame.dim(0) == params.arch.in_channels,
                   "backbone_predict: frame channel mismatch");
  POSEWARP_REQUIRE(frame.dim(1) >= 16 && frame.dim(2) >= 16, "backbone_predict: frame must be at least 16x16");
  Tensor<T> x = frame;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    x = conv2d_forward(x, params.layers[l]);
    if (l + 1 < params.layers.size()) {
      for (auto& v : x.data()) v = v > T(0) ? v : T(0);
    }
  }
  return x;
}

template <typename T>
BackboneGrads<T> backbone_backward(const BackboneCache<T>& cache, const BackboneParams<T>& params,
                                   const Tensor<T>& upstream_grad, bool need_frame_grad) {
  POSEWARP_REQUIRE(cache.params_id == &params && cache.revision == params.revision,
                   "backbone_backward: stale cache (parameters changed since forward)");
  POSEWARP_REQUIRE(cache.layer_inputs.size() == params.layers.size(),
                   "backbone_backward: cache does not match parameter layer count");
  BackboneGrads<T> grads;
  grads.params = zeros_like(params);
  Tensor<T> g = upstream_grad;
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    if (l + 1 < params.layers.size()) g = relu_backward(cache.pre_activations[l], g);
    ConvGrads<T> cg = conv2d_backward(cache.layer_inputs[l], params.layers[l].weights, params.layers[l].spec, g);
    grads.params.layers[l].weights = std::move(cg.grad_weights);
    grads.params.layers[l].bias = std::move(cg.grad_bias);
    if (l > 0 || need_frame_grad) g = std::move(cg.grad_input);
  }
  if (need_frame_grad) grads.grad_frame = std::move(g);
  return grads;
}

template struct BackboneParams<float>;
template struct BackboneParams<double>;
template std::pair<Heatmap<float>, BackboneCache<float>> backbone_forward(const Tensor<float>&,
                                                                          const BackboneParams<float>&);
template std::pair<Heatmap<double>, BackboneCache<double>> backbone_forward(const Tensor<double>&,
                                                                            const BackboneParams<double>&);
template Heatmap<float> backbone_predict(const Tensor<float>&, const BackboneParams<float>&);
template Heatmap<double> backbone_predict(const Tensor<double>&, const BackboneParams<double>&);
template BackboneGrads<float> backbone_backward(const BackboneCache<float>&, const BackboneParams<float>&,
                                                const Tensor<float>&, bool);
template BackboneGrads<double> backbone_backward(const BackboneCache<double>&, const BackboneParams<double>&,
                                                 const Tensor<double>&, bool);

}  // namespace posewarp
