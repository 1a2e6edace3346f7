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

#ifndef POSEWARP_BACKBONE_HPP_
#define POSEWARP_BACKBONE_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "posewarp/conv.hpp"
#include "posewarp/heatmaps.hpp"
#include "posewarp/params.hpp"

namespace posewarp {

/// conv(in -> width) -> ReLU -> [conv(width -> width) -> ReLU] x hidden_layers
/// -> conv(width -> joints). All layers share the kernel size and use "same"
/// padding, so heatmaps come out at frame resolution.
struct BackboneArch {
  int in_channels = 1;
  int width = 32;
  int hidden_layers = 4;
  int joints = 13;
  int kernel = 3;
  /// Per-layer dilation, empty meaning 1 everywhere.
  std::vector<int> dilations;

  int num_layers() const { return hidden_layers + 2; }
  std::vector<KernelSpec> layer_specs() const;
  void validate() const;
  std::string to_string() const;
  static BackboneArch parse(const std::string& text);
  friend bool operator==(const BackboneArch&, const BackboneArch&) = default;
};

template <typename T>
struct BackboneParams {
  using value_type = T;

  BackboneArch arch;
  std::vector<ConvLayer<T>> layers;
  /// Bumped by every optimiser update; caches remember the value they saw.
  std::uint64_t revision = 0;

  static BackboneParams zeros(const BackboneArch& arch);
  static BackboneParams he_initialized(const BackboneArch& arch, std::uint64_t seed);

  void validate() const;

  template <typename F>
  void for_each_layer(F&& f) {
    for (std::size_t i = 0; i < layers.size(); ++i) f("backbone.conv" + std::to_string(i), layers[i]);
  }
  template <typename F>
  void for_each_layer(F&& f) const {
    for (std::size_t i = 0; i < layers.size(); ++i) f("backbone.conv" + std::to_string(i), layers[i]);
  }

  template <typename U>
  BackboneParams<U> cast() const {
    BackboneParams<U> out;
    out.arch = arch;
    for (const auto& l : layers) {
      ConvLayer<U> c(l.spec);
      c.weights = l.weights.template cast<U>();
      c.bias = l.bias.template cast<U>();
      out.layers.push_back(std::move(c));
    }
    return out;
  }
};

template <typename T>
struct BackboneCache {
  /// Input of every layer; layer_inputs[0] is the frame.
  std::vector<Tensor<T>> layer_inputs;
  /// Pre-activation output of every hidden layer (all but the last).
  std::vector<Tensor<T>> pre_activations;
  const void* params_id = nullptr;
  std::uint64_t revision = 0;
};

template <typename T>
struct BackboneGrads {
  BackboneParams<T> params;
  Tensor<T> grad_frame;
};

template <typename T>
std::pair<Heatmap<T>, BackboneCache<T>> backbone_forward(const Tensor<T>& frame, const BackboneParams<T>& params);

/// Heatmap only, without retaining activations.
template <typename T>
Heatmap<T> backbone_predict(const Tensor<T>& frame, const BackboneParams<T>& params);

/// Throws ContractError when `cache` came from a different parameter object or
/// an earlier revision of `params`.
template <typename T>
BackboneGrads<T> backbone_backward(const BackboneCache<T>& cache, const BackboneParams<T>& params,
                                   const Tensor<T>& upstream_grad, bool need_frame_grad = true);

}  // namespace posewarp

#endif  // POSEWARP_BACKBONE_HPP_
