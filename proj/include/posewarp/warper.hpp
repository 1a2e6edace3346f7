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

#ifndef POSEWARP_WARPER_HPP_
#define POSEWARP_WARPER_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posewarp/backbone.hpp"
#include "posewarp/deformable.hpp"
#include "posewarp/heatmaps.hpp"
#include "posewarp/params.hpp"

namespace posewarp {

/// Shape of the warping head. The residual stack turns the heatmap
/// difference into motion features; each dilation owns one offset head and
/// one deformable convolution over the source heatmap.
struct WarperConfig {
  int joints = 13;
  int res_blocks = 4;
  int res_width = 32;
  std::vector<int> dilations{3, 6, 12, 18, 24};
  int kernel = 3;
  int offset_groups = 1;

  /// Twenty 128-wide residual blocks over five dilations.
  static WarperConfig full_scale(int joints);

  int feature_channels() const { return res_blocks > 0 ? res_width : joints; }
  KernelSpec offset_head_spec(int dilation) const;
  KernelSpec deform_spec(int dilation) const;
  void validate() const;
  std::string to_string() const;
  static WarperConfig parse(const std::string& text);
  friend bool operator==(const WarperConfig&, const WarperConfig&) = default;
};

/// out = pad(x) + conv_b(relu(conv_a(x))), where pad zero-extends the
/// channels of x up to the block width.
template <typename T>
struct ResidualBlock {
  ConvLayer<T> conv_a;
  ConvLayer<T> conv_b;
};

template <typename T>
struct WarpBranch {
  int dilation = 1;
  ConvLayer<T> offset_head;
  ConvLayer<T> deform;
};

template <typename T>
struct WarperParams {
  using value_type = T;

  WarperConfig config;
  std::vector<ResidualBlock<T>> blocks;
  std::vector<WarpBranch<T>> branches;
  std::uint64_t revision = 0;

  /// He-initialised residual stack, zero offset heads, and deformable kernels
  /// equal to the centre-one identity scaled by 1/|dilations|, so that the
  /// untrained head returns its source heatmap unchanged.
  static WarperParams identity_initialized(const WarperConfig& config, std::uint64_t seed);
  static WarperParams zeros(const WarperConfig& config);

  void validate() const;

  template <typename F>
  void for_each_layer(F&& f) {
    for_each_layer_impl(*this, f);
  }
  template <typename F>
  void for_each_layer(F&& f) const {
    for_each_layer_impl(*this, f);
  }

  template <typename U>
  WarperParams<U> cast() const;

 private:
  template <typename Self, typename F>
  static void for_each_layer_impl(Self& self, F& f) {
    for (std::size_t b = 0; b < self.blocks.size(); ++b) {
      f("warper.res" + std::to_string(b) + ".conv_a", self.blocks[b].conv_a);
      f("warper.res" + std::to_string(b) + ".conv_b", self.blocks[b].conv_b);
    }
    for (auto& br : self.branches) {
      f("warper.d" + std::to_string(br.dilation) + ".offset", br.offset_head);
      f("warper.d" + std::to_string(br.dilation) + ".deform", br.deform);
    }
  }
};

template <typename T>
template <typename U>
WarperParams<U> WarperParams<T>::cast() const {
  WarperParams<U> out;
  out.config = config;
  auto convert = [](const ConvLayer<T>& l) {
    ConvLayer<U> c(l.spec);
    c.weights = l.weights.template cast<U>();
    c.bias = l.bias.template cast<U>();
    return c;
  };
  for (const auto& b : blocks) out.blocks.push_back({convert(b.conv_a), convert(b.conv_b)});
  for (const auto& br : branches) out.branches.push_back({br.dilation, convert(br.offset_head), convert(br.deform)});
  return out;
}

template <typename T>
struct WarpOutput {
  Heatmap<T> warped;
  std::vector<OffsetField<T>> offsets;
  std::vector<Heatmap<T>> partials;
};

template <typename T>
struct WarpCache {
  Tensor<T> f_source;
  std::vector<Tensor<T>> block_inputs;
  std::vector<Tensor<T>> block_pre_activations;
  Tensor<T> features;
  std::vector<OffsetField<T>> offsets;
  const void* params_id = nullptr;
  std::uint64_t revision = 0;
};

template <typename T>
struct WarperGrads {
  WarperParams<T> params;
  Tensor<T> grad_f_source;
  Tensor<T> grad_psi;
};

/// f_target - f_source.
template <typename T>
Tensor<T> compute_difference(const Heatmap<T>& f_target, const Heatmap<T>& f_source);

/// Motion features of the residual stack for a difference tensor.
template <typename T>
Tensor<T> residual_stack_forward(const Tensor<T>& psi, const WarperParams<T>& params);

/// Warps `f_source` toward the frame whose heatmap difference is `psi`.
template <typename T>
std::pair<WarpOutput<T>, WarpCache<T>> warp_heatmap(const Heatmap<T>& f_source, const Tensor<T>& psi,
                                                    const WarperParams<T>& params);

template <typename T>
WarperGrads<T> warper_backward(const WarpCache<T>& cache, const WarperParams<T>& params,
                               const Tensor<T>& upstream_grad);

/// Carries a rendered annotation of the labelled frame over to an unlabelled
/// frame: the head runs with the difference (f_unlabeled - f_labeled), i.e.
/// the reverse of its training direction.
template <typename T>
Heatmap<T> propagate_annotation(const Heatmap<T>& y_labeled, const Heatmap<T>& f_labeled,
                                const Heatmap<T>& f_unlabeled, const WarperParams<T>& params);

/// Default time gaps for aggregation.
inline const std::vector<int>& default_deltas() {
  static const std::vector<int> d{-3, -2, -1, 0, 1, 2, 3};
  return d;
}

/// Sum over delta of the warp of f[t+delta] onto frame t, where indices
/// outside the clip are clamped to its ends. `heatmaps` are backbone outputs
/// for every frame of the clip.
template <typename T>
Heatmap<T> temporal_aggregate_heatmaps(std::span<const Heatmap<T>> heatmaps, int t, std::span<const int> deltas,
                                       const WarperParams<T>& params);

template <typename T>
Heatmap<T> temporal_aggregate(std::span<const Tensor<T>> frames, int t, std::span<const int> deltas,
                              const BackboneParams<T>& backbone, const WarperParams<T>& warper);

}  // namespace posewarp

#endif  // POSEWARP_WARPER_HPP_
