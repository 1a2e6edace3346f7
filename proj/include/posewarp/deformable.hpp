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

#ifndef POSEWARP_DEFORMABLE_HPP_
#define POSEWARP_DEFORMABLE_HPP_

#include <vector>

#include "posewarp/conv.hpp"
#include "posewarp/tensor.hpp"

namespace posewarp {

/// Per-pixel sampling displacements of a deformable convolution.
///
/// `data` has shape [2 * groups * kh * kw, H, W]. For offset group g and kernel
/// tap k = i * kw + j, channel 2 * (g * kh * kw + k) holds the row displacement
/// and the following channel the column displacement, both in pixels. Input
/// channels are split into `groups` contiguous blocks, each sharing one set of
/// offsets; groups == 1 shares a single (dy, dx) per tap across all channels.
template <typename T>
struct OffsetField {
  Tensor<T> data;
  int groups = 1;

  OffsetField() = default;
  explicit OffsetField(Tensor<T> d, int g = 1) : data(std::move(d)), groups(g) {}

  static OffsetField zeros(const KernelSpec& spec, int height, int width, int groups = 1) {
    return OffsetField(Tensor<T>({2 * groups * spec.taps(), height, width}), groups);
  }

  T dy(int group, int tap, int y, int x) const { return data(2 * (group * taps_per_group() + tap), y, x); }
  T dx(int group, int tap, int y, int x) const { return data(2 * (group * taps_per_group() + tap) + 1, y, x); }

  int taps_per_group() const { return data.dim(0) / (2 * groups); }

  /// Throws unless the channel count is 2 * groups * kh * kw and the spatial
  /// size matches (height, width).
  void validate(const KernelSpec& spec, int height, int width) const;
};

/// Bilinear interpolation of every channel of `map` at fractional (y, x).
/// Neighbours outside the image read as zero.
template <typename T>
std::vector<T> bilinear_sample(const Tensor<T>& map, T y, T x);

template <typename T>
struct DeformGrads {
  Tensor<T> grad_input;
  Tensor<T> grad_offsets;
  Tensor<T> grad_weights;
  Tensor<T> grad_bias;
};

/// Patch matrix [C*kh*kw, H*W] whose entries are the bilinearly sampled
/// input values at each tap's displaced location.
template <typename T>
Tensor<T> deform_im2col(const Tensor<T>& input, const OffsetField<T>& offsets, const KernelSpec& spec);

template <typename T>
Tensor<T> deform_conv_forward(const Tensor<T>& input, const OffsetField<T>& offsets, const Tensor<T>& weights,
                              const Tensor<T>& bias, const KernelSpec& spec);

/// Exact gradients of deform_conv_forward. The offset gradient differentiates
/// the bilinear interpolant inside the cell chosen by floor(), which at integer
/// coordinates is the forward (right/down) slope.
template <typename T>
DeformGrads<T> deform_conv_backward(const Tensor<T>& input, const OffsetField<T>& offsets,
                                    const Tensor<T>& weights, const KernelSpec& spec,
                                    const Tensor<T>& upstream_grad);

}  // namespace posewarp

#endif  // POSEWARP_DEFORMABLE_HPP_
