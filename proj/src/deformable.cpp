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

#include "posewarp/deformable.hpp"

#include <cmath>

#include "matview.hpp"

namespace posewarp {
namespace {

// Corner weights and indices of one bilinear sample. Corners outside the
// image get mask 0 and index 0, so every accessor is branch-free.
template <typename T>
struct BilinearCell {
  T ly, lx;
  T mask[4];  // (y0,x0) (y0,x0+1) (y0+1,x0) (y0+1,x0+1)
  T weight[4];
  int index[4];
  bool any;

  BilinearCell(T y, T x, int height, int width) {
    const T fy = std::floor(y), fx = std::floor(x);
    const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
    ly = y - fy;
    lx = x - fx;
    const int ys[2] = {y0, y0 + 1}, xs[2] = {x0, x0 + 1};
    const T wy[2] = {T(1) - ly, ly}, wx[2] = {T(1) - lx, lx};
    any = false;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const int n = 2 * a + b;
        const bool in = ys[a] >= 0 && ys[a] < height && xs[b] >= 0 && xs[b] < width;
        any = any || in;
        mask[n] = in ? T(1) : T(0);
        index[n] = in ? ys[a] * width + xs[b] : 0;
        weight[n] = mask[n] * wy[a] * wx[b];
      }
    }
  }

  bool any_in() const { return any; }

  T value(const T* plane) const {
    return weight[0] * plane[index[0]] + weight[1] * plane[index[1]] + weight[2] * plane[index[2]] +
           weight[3] * plane[index[3]];
  }

  // d value / d y and d value / d x inside this cell.
  void slopes(const T* plane, T& dvdy, T& dvdx) const {
    const T v00 = mask[0] * plane[index[0]];
    const T v01 = mask[1] * plane[index[1]];
    const T v10 = mask[2] * plane[index[2]];
    const T v11 = mask[3] * plane[index[3]];
    dvdy = (T(1) - lx) * (v10 - v00) + lx * (v11 - v01);
    dvdx = (T(1) - ly) * (v01 - v00) + ly * (v11 - v10);
  }

  void scatter(T* plane, T g) const {
    for (int n = 0; n < 4; ++n) plane[index[n]] += weight[n] * g;
  }
};

template <typename T>
void check_deform_shapes(const Tensor<T>& input, const OffsetField<T>& offsets, const Tensor<T>& weights,
                         const KernelSpec& spec) {
  check_conv_shapes(input, weights, Tensor<T>(), spec);
  offsets.validate(spec, input.dim(1), input.dim(2));
  POSEWARP_REQUIRE(spec.in_channels % offsets.groups == 0,
                   "deform_conv: in_channels must be divisible by offset groups");
}

}  // namespace

template <typename T>
void OffsetField<T>::validate(const KernelSpec& spec, int height, int width) const {
  POSEWARP_REQUIRE(groups >= 1, "OffsetField: groups must be >= 1");
  POSEWARP_REQUIRE(data.rank() == 3, "OffsetField: data must be [2*G*kh*kw, H, W]");
  POSEWARP_REQUIRE(data.dim(0) == 2 * groups * spec.taps(),
                   "OffsetField: offset channel count " + std::to_string(data.dim(0)) + " != 2*groups*kh*kw = " +
                       std::to_string(2 * groups * spec.taps()));
  POSEWARP_REQUIRE(data.dim(1) == height && data.dim(2) == width,
                   "OffsetField: spatial size " + data.shape_string() + " does not match input");
}

template <typename T>
std::vector<T> bilinear_sample(const Tensor<T>& map, T y, T x) {
  POSEWARP_REQUIRE(map.rank() == 3, "bilinear_sample: map must be [C,H,W]");
  const BilinearCell<T> cell(y, x, map.dim(1), map.dim(2));
  std::vector<T> out(static_cast<std::size_t>(map.dim(0)), T(0));
  if (!cell.any_in()) return out;
  for (int c = 0; c < map.dim(0); ++c) out[c] = cell.value(map.channel(c).data());
  return out;
}

template <typename T>
Tensor<T> deform_im2col(const Tensor<T>& input, const OffsetField<T>& offsets, const KernelSpec& spec) {
  const int channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  const int pixels = height * width, taps = spec.taps();
  const int per_group = channels / offsets.groups;
  Tensor<T> cols({channels * taps, pixels});
  for (int g = 0; g < offsets.groups; ++g) {
    for (int i = 0; i < spec.kernel_h; ++i) {
      for (int j = 0; j < spec.kernel_w; ++j) {
        const int k = i * spec.kernel_w + j;
        const T* oy = offsets.data.channel(2 * (g * taps + k)).data();
        const T* ox = offsets.data.channel(2 * (g * taps + k) + 1).data();
        for (int y = 0; y < height; ++y) {
          for (int x = 0; x < width; ++x) {
            const int p = y * width + x;
            const BilinearCell<T> cell(T(y + spec.tap_dy(i)) + oy[p], T(x + spec.tap_dx(j)) + ox[p], height, width);
            if (!cell.any_in()) continue;
            for (int c = g * per_group; c < (g + 1) * per_group; ++c) {
              cols[static_cast<std::size_t>(c * taps + k) * pixels + p] =
                  cell.value(input.raw() + static_cast<std::size_t>(c) * pixels);
            }
          }
        }
      }
    }
  }
  return cols;
}

template <typename T>
Tensor<T> deform_conv_forward(const Tensor<T>& input, const OffsetField<T>& offsets, const Tensor<T>& weights,
                              const Tensor<T>& bias, const KernelSpec& spec) {
  check_deform_shapes(input, offsets, weights, spec);
  if (!bias.empty()) {
    POSEWARP_REQUIRE(bias.rank() == 1 && bias.dim(0) == spec.out_channels,
                     "deform_conv: bias dimension must equal out_channels");
  }
  const int height = input.dim(1), width = input.dim(2), pixels = height * width;
  const int patch = spec.in_channels * spec.taps();
  const Tensor<T> cols = deform_im2col(input, offsets, spec);
  Tensor<T> output({spec.out_channels, height, width});
  auto out = detail::as_matrix(output.raw(), spec.out_channels, pixels);
  out.noalias() = detail::as_matrix(weights.raw(), spec.out_channels, patch) *
                  detail::as_matrix(cols.raw(), patch, pixels);
  if (!bias.empty()) {
    for (int o = 0; o < spec.out_channels; ++o) out.row(o).array() += bias[o];
  }
  return output;
}

template <typename T>
DeformGrads<T> deform_conv_backward(const Tensor<T>& input, const OffsetField<T>& offsets,
                                    const Tensor<T>& weights, const KernelSpec& spec,
                                    const Tensor<T>& upstream_grad) {
  check_deform_shapes(input, offsets, weights, spec);
  const int channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  const int pixels = height * width, taps = spec.taps();
  const int patch = channels * taps;
  POSEWARP_REQUIRE(upstream_grad.shape() == std::vector<int>({spec.out_channels, height, width}),
                   "deform_conv_backward: upstream_grad shape " + upstream_grad.shape_string() +
                       " != forward output shape");

  const auto g = detail::as_matrix(upstream_grad.raw(), spec.out_channels, pixels);
  const auto w = detail::as_matrix(weights.raw(), spec.out_channels, patch);
  const Tensor<T> cols = deform_im2col(input, offsets, spec);

  DeformGrads<T> grads;
  grads.grad_bias = Tensor<T>({spec.out_channels});
  for (int o = 0; o < spec.out_channels; ++o) grads.grad_bias[o] = g.row(o).sum();
  grads.grad_weights = Tensor<T>(weights.shape());
  detail::as_matrix(grads.grad_weights.raw(), spec.out_channels, patch).noalias() =
      g * detail::as_matrix(cols.raw(), patch, pixels).transpose();

  Tensor<T> grad_cols({patch, pixels});
  detail::as_matrix(grad_cols.raw(), patch, pixels).noalias() = w.transpose() * g;

  grads.grad_input = Tensor<T>(input.shape());
  grads.grad_offsets = Tensor<T>(offsets.data.shape());
  const int per_group = channels / offsets.groups;
  for (int gr = 0; gr < offsets.groups; ++gr) {
    for (int i = 0; i < spec.kernel_h; ++i) {
      for (int j = 0; j < spec.kernel_w; ++j) {
        const int k = i * spec.kernel_w + j;
        const int ch_y = 2 * (gr * taps + k);
        const T* oy = offsets.data.channel(ch_y).data();
        const T* ox = offsets.data.channel(ch_y + 1).data();
        T* goy = grads.grad_offsets.channel(ch_y).data();
        T* gox = grads.grad_offsets.channel(ch_y + 1).data();
        for (int y = 0; y < height; ++y) {
          for (int x = 0; x < width; ++x) {
            const int p = y * width + x;
            const BilinearCell<T> cell(T(y + spec.tap_dy(i)) + oy[p], T(x + spec.tap_dx(j)) + ox[p], height, width);
            if (!cell.any_in()) continue;
            T acc_y = 0, acc_x = 0;
            for (int c = gr * per_group; c < (gr + 1) * per_group; ++c) {
              const T gc = grad_cols[static_cast<std::size_t>(c * taps + k) * pixels + p];
              if (gc == T(0)) continue;
              T dvdy, dvdx;
              cell.slopes(input.raw() + static_cast<std::size_t>(c) * pixels, dvdy, dvdx);
              acc_y += gc * dvdy;
              acc_x += gc * dvdx;
              cell.scatter(grads.grad_input.raw() + static_cast<std::size_t>(c) * pixels, gc);
            }
            goy[p] = acc_y;
            gox[p] = acc_x;
          }
        }
      }
    }
  }
  return grads;
}

#define POSEWARP_INSTANTIATE_DEFORM(T)                                                                  \
  template struct OffsetField<T>;                                                                      \
  template std::vector<T> bilinear_sample<T>(const Tensor<T>&, T, T);                                   \
  template Tensor<T> deform_im2col<T>(const Tensor<T>&, const OffsetField<T>&, const KernelSpec&);      \
  template Tensor<T> deform_conv_forward<T>(const Tensor<T>&, const OffsetField<T>&, const Tensor<T>&,  \
                                            const Tensor<T>&, const KernelSpec&);                       \
  template DeformGrads<T> deform_conv_backward<T>(const Tensor<T>&, const OffsetField<T>&,              \
                                                  const Tensor<T>&, const KernelSpec&, const Tensor<T>&);

POSEWARP_INSTANTIATE_DEFORM(float)
POSEWARP_INSTANTIATE_DEFORM(double)

}  // namespace posewarp
