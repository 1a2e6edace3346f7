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

#include "posewarp/conv.hpp"

#include <sstream>

#include "matview.hpp"

namespace posewarp {

void KernelSpec::validate() const {
  POSEWARP_REQUIRE(out_channels >= 1, "KernelSpec: out_channels must be >= 1");
  POSEWARP_REQUIRE(in_channels >= 1, "KernelSpec: in_channels must be >= 1");
  POSEWARP_REQUIRE(kernel_h >= 1 && kernel_h % 2 == 1, "KernelSpec: kernel_h must be odd");
  POSEWARP_REQUIRE(kernel_w >= 1 && kernel_w % 2 == 1, "KernelSpec: kernel_w must be odd");
  POSEWARP_REQUIRE(dilation >= 1, "KernelSpec: dilation must be >= 1");
}

std::string KernelSpec::to_string() const {
  std::ostringstream os;
  os << out_channels << "x" << in_channels << "x" << kernel_h << "x" << kernel_w << "@d" << dilation;
  return os.str();
}

template <typename T>
void check_conv_shapes(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                       const KernelSpec& spec) {
  spec.validate();
  POSEWARP_REQUIRE(input.rank() == 3, "conv2d: input must be [C,H,W], got " + input.shape_string());
  POSEWARP_REQUIRE(input.dim(0) == spec.in_channels,
                   "conv2d: input channel dimension " + std::to_string(input.dim(0)) +
                       " != spec.in_channels " + std::to_string(spec.in_channels));
  POSEWARP_REQUIRE(weights.rank() == 4, "conv2d: weights must be [O,C,kh,kw]");
  POSEWARP_REQUIRE(weights.dim(0) == spec.out_channels, "conv2d: weights out_channels dimension mismatch");
  POSEWARP_REQUIRE(weights.dim(1) == spec.in_channels, "conv2d: weights in_channels dimension mismatch");
  POSEWARP_REQUIRE(weights.dim(2) == spec.kernel_h, "conv2d: weights kernel_h dimension mismatch");
  POSEWARP_REQUIRE(weights.dim(3) == spec.kernel_w, "conv2d: weights kernel_w dimension mismatch");
  if (!bias.empty() || bias.rank() > 0) {
    POSEWARP_REQUIRE(bias.rank() == 1 && bias.dim(0) == spec.out_channels,
                     "conv2d: bias dimension must equal out_channels");
  }
}

template <typename T>
Tensor<T> im2col(const Tensor<T>& input, const KernelSpec& spec) {
  const int channels = input.dim(0), height = input.dim(1), width = input.dim(2);
  const int taps = spec.taps();
  Tensor<T> cols({channels * taps, height * width});
  T* out = cols.raw();
  for (int c = 0; c < channels; ++c) {
    const T* plane = input.channel(c).data();
    for (int i = 0; i < spec.kernel_h; ++i) {
      const int dy = spec.tap_dy(i);
      for (int j = 0; j < spec.kernel_w; ++j) {
        const int dx = spec.tap_dx(j);
        T* row = out + static_cast<std::size_t>((c * taps) + i * spec.kernel_w + j) * height * width;
        for (int y = 0; y < height; ++y) {
          const int sy = y + dy;
          T* dst = row + static_cast<std::size_t>(y) * width;
          if (sy < 0 || sy >= height) {
            std::fill(dst, dst + width, T(0));
            continue;
          }
          const T* src = plane + static_cast<std::size_t>(sy) * width;
          const int x_lo = std::clamp(-dx, 0, width);
          const int x_hi = std::clamp(width - dx, 0, width);
          std::fill(dst, dst + x_lo, T(0));
          for (int x = x_lo; x < x_hi; ++x) dst[x] = src[x + dx];
          std::fill(dst + std::max(x_hi, x_lo), dst + width, T(0));
        }
      }
    }
  }
  return cols;
}

template <typename T>
Tensor<T> col2im(const Tensor<T>& cols, const KernelSpec& spec, int height, int width) {
  const int taps = spec.taps();
  const int channels = cols.dim(0) / taps;
  Tensor<T> image({channels, height, width});
  const T* in = cols.raw();
  for (int c = 0; c < channels; ++c) {
    T* plane = image.channel(c).data();
    for (int i = 0; i < spec.kernel_h; ++i) {
      const int dy = spec.tap_dy(i);
      for (int j = 0; j < spec.kernel_w; ++j) {
        const int dx = spec.tap_dx(j);
        const T* row = in + static_cast<std::size_t>((c * taps) + i * spec.kernel_w + j) * height * width;
        for (int y = 0; y < height; ++y) {
          const int sy = y + dy;
          if (sy < 0 || sy >= height) continue;
          const T* src = row + static_cast<std::size_t>(y) * width;
          T* dst = plane + static_cast<std::size_t>(sy) * width;
          const int x_lo = std::clamp(-dx, 0, width);
          const int x_hi = std::clamp(width - dx, 0, width);
          for (int x = x_lo; x < x_hi; ++x) dst[x + dx] += src[x];
        }
      }
    }
  }
  return image;
}

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                         const KernelSpec& spec) {
  check_conv_shapes(input, weights, bias, spec);
  const int height = input.dim(1), width = input.dim(2), pixels = height * width;
  const int patch = spec.in_channels * spec.taps();
  Tensor<T> output({spec.out_channels, height, width});
  auto out = detail::as_matrix(output.raw(), spec.out_channels, pixels);
  auto w = detail::as_matrix(weights.raw(), spec.out_channels, patch);
  if (spec.taps() == 1 && spec.dilation >= 1) {
    out.noalias() = w * detail::as_matrix(input.raw(), patch, pixels);
  } else {
    const Tensor<T> cols = im2col(input, spec);
    out.noalias() = w * detail::as_matrix(cols.raw(), patch, pixels);
  }
  if (!bias.empty()) {
    for (int o = 0; o < spec.out_channels; ++o) out.row(o).array() += bias[o];
  }
  return output;
}

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights, const KernelSpec& spec,
                             const Tensor<T>& upstream_grad) {
  check_conv_shapes(input, weights, Tensor<T>(), spec);
  const int height = input.dim(1), width = input.dim(2), pixels = height * width;
  POSEWARP_REQUIRE(upstream_grad.shape() == std::vector<int>({spec.out_channels, height, width}),
                   "conv2d_backward: upstream_grad shape " + upstream_grad.shape_string() +
                       " != forward output shape");
  const int patch = spec.in_channels * spec.taps();
  const auto g = detail::as_matrix(upstream_grad.raw(), spec.out_channels, pixels);
  const auto w = detail::as_matrix(weights.raw(), spec.out_channels, patch);

  ConvGrads<T> grads;
  grads.grad_bias = Tensor<T>({spec.out_channels});
  for (int o = 0; o < spec.out_channels; ++o) grads.grad_bias[o] = g.row(o).sum();

  grads.grad_weights = Tensor<T>(weights.shape());
  Tensor<T> grad_cols({patch, pixels});
  auto gc = detail::as_matrix(grad_cols.raw(), patch, pixels);
  gc.noalias() = w.transpose() * g;
  auto gw = detail::as_matrix(grads.grad_weights.raw(), spec.out_channels, patch);
  if (spec.taps() == 1) {
    gw.noalias() = g * detail::as_matrix(input.raw(), patch, pixels).transpose();
    grads.grad_input = Tensor<T>(input.shape(), std::vector<T>(grad_cols.data().begin(), grad_cols.data().end()));
  } else {
    const Tensor<T> cols = im2col(input, spec);
    gw.noalias() = g * detail::as_matrix(cols.raw(), patch, pixels).transpose();
    grads.grad_input = col2im(grad_cols, spec, height, width);
  }
  return grads;
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> y = x;
  for (auto& v : y.data()) v = v > T(0) ? v : T(0);
  return y;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& pre_activation, const Tensor<T>& upstream) {
  pre_activation.require_same_shape(upstream, "relu_backward");
  Tensor<T> g = upstream;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(pre_activation[i] > T(0))) g[i] = T(0);
  }
  return g;
}

template <typename T>
Tensor<T> identity_kernel(const KernelSpec& spec, T scale) {
  Tensor<T> w({spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w});
  for (int o = 0; o < std::min(spec.out_channels, spec.in_channels); ++o) {
    w(o, o, spec.kernel_h / 2, spec.kernel_w / 2) = scale;
  }
  return w;
}

#define POSEWARP_INSTANTIATE_CONV(T)                                                                  \
  template void check_conv_shapes<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,           \
                                     const KernelSpec&);                                             \
  template Tensor<T> conv2d_forward<T>(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,         \
                                       const KernelSpec&);                                           \
  template ConvGrads<T> conv2d_backward<T>(const Tensor<T>&, const Tensor<T>&, const KernelSpec&,    \
                                           const Tensor<T>&);                                        \
  template Tensor<T> im2col<T>(const Tensor<T>&, const KernelSpec&);                                  \
  template Tensor<T> col2im<T>(const Tensor<T>&, const KernelSpec&, int, int);                        \
  template Tensor<T> relu<T>(const Tensor<T>&);                                                       \
  template Tensor<T> relu_backward<T>(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> identity_kernel<T>(const KernelSpec&, T);

POSEWARP_INSTANTIATE_CONV(float)
POSEWARP_INSTANTIATE_CONV(double)

}  // namespace posewarp
