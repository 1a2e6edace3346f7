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

#ifndef POSEWARP_CONV_HPP_
#define POSEWARP_CONV_HPP_

#include <string>

#include "posewarp/tensor.hpp"

namespace posewarp {

/// Geometry of a "same"-padded, stride-1 2-D convolution.
struct KernelSpec {
  int out_channels = 1;
  int in_channels = 1;
  int kernel_h = 3;
  int kernel_w = 3;
  int dilation = 1;

  int taps() const { return kernel_h * kernel_w; }
  /// Offset of tap row i from the output pixel, in pixels.
  int tap_dy(int i) const { return dilation * (i - kernel_h / 2); }
  int tap_dx(int j) const { return dilation * (j - kernel_w / 2); }

  void validate() const;
  std::string to_string() const;
};

/// Weights [O, C, kh, kw] and bias [O] for one convolution.
template <typename T>
struct ConvLayer {
  KernelSpec spec;
  Tensor<T> weights;
  Tensor<T> bias;

  ConvLayer() = default;
  explicit ConvLayer(const KernelSpec& s)
      : spec(s),
        weights({s.out_channels, s.in_channels, s.kernel_h, s.kernel_w}),
        bias({s.out_channels}) {}
};

template <typename T>
struct ConvGrads {
  Tensor<T> grad_input;
  Tensor<T> grad_weights;
  Tensor<T> grad_bias;
};

/// Checks weights/bias/input against `spec`; throws ContractError naming the
/// first offending dimension.
template <typename T>
void check_conv_shapes(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                       const KernelSpec& spec);

/// output[o,y,x] = bias[o] + sum_{c,i,j} w[o,c,i,j] * input[c, y+d(i-kh/2), x+d(j-kw/2)],
/// zero outside the image.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const Tensor<T>& weights, const Tensor<T>& bias,
                         const KernelSpec& spec);

template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& input, const Tensor<T>& weights, const KernelSpec& spec,
                             const Tensor<T>& upstream_grad);

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& input, const ConvLayer<T>& layer) {
  return conv2d_forward(input, layer.weights, layer.bias, layer.spec);
}

/// Lowers a [C,H,W] image to the [C*kh*kw, H*W] patch matrix of a "same"
/// convolution.
template <typename T>
Tensor<T> im2col(const Tensor<T>& input, const KernelSpec& spec);

/// Adjoint of im2col: scatters a patch matrix back onto a [C,H,W] image.
template <typename T>
Tensor<T> col2im(const Tensor<T>& cols, const KernelSpec& spec, int height, int width);

template <typename T>
Tensor<T> relu(const Tensor<T>& x);

/// Gradient of relu given the pre-activation.
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& pre_activation, const Tensor<T>& upstream);

/// Center-one kernel of shape [O, C, kh, kw]: w[o,o,kh/2,kw/2] = scale.
template <typename T>
Tensor<T> identity_kernel(const KernelSpec& spec, T scale = T(1));

}  // namespace posewarp

#endif  // POSEWARP_CONV_HPP_
