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

#ifndef POSEWARP_PARAMS_HPP_
#define POSEWARP_PARAMS_HPP_

#include <string>
#include <vector>

#include "posewarp/conv.hpp"
#include "posewarp/rng.hpp"

namespace posewarp {

template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* tensor;
};

template <typename T>
struct ConstParamRef {
  std::string name;
  const Tensor<T>* tensor;
};

/// Flattens a parameter struct (anything with for_each_layer) into named
/// "<layer>.weight" / "<layer>.bias" tensors in a fixed order.
template <typename Params>
auto named_tensors(Params& params) {
  using T = typename Params::value_type;
  std::vector<ParamRef<T>> out;
  params.for_each_layer([&](const std::string& name, ConvLayer<T>& layer) {
    out.push_back({name + ".weight", &layer.weights});
    out.push_back({name + ".bias", &layer.bias});
  });
  return out;
}

template <typename Params>
auto named_tensors(const Params& params) {
  using T = typename Params::value_type;
  std::vector<ConstParamRef<T>> out;
  params.for_each_layer([&](const std::string& name, const ConvLayer<T>& layer) {
    out.push_back({name + ".weight", &layer.weights});
    out.push_back({name + ".bias", &layer.bias});
  });
  return out;
}

template <typename Params>
Params zeros_like(const Params& params) {
  Params z = params;
  z.for_each_layer([](const std::string&, auto& layer) {
    layer.weights.fill(0);
    layer.bias.fill(0);
  });
  return z;
}

/// dst += scale * src, layer by layer.
template <typename Params, typename T>
void accumulate(Params& dst, const Params& src, T scale) {
  auto d = named_tensors(dst);
  auto s = named_tensors(src);
  POSEWARP_REQUIRE(d.size() == s.size(), "accumulate: parameter structure mismatch");
  for (std::size_t i = 0; i < d.size(); ++i) d[i].tensor->axpy(scale, *s[i].tensor);
}

template <typename Params>
std::size_t parameter_count(const Params& params) {
  std::size_t n = 0;
  for (const auto& p : named_tensors(params)) n += p.tensor->size();
  return n;
}

/// He-normal weights scaled by sqrt(2 / fan_in), zero bias.
template <typename T>
void he_init(ConvLayer<T>& layer, Rng& rng) {
  const double fan_in = static_cast<double>(layer.spec.in_channels) * layer.spec.taps();
  const double stddev = std::sqrt(2.0 / fan_in);
  for (auto& w : layer.weights.data()) w = static_cast<T>(stddev * rng.normal());
  layer.bias.fill(0);
}

}  // namespace posewarp

#endif  // POSEWARP_PARAMS_HPP_
