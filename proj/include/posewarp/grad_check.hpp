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

#ifndef POSEWARP_GRAD_CHECK_HPP_
#define POSEWARP_GRAD_CHECK_HPP_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "posewarp/tensor.hpp"

namespace posewarp {

struct GradCheckReport {
  std::string op_name;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  /// "input k, element i" of the worst entry, or of the first non-finite value.
  std::string location;
  std::size_t scalars_checked = 0;
};

/// Scalar objective over a list of input tensors. When `grads` is non-null the
/// objective must also write its analytic gradient, one tensor per input.
using Objective =
    std::function<double(std::span<const Tensord> inputs, std::vector<Tensord>* grads)>;

/// Compares the analytic gradient of `objective` against central differences
/// (f(x+h) - f(x-h)) / 2h for every scalar of every input. The relative error
/// of an entry is |a - n| / max(|a|, |n|, 1e-8).
GradCheckReport grad_check(const std::string& op_name, const Objective& objective,
                           std::vector<Tensord> inputs, double tolerance, double step = 1e-5);

/// Wraps a tensor-valued map into the scalar objective sum(projection * out),
/// which has upstream gradient `projection`.
Objective project_output(
    std::function<Tensord(std::span<const Tensord>)> forward,
    std::function<std::vector<Tensord>(std::span<const Tensord>, const Tensord& upstream)> backward,
    Tensord projection);

}  // namespace posewarp

#endif  // POSEWARP_GRAD_CHECK_HPP_
