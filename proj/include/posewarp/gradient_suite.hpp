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

#ifndef POSEWARP_GRADIENT_SUITE_HPP_
#define POSEWARP_GRADIENT_SUITE_HPP_

#include <cstdint>
#include <vector>

#include "posewarp/grad_check.hpp"

namespace posewarp {

/// Central-difference checks, in double precision, of every differentiable
/// operation: conv2d, residual blocks, offset heads, the deformable
/// convolution's input/offset/weight paths, the backbone, the warping head
/// and the MSE loss. Sampling positions are kept at least 1e-3 away from
/// integer coordinates where the offsets are inputs.
std::vector<GradCheckReport> run_gradient_suite(std::uint64_t seed = 0, double tolerance = 1e-4);

}  // namespace posewarp

#endif  // POSEWARP_GRADIENT_SUITE_HPP_
