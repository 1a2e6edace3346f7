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

#include "posewarp/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace posewarp {

GradCheckReport grad_check(const std::string& op_name, const Objective& objective,
                           std::vector<Tensord> inputs, double tolerance, double step) {
  GradCheckReport report;
  report.op_name = op_name;
  report.tolerance = tolerance;

  std::vector<Tensord> analytic;
  objective(inputs, &analytic);
  if (analytic.size() != inputs.size()) {
    report.location = "objective returned " + std::to_string(analytic.size()) + " gradients for " +
                      std::to_string(inputs.size()) + " inputs";
    return report;
  }

  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!analytic[k].same_shape(inputs[k])) {
      report.location = "gradient " + std::to_string(k) + " has shape " + analytic[k].shape_string();
      return report;
    }
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double saved = inputs[k][i];
      inputs[k][i] = saved + step;
      const double plus = objective(inputs, nullptr);
      inputs[k][i] = saved - step;
      const double minus = objective(inputs, nullptr);
      inputs[k][i] = saved;
      const double a = analytic[k][i];
      if (!std::isfinite(plus) || !std::isfinite(minus) || !std::isfinite(a)) {
        report.max_relative_error = INFINITY;
        report.location = "non-finite value at input " + std::to_string(k) + ", element " + std::to_string(i);
        report.passed = false;
        return report;
      }
      const double numeric = (plus - minus) / (2.0 * step);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++report.scalars_checked;
      if (rel > worst) {
        worst = rel;
        report.location = "input " + std::to_string(k) + ", element " + std::to_string(i);
      }
    }
  }
  report.max_relative_error = worst;
  report.passed = worst < tolerance;
  return report;
}

Objective project_output(
    std::function<Tensord(std::span<const Tensord>)> forward,
    std::function<std::vector<Tensord>(std::span<const Tensord>, const Tensord& upstream)> backward,
    Tensord projection) {
  return [forward = std::move(forward), backward = std::move(backward),
          projection = std::move(projection)](std::span<const Tensord> inputs,
                                              std::vector<Tensord>* grads) {
    const Tensord out = forward(inputs);
    out.require_same_shape(projection, "project_output");
    double value = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) value += projection[i] * out[i];
    if (grads) *grads = backward(inputs, projection);
    return value;
  };
}

}  // namespace posewarp
