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

#include "posewarp/gradient_suite.hpp"

#include <cmath>

#include "posewarp/backbone.hpp"
#include "posewarp/conv.hpp"
#include "posewarp/deformable.hpp"
#include "posewarp/heatmaps.hpp"
#include "posewarp/rng.hpp"
#include "posewarp/warper.hpp"

namespace posewarp {
namespace {

Tensord random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensord t(std::move(shape));
  for (auto& v : t.data()) v = scale * rng.normal();
  return t;
}

double dot(const Tensord& a, const Tensord& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

// Moves every sampling coordinate of `offsets` at least `band` away from an
// integer.
void clear_integer_bands(OffsetField<double>& offsets, const KernelSpec& spec, double band) {
  const int height = offsets.data.dim(1), width = offsets.data.dim(2);
  for (int g = 0; g < offsets.groups; ++g) {
    for (int i = 0; i < spec.kernel_h; ++i) {
      for (int j = 0; j < spec.kernel_w; ++j) {
        const int k = i * spec.kernel_w + j;
        for (int axis = 0; axis < 2; ++axis) {
          const int ch = 2 * (g * spec.taps() + k) + axis;
          for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
              double& o = offsets.data(ch, y, x);
              const double base = axis == 0 ? y + spec.tap_dy(i) : x + spec.tap_dx(j);
              const double frac = (base + o) - std::floor(base + o);
              if (frac < band) o += 2 * band;
              if (frac > 1.0 - band) o -= 2 * band;
            }
          }
        }
      }
    }
  }
}

GradCheckReport check_conv(Rng& rng, double tol) {
  const KernelSpec spec{4, 3, 3, 3, 2};
  const Tensord proj = random_tensor({4, 9, 9}, rng);
  auto objective = [&](std::span<const Tensord> in, std::vector<Tensord>* grads) {
    const double v = dot(conv2d_forward(in[0], in[1], in[2], spec), proj);
    if (grads) {
      auto g = conv2d_backward(in[0], in[1], spec, proj);
      *grads = {g.grad_input, g.grad_weights, g.grad_bias};
    }
    return v;
  };
  return grad_check("conv2d", objective,
                    {random_tensor({3, 9, 9}, rng), random_tensor({4, 3, 3, 3}, rng, 0.5), random_tensor({4}, rng)},
                    tol);
}

GradCheckReport check_deformable(Rng& rng, double tol) {
  const KernelSpec spec{3, 2, 3, 3, 2};
  const int h = 8, w = 9;
  OffsetField<double> offsets(random_tensor({2 * spec.taps(), h, w}, rng, 1.5));
  clear_integer_bands(offsets, spec, 1e-3);
  const Tensord proj = random_tensor({3, h, w}, rng);
  auto objective = [&](std::span<const Tensord> in, std::vector<Tensord>* grads) {
    const OffsetField<double> o(in[1]);
    const double v = dot(deform_conv_forward(in[0], o, in[2], in[3], spec), proj);
    if (grads) {
      auto g = deform_conv_backward(in[0], o, in[2], spec, proj);
      *grads = {g.grad_input, g.grad_offsets, g.grad_weights, g.grad_bias};
    }
    return v;
  };
  // A 1e-6 step keeps every perturbed coordinate inside its bilinear cell.
  return grad_check("deform_conv", objective,
                    {random_tensor({2, h, w}, rng), offsets.data, random_tensor({3, 2, 3, 3}, rng, 0.5),
                     random_tensor({3}, rng)},
                    tol, 1e-6);
}

GradCheckReport check_backbone(Rng& rng, double tol) {
  BackboneArch arch;
  arch.width = 4;
  arch.hidden_layers = 1;
  arch.joints = 2;
  arch.dilations = {1, 2, 1};
  const auto base = BackboneParams<double>::he_initialized(arch, rng.next());
  const Tensord proj = random_tensor({2, 16, 16}, rng);
  std::vector<Tensord> inputs{random_tensor({1, 16, 16}, rng)};
  for (const auto& p : named_tensors(base)) inputs.push_back(*p.tensor);
  for (std::size_t i = 2; i < inputs.size(); i += 2) {
    for (auto& b : inputs[i].data()) b = 0.1 * rng.normal();
  }
  auto objective = [&](std::span<const Tensord> in, std::vector<Tensord>* grads) {
    BackboneParams<double> p = base;
    auto refs = named_tensors(p);
    for (std::size_t i = 0; i < refs.size(); ++i) *refs[i].tensor = in[i + 1];
    auto [out, cache] = backbone_forward(in[0], p);
    const double v = dot(out, proj);
    if (grads) {
      auto g = backbone_backward(cache, p, proj, true);
      grads->clear();
      grads->push_back(g.grad_frame);
      for (const auto& r : named_tensors(g.params)) grads->push_back(*r.tensor);
    }
    return v;
  };
  return grad_check("backbone", objective, inputs, tol);
}

// The warper checks share one small head: J=2 on 12x12 with two residual
// blocks and dilations {1, 2}. Both heatmap inputs are always checked;
// `select` picks which parameter tensors join them.
struct WarperCase {
  WarperParams<double> params;
  Tensord f_source, psi, proj;
};

WarperCase make_warper_case(Rng& rng) {
  WarperConfig c;
  c.joints = 2;
  c.res_blocks = 2;
  c.res_width = 3;
  c.dilations = {1, 2};
  WarperCase wc{WarperParams<double>::identity_initialized(c, rng.next()), {}, {}, {}};
  wc.params.for_each_layer([&](const std::string&, ConvLayer<double>& layer) {
    for (auto& v : layer.weights.data()) v += 0.3 * rng.normal();
    for (auto& v : layer.bias.data()) v = 0.2 * rng.normal();
  });
  wc.f_source = random_tensor({2, 12, 12}, rng);
  wc.psi = random_tensor({2, 12, 12}, rng);
  wc.proj = random_tensor({2, 12, 12}, rng);
  return wc;
}

GradCheckReport check_warper(const std::string& name, Rng& rng, double tol,
                             const std::function<bool(const std::string&)>& select) {
  const WarperCase wc = make_warper_case(rng);
  std::vector<std::size_t> picked;
  std::vector<Tensord> inputs{wc.f_source, wc.psi};
  const auto refs = named_tensors(wc.params);
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (select(refs[i].name)) {
      picked.push_back(i);
      inputs.push_back(*refs[i].tensor);
    }
  }
  auto objective = [&](std::span<const Tensord> in, std::vector<Tensord>* grads) {
    WarperParams<double> p = wc.params;
    auto prefs = named_tensors(p);
    for (std::size_t k = 0; k < picked.size(); ++k) *prefs[picked[k]].tensor = in[k + 2];
    auto [out, cache] = warp_heatmap(in[0], in[1], p);
    const double v = dot(out.warped, wc.proj);
    if (grads) {
      auto g = warper_backward(cache, p, wc.proj);
      const auto grefs = named_tensors(g.params);
      *grads = {g.grad_f_source, g.grad_psi};
      for (std::size_t k : picked) grads->push_back(*grefs[k].tensor);
    }
    return v;
  };
  return grad_check(name, objective, inputs, tol, 1e-6);
}

GradCheckReport check_mse(Rng& rng, double tol) {
  const Tensord gt = random_tensor({3, 5, 6}, rng);
  const std::vector<bool> visible{true, false, true};
  auto objective = [&](std::span<const Tensord> in, std::vector<Tensord>* grads) {
    auto r = mse_loss(in[0], gt, visible);
    if (grads) *grads = {r.grad};
    return r.loss;
  };
  return grad_check("mse_loss", objective, {random_tensor({3, 5, 6}, rng)}, tol);
}

}  // namespace

std::vector<GradCheckReport> run_gradient_suite(std::uint64_t seed, double tolerance) {
  Rng rng(derive_seed(seed, "gradient_suite"));
  std::vector<GradCheckReport> out;
  out.push_back(check_conv(rng, tolerance));
  out.push_back(check_warper("residual_block", rng, tolerance,
                             [](const std::string& n) { return n.find(".res") != std::string::npos; }));
  out.push_back(check_warper("offset_head", rng, tolerance,
                             [](const std::string& n) { return n.find(".offset.") != std::string::npos; }));
  out.push_back(check_deformable(rng, tolerance));
  out.push_back(check_backbone(rng, tolerance));
  out.push_back(check_warper("warper_head", rng, tolerance,
                             [](const std::string& n) { return n.find(".deform.") != std::string::npos; }));
  out.push_back(check_mse(rng, tolerance));
  return out;
}

}  // namespace posewarp
