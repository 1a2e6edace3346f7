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

#ifndef POSEWARP_TESTS_ORACLES_HPP_
#define POSEWARP_TESTS_ORACLES_HPP_

#include <cmath>
#include <vector>

#include "posewarp/conv.hpp"
#include "posewarp/deformable.hpp"
#include "posewarp/rng.hpp"
#include "posewarp/tensor.hpp"

namespace posewarp::testing {

inline Tensord random_tensor(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensord t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(lo, hi);
  return t;
}

// Zero-padded direct summation, written without any shared code path.
inline Tensord brute_force_conv(const Tensord& in, const Tensord& w, const Tensord& b, const KernelSpec& s) {
  const int H = in.dim(1), W = in.dim(2);
  Tensord out({s.out_channels, H, W});
  for (int o = 0; o < s.out_channels; ++o)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double acc = b[o];
        for (int c = 0; c < s.in_channels; ++c)
          for (int i = 0; i < s.kernel_h; ++i)
            for (int j = 0; j < s.kernel_w; ++j) {
              const int yy = y + s.dilation * (i - s.kernel_h / 2);
              const int xx = x + s.dilation * (j - s.kernel_w / 2);
              if (yy >= 0 && yy < H && xx >= 0 && xx < W) acc += w(o, c, i, j) * in(c, yy, xx);
            }
        out(o, y, x) = acc;
      }
  return out;
}

// Bilinear read with zero outside the map, from the four-corner formula.
inline double bilinear_oracle(const Tensord& in, int c, double y, double x) {
  const int H = in.dim(1), W = in.dim(2);
  const double fy = std::floor(y), fx = std::floor(x);
  const double ay = y - fy, ax = x - fx;
  double v = 0.0;
  for (int dy = 0; dy < 2; ++dy)
    for (int dx = 0; dx < 2; ++dx) {
      const int yy = static_cast<int>(fy) + dy, xx = static_cast<int>(fx) + dx;
      if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
      v += (dy ? ay : 1.0 - ay) * (dx ? ax : 1.0 - ax) * in(c, yy, xx);
    }
  return v;
}

inline Tensord brute_force_deform(const Tensord& in, const OffsetField<double>& off, const Tensord& w,
                                  const Tensord& b, const KernelSpec& s) {
  const int H = in.dim(1), W = in.dim(2);
  const int per_group = s.in_channels / off.groups;
  Tensord out({s.out_channels, H, W});
  for (int o = 0; o < s.out_channels; ++o)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double acc = b[o];
        for (int c = 0; c < s.in_channels; ++c)
          for (int i = 0; i < s.kernel_h; ++i)
            for (int j = 0; j < s.kernel_w; ++j) {
              const int k = i * s.kernel_w + j, g = c / per_group;
              const double py = y + s.dilation * (i - s.kernel_h / 2) + off.dy(g, k, y, x);
              const double px = x + s.dilation * (j - s.kernel_w / 2) + off.dx(g, k, y, x);
              acc += w(o, c, i, j) * bilinear_oracle(in, c, py, px);
            }
        out(o, y, x) = acc;
      }
  return out;
}

}  // namespace posewarp::testing

#endif  // POSEWARP_TESTS_ORACLES_HPP_
