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

#include "posewarp/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace posewarp {
namespace {

unsigned char to_byte(float v) {
  return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::string next_token(std::istream& in) {
  std::string tok;
  while (in >> tok) {
    if (tok[0] != '#') return tok;
    std::string rest;
    std::getline(in, rest);
  }
  throw IoError("unexpected end of image header");
}

}  // namespace

void write_pgm(const std::filesystem::path& path, const Tensorf& image) {
  POSEWARP_REQUIRE(image.rank() == 3 && image.dim(0) == 1, "write_pgm: image must be [1,H,W]");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.dim(2) << " " << image.dim(1) << "\n255\n";
  for (float v : image.data()) out.put(static_cast<char>(to_byte(v)));
  if (!out) throw IoError("write failed: " + path.string());
}

Tensorf read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  if (next_token(in) != "P5") throw IoError(path.string() + ": not a binary PGM (P5)");
  const int width = std::stoi(next_token(in));
  const int height = std::stoi(next_token(in));
  const int maxval = std::stoi(next_token(in));
  if (width <= 0 || height <= 0 || maxval != 255) throw IoError(path.string() + ": unsupported PGM header");
  in.get();
  Tensorf image({1, height, width});
  std::vector<char> buf(static_cast<std::size_t>(width) * height);
  in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw IoError(path.string() + ": truncated pixel data");
  for (std::size_t i = 0; i < buf.size(); ++i) {
    image[i] = static_cast<float>(static_cast<unsigned char>(buf[i]) / 255.0);
  }
  return image;
}

void write_ppm(const std::filesystem::path& path, const Tensorf& rgb) {
  POSEWARP_REQUIRE(rgb.rank() == 3 && rgb.dim(0) == 3, "write_ppm: image must be [3,H,W]");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const int height = rgb.dim(1), width = rgb.dim(2);
  out << "P6\n" << width << " " << height << "\n255\n";
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) out.put(static_cast<char>(to_byte(rgb(c, y, x))));
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Tensorf motion_to_rgb(const Tensorf& dx, const Tensorf& dy, double max_magnitude) {
  dx.require_same_shape(dy, "motion_to_rgb");
  const int height = dx.dim(1), width = dx.dim(2);
  Tensorf rgb({3, height, width});
  const double scale = max_magnitude > 0 ? 1.0 / max_magnitude : 0.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const double u = dx(0, y, x), v = dy(0, y, x);
      const double sat = std::min(1.0, std::hypot(u, v) * scale);
      const double hue = (std::atan2(-v, -u) / M_PI + 1.0) * 3.0;  // [0, 6)
      const int sector = static_cast<int>(std::floor(hue)) % 6;
      const double f = hue - std::floor(hue);
      double r = 0, g = 0, b = 0;
      switch (sector) {
        case 0: r = 1; g = f; break;
        case 1: r = 1 - f; g = 1; break;
        case 2: g = 1; b = f; break;
        case 3: g = 1 - f; b = 1; break;
        case 4: r = f; b = 1; break;
        default: r = 1; b = 1 - f; break;
      }
      // Blend toward white as the magnitude falls.
      rgb(0, y, x) = static_cast<float>(1 - sat * (1 - r));
      rgb(1, y, x) = static_cast<float>(1 - sat * (1 - g));
      rgb(2, y, x) = static_cast<float>(1 - sat * (1 - b));
    }
  }
  return rgb;
}

}  // namespace posewarp
