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

#ifndef POSEWARP_IMAGE_IO_HPP_
#define POSEWARP_IMAGE_IO_HPP_

#include <filesystem>

#include "posewarp/tensor.hpp"

namespace posewarp {

/// Binary P5 graymap, maxval 255, from a [1,H,W] image with values in [0,1].
void write_pgm(const std::filesystem::path& path, const Tensorf& image);
Tensorf read_pgm(const std::filesystem::path& path);

/// Binary P6 pixmap, maxval 255, from a [3,H,W] image with values in [0,1].
void write_ppm(const std::filesystem::path& path, const Tensorf& rgb);

/// Colour-wheel rendering of a motion field: hue encodes direction and
/// saturation the magnitude relative to `max_magnitude`.
Tensorf motion_to_rgb(const Tensorf& dx, const Tensorf& dy, double max_magnitude);

}  // namespace posewarp

#endif  // POSEWARP_IMAGE_IO_HPP_
