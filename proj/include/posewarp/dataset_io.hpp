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

#ifndef POSEWARP_DATASET_IO_HPP_
#define POSEWARP_DATASET_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "posewarp/synthdata.hpp"

namespace posewarp {

/// On-disk dataset:
///
///   <root>/manifest.txt              key=value globals, then one
///                                    "video=<dir>,split=<name>,seed=<u64>" line per video
///   <root>/<dir>/frame_%04d.pgm      8-bit frames
///   <root>/<dir>/annotations.csv     frame_idx,joint_id,x,y,visible,labeled
struct DatasetManifest {
  int joints = 0;
  int height = 0;
  int width = 0;
  int frames = 0;
  int label_interval = 1;
  std::uint64_t seed = 0;
  struct Entry {
    std::string directory;
    std::string split;
    std::uint64_t seed = 0;
  };
  std::vector<Entry> videos;
};

void write_video(const std::filesystem::path& dir, const VideoSample& video);
VideoSample read_video(const std::filesystem::path& dir, int label_interval, std::uint64_t seed);

void write_dataset(const std::filesystem::path& root, const DatasetSplits& splits, std::uint64_t seed);
DatasetManifest read_manifest(const std::filesystem::path& root);
DatasetSplits read_dataset(const std::filesystem::path& root, DatasetManifest* manifest = nullptr);

}  // namespace posewarp

#endif  // POSEWARP_DATASET_IO_HPP_
