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

#include "posewarp/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "posewarp/image_io.hpp"
#include "posewarp/text_kv.hpp"

namespace posewarp {
namespace fs = std::filesystem;

namespace {

std::string frame_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.pgm", t);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_video(const fs::path& dir, const VideoSample& video) {
  fs::create_directories(dir);
  for (int t = 0; t < video.num_frames(); ++t) write_pgm(dir / frame_name(t), video.frame(t));
  std::ofstream out(dir / "annotations.csv");
  if (!out) throw IoError("cannot write " + (dir / "annotations.csv").string());
  for (int t = 0; t < video.num_frames(); ++t) {
    const Pose& pose = video.ground_truth(t);
    const bool manual = video.label_source(t) == LabelSource::kManual;
    for (int j = 0; j < pose.size(); ++j) {
      const Joint& jt = pose.joints[j];
      out << t << ',' << j << ',' << format_double(jt.x) << ',' << format_double(jt.y) << ',' << (jt.visible ? 1 : 0)
          << ',' << (manual ? 1 : 0) << '\n';
    }
  }
}

VideoSample read_video(const fs::path& dir, int label_interval, std::uint64_t seed) {
  std::ifstream in(dir / "annotations.csv");
  if (!in) throw IoError("missing annotations.csv in " + dir.string());
  std::map<int, std::map<int, Joint>> rows;
  std::map<int, bool> labeled;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) {
      throw IoError(dir.string() + "/annotations.csv:" + std::to_string(line_no) + ": expected 6 fields");
    }
    const int t = parse_int("frame_idx", f[0]);
    const int j = parse_int("joint_id", f[1]);
    Joint jt;
    jt.x = parse_double("x", f[2]);
    jt.y = parse_double("y", f[3]);
    jt.visible = parse_int("visible", f[4]) != 0;
    rows[t][j] = jt;
    labeled[t] = parse_int("labeled", f[5]) != 0;
  }
  std::vector<Tensorf> frames;
  std::vector<Pose> poses;
  std::vector<int> manual;
  for (int t = 0; fs::exists(dir / frame_name(t)); ++t) {
    frames.push_back(read_pgm(dir / frame_name(t)));
    const auto it = rows.find(t);
    if (it == rows.end()) throw IoError(dir.string() + ": no annotation for frame " + std::to_string(t));
    Pose pose(static_cast<int>(it->second.size()));
    for (const auto& [j, jt] : it->second) {
      if (j < 0 || j >= pose.size()) throw IoError(dir.string() + ": joint ids must be contiguous from 0");
      pose.joints[j] = jt;
    }
    poses.push_back(std::move(pose));
    if (labeled[t]) manual.push_back(t);
  }
  if (frames.empty()) throw IoError(dir.string() + ": no frames found");
  VideoSample video(std::move(frames), std::move(poses), label_interval, seed);
  video.set_manual_labels(manual);
  return video;
}

void write_dataset(const fs::path& root, const DatasetSplits& splits, std::uint64_t seed) {
  fs::create_directories(root);
  const VideoSample* first = !splits.train.empty() ? &splits.train.front()
                             : !splits.val.empty() ? &splits.val.front()
                             : !splits.test.empty() ? &splits.test.front()
                                                    : nullptr;
  POSEWARP_REQUIRE(first != nullptr, "write_dataset: no videos");
  std::ofstream manifest(root / "manifest.txt");
  if (!manifest) throw IoError("cannot write manifest in " + root.string());
  manifest << "# posewarp synthetic dataset\n"
           << "joints=" << first->ground_truth(0).size() << "\nheight=" << first->height()
           << "\nwidth=" << first->width() << "\nframes=" << first->num_frames()
           << "\nlabel_interval=" << first->label_interval() << "\nseed=" << seed << "\n";
  int index = 0;
  auto emit = [&](const std::vector<VideoSample>& videos, const char* split_name) {
    for (const auto& v : videos) {
      char name[32];
      std::snprintf(name, sizeof(name), "video_%04d", index++);
      write_video(root / name, v);
      manifest << "video=" << name << ",split=" << split_name << ",seed=" << v.seed() << "\n";
    }
  };
  emit(splits.train, "train");
  emit(splits.val, "val");
  emit(splits.test, "test");
}

DatasetManifest read_manifest(const fs::path& root) {
  DatasetManifest m;
  std::istringstream in(read_text(root / "manifest.txt"));
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.rfind("video=", 0) == 0) {
      DatasetManifest::Entry e;
      for (const auto& [key, value] : parse_inline_kv(t)) {
        if (key == "video") e.directory = value;
        else if (key == "split") e.split = value;
        else if (key == "seed") e.seed = static_cast<std::uint64_t>(std::stoull(value));
      }
      m.videos.push_back(e);
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw IoError("manifest: malformed line '" + t + "'");
    const std::string key = t.substr(0, eq), value = t.substr(eq + 1);
    if (key == "joints") m.joints = parse_int(key, value);
    else if (key == "height") m.height = parse_int(key, value);
    else if (key == "width") m.width = parse_int(key, value);
    else if (key == "frames") m.frames = parse_int(key, value);
    else if (key == "label_interval") m.label_interval = parse_int(key, value);
    else if (key == "seed") m.seed = static_cast<std::uint64_t>(std::stoull(value));
  }
  return m;
}

DatasetSplits read_dataset(const fs::path& root, DatasetManifest* manifest_out) {
  const DatasetManifest m = read_manifest(root);
  DatasetSplits splits;
  for (const auto& e : m.videos) {
    VideoSample v = read_video(root / e.directory, m.label_interval, e.seed);
    if (e.split == "train") splits.train.push_back(std::move(v));
    else if (e.split == "val") splits.val.push_back(std::move(v));
    else if (e.split == "test") splits.test.push_back(std::move(v));
    else throw IoError("manifest: unknown split '" + e.split + "'");
  }
  if (manifest_out) *manifest_out = m;
  return splits;
}

}  // namespace posewarp
