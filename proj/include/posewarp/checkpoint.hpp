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

#ifndef POSEWARP_CHECKPOINT_HPP_
#define POSEWARP_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "posewarp/backbone.hpp"
#include "posewarp/tensor.hpp"
#include "posewarp/training.hpp"
#include "posewarp/warper.hpp"

namespace posewarp {

// File layout, all integers little-endian:
//   "PWCK"  u32 version  u32 record_count
//   per record: u32 name_len, name (UTF-8), u8 dtype (1 = f32, 2 = f64),
//               u32 rank, u64 dims[rank], raw row-major data
//   u64 text_len, text (UTF-8 key=value lines)

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { kF32 = 1, kF64 = 2 };

struct TensorRecord {
  std::string name;
  DType dtype = DType::kF32;
  std::vector<int> shape;
  std::vector<std::uint8_t> bytes;

  friend bool operator==(const TensorRecord&, const TensorRecord&) = default;
};

struct Checkpoint {
  std::vector<TensorRecord> records;
  /// Ordered key=value metadata: architecture, configs, epoch, history.
  std::vector<std::pair<std::string, std::string>> meta;

  template <typename T>
  void put(const std::string& name, const Tensor<T>& tensor);
  /// Converts from the stored dtype. Throws IoError when missing.
  template <typename T>
  Tensor<T> get(const std::string& name) const;
  const TensorRecord* find(const std::string& name) const;

  void set_meta(const std::string& key, const std::string& value);
  std::optional<std::string> meta_value(const std::string& key) const;
  std::string meta_text() const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint);
/// Throws IoError naming the byte offset on bad magic, unsupported version,
/// truncation or malformed records.
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(const std::filesystem::path& path);

template <typename T>
void store_backbone(Checkpoint& checkpoint, const BackboneParams<T>& params);
template <typename T>
BackboneParams<T> load_backbone(const Checkpoint& checkpoint);

template <typename T>
void store_warper(Checkpoint& checkpoint, const WarperParams<T>& params);
template <typename T>
WarperParams<T> load_warper(const Checkpoint& checkpoint);
bool has_warper(const Checkpoint& checkpoint);

/// Training config, epoch count and per-epoch metrics as metadata.
void store_training(Checkpoint& checkpoint, const TrainConfig& config, const std::vector<EpochMetrics>& history);
std::vector<EpochMetrics> load_history(const Checkpoint& checkpoint);

}  // namespace posewarp

#endif  // POSEWARP_CHECKPOINT_HPP_
