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

#include "posewarp/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "posewarp/error.hpp"
#include "posewarp/text_kv.hpp"

namespace posewarp {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'W', 'C', 'K'};

template <typename T>
constexpr DType dtype_of() {
  return std::is_same_v<T, float> ? DType::kF32 : DType::kF64;
}

std::size_t dtype_size(DType d) { return d == DType::kF32 ? 4 : 8; }

class Writer {
 public:
  template <typename I>
  void integer(I v) {
    unsigned char b[sizeof(I)];
    std::memcpy(b, &v, sizeof(I));
    out_.insert(out_.end(), b, b + sizeof(I));
  }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : bytes_(b) {}

  template <typename I>
  I integer(const char* what) {
    I v;
    std::memcpy(&v, take(sizeof(I), what), sizeof(I));
    return v;
  }
  const std::uint8_t* take(std::size_t n, const char* what) {
    if (n > bytes_.size() - pos_) {
      throw IoError("checkpoint truncated at byte offset " + std::to_string(pos_) + " while reading " + what + " (" +
                    std::to_string(n) + " bytes needed, " + std::to_string(bytes_.size() - pos_) + " left)");
    }
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

template <typename T>
void Checkpoint::put(const std::string& name, const Tensor<T>& tensor) {
  TensorRecord r;
  r.name = name;
  r.dtype = dtype_of<T>();
  r.shape = tensor.shape();
  const auto data = tensor.data();
  r.bytes.resize(data.size() * sizeof(T));
  if (!data.empty()) std::memcpy(r.bytes.data(), data.data(), r.bytes.size());
  for (auto& existing : records) {
    if (existing.name == name) {
      existing = std::move(r);
      return;
    }
  }
  records.push_back(std::move(r));
}

const TensorRecord* Checkpoint::find(const std::string& name) const {
  for (const auto& r : records) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

template <typename T>
Tensor<T> Checkpoint::get(const std::string& name) const {
  const TensorRecord* r = find(name);
  if (!r) throw IoError("checkpoint has no tensor named " + name);
  Tensor<T> out(r->shape);
  auto dst = out.data();
  if (r->dtype == DType::kF32) {
    std::vector<float> tmp(dst.size());
    if (!tmp.empty()) std::memcpy(tmp.data(), r->bytes.data(), tmp.size() * sizeof(float));
    for (std::size_t i = 0; i < tmp.size(); ++i) dst[i] = static_cast<T>(tmp[i]);
  } else {
    std::vector<double> tmp(dst.size());
    if (!tmp.empty()) std::memcpy(tmp.data(), r->bytes.data(), tmp.size() * sizeof(double));
    for (std::size_t i = 0; i < tmp.size(); ++i) dst[i] = static_cast<T>(tmp[i]);
  }
  return out;
}

void Checkpoint::set_meta(const std::string& key, const std::string& value) {
  POSEWARP_REQUIRE(key.find_first_of("=\n") == std::string::npos, "checkpoint meta key must not contain '=' or newline");
  POSEWARP_REQUIRE(value.find('\n') == std::string::npos, "checkpoint meta value must not contain a newline");
  for (auto& [k, v] : meta) {
    if (k == key) {
      v = value;
      return;
    }
  }
  meta.emplace_back(key, value);
}

std::optional<std::string> Checkpoint::meta_value(const std::string& key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string Checkpoint::meta_text() const {
  std::string text;
  for (const auto& [k, v] : meta) text += k + "=" + v + "\n";
  return text;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& checkpoint) {
  Writer w;
  w.raw(kMagic, 4);
  w.integer<std::uint32_t>(kCheckpointVersion);
  w.integer<std::uint32_t>(static_cast<std::uint32_t>(checkpoint.records.size()));
  for (const auto& r : checkpoint.records) {
    std::size_t elements = 1;
    for (int d : r.shape) elements *= static_cast<std::size_t>(d);
    POSEWARP_REQUIRE(elements * dtype_size(r.dtype) == r.bytes.size(), "checkpoint record " + r.name +
                                                                           ": byte count does not match its shape");
    w.integer<std::uint32_t>(static_cast<std::uint32_t>(r.name.size()));
    w.raw(r.name.data(), r.name.size());
    w.integer<std::uint8_t>(static_cast<std::uint8_t>(r.dtype));
    w.integer<std::uint32_t>(static_cast<std::uint32_t>(r.shape.size()));
    for (int d : r.shape) w.integer<std::uint64_t>(static_cast<std::uint64_t>(d));
    w.raw(r.bytes.data(), r.bytes.size());
  }
  const std::string text = checkpoint.meta_text();
  w.integer<std::uint64_t>(text.size());
  w.raw(text.data(), text.size());
  return w.take();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  const std::uint8_t* magic = r.take(4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) throw IoError("not a checkpoint: bad magic at byte offset 0");
  const std::size_t version_offset = r.offset();
  const auto version = r.integer<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw IoError("unsupported checkpoint version " + std::to_string(version) + " at byte offset " +
                  std::to_string(version_offset) + " (this reader supports version " +
                  std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = r.integer<std::uint32_t>("record count");
  Checkpoint c;
  for (std::uint32_t i = 0; i < count; ++i) {
    TensorRecord rec;
    const auto name_len = r.integer<std::uint32_t>("record name length");
    const auto* name = r.take(name_len, "record name");
    rec.name.assign(reinterpret_cast<const char*>(name), name_len);
    const std::size_t dtype_offset = r.offset();
    const auto tag = r.integer<std::uint8_t>("dtype");
    if (tag != 1 && tag != 2) {
      throw IoError("unknown dtype tag " + std::to_string(tag) + " at byte offset " + std::to_string(dtype_offset));
    }
    rec.dtype = static_cast<DType>(tag);
    const std::size_t rank_offset = r.offset();
    const auto rank = r.integer<std::uint32_t>("rank");
    if (rank < 1 || rank > 4) {
      throw IoError("invalid rank " + std::to_string(rank) + " at byte offset " + std::to_string(rank_offset));
    }
    std::size_t elements = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      const std::size_t dim_offset = r.offset();
      const auto d = r.integer<std::uint64_t>("dimension");
      if (d > static_cast<std::uint64_t>(std::numeric_limits<int>::max()) || d == 0) {
        throw IoError("invalid dimension " + std::to_string(d) + " at byte offset " + std::to_string(dim_offset));
      }
      rec.shape.push_back(static_cast<int>(d));
      elements *= static_cast<std::size_t>(d);
    }
    const auto* data = r.take(elements * dtype_size(rec.dtype), "tensor data");
    rec.bytes.assign(data, data + elements * dtype_size(rec.dtype));
    c.records.push_back(std::move(rec));
  }
  const auto text_len = r.integer<std::uint64_t>("config length");
  const auto* text = r.take(static_cast<std::size_t>(text_len), "config text");
  if (!r.done()) throw IoError("trailing bytes after checkpoint at byte offset " + std::to_string(r.offset()));
  std::istringstream lines(std::string(reinterpret_cast<const char*>(text), static_cast<std::size_t>(text_len)));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw IoError("malformed checkpoint config line: " + line);
    c.meta.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  const auto bytes = serialize_checkpoint(checkpoint);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

template <typename T>
void store_backbone(Checkpoint& checkpoint, const BackboneParams<T>& params) {
  params.validate();
  checkpoint.set_meta("backbone.arch", params.arch.to_string());
  for (const auto& p : named_tensors(params)) checkpoint.put(p.name, *p.tensor);
}

template <typename T>
BackboneParams<T> load_backbone(const Checkpoint& checkpoint) {
  const auto arch = checkpoint.meta_value("backbone.arch");
  if (!arch) throw IoError("checkpoint has no backbone");
  auto params = BackboneParams<T>::zeros(BackboneArch::parse(*arch));
  for (auto& p : named_tensors(params)) {
    auto t = checkpoint.get<T>(p.name);
    if (!t.same_shape(*p.tensor)) {
      throw IoError("checkpoint tensor " + p.name + " has shape " + t.shape_string() + ", expected " +
                    p.tensor->shape_string());
    }
    *p.tensor = std::move(t);
  }
  return params;
}

template <typename T>
void store_warper(Checkpoint& checkpoint, const WarperParams<T>& params) {
  params.validate();
  checkpoint.set_meta("warper.config", params.config.to_string());
  for (const auto& p : named_tensors(params)) checkpoint.put(p.name, *p.tensor);
}

bool has_warper(const Checkpoint& checkpoint) { return checkpoint.meta_value("warper.config").has_value(); }

template <typename T>
WarperParams<T> load_warper(const Checkpoint& checkpoint) {
  const auto cfg = checkpoint.meta_value("warper.config");
  if (!cfg) throw IoError("checkpoint has no warper");
  auto params = WarperParams<T>::zeros(WarperConfig::parse(*cfg));
  for (auto& p : named_tensors(params)) {
    auto t = checkpoint.get<T>(p.name);
    if (!t.same_shape(*p.tensor)) {
      throw IoError("checkpoint tensor " + p.name + " has shape " + t.shape_string() + ", expected " +
                    p.tensor->shape_string());
    }
    *p.tensor = std::move(t);
  }
  return params;
}

void store_training(Checkpoint& checkpoint, const TrainConfig& config, const std::vector<EpochMetrics>& history) {
  std::istringstream lines(config.to_text());
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find('=');
    checkpoint.set_meta("train." + line.substr(0, eq), line.substr(eq + 1));
  }
  checkpoint.set_meta("epoch", std::to_string(history.size()));
  std::string h;
  for (const auto& m : history) {
    if (!h.empty()) h += ';';
    h += std::to_string(m.epoch) + ":" + format_double(m.lr) + ":" + format_double(m.train_loss) + ":" +
         (m.val_pck ? format_double(*m.val_pck) : "");
  }
  checkpoint.set_meta("history", h);
}

std::vector<EpochMetrics> load_history(const Checkpoint& checkpoint) {
  std::vector<EpochMetrics> out;
  const auto h = checkpoint.meta_value("history");
  if (!h || h->empty()) return out;
  for (const auto& entry : split(*h, ';')) {
    const auto f = split(entry, ':');
    if (f.size() != 4) throw IoError("malformed history entry: " + entry);
    EpochMetrics m;
    m.epoch = parse_int("history", f[0]);
    m.lr = parse_double("history", f[1]);
    m.train_loss = parse_double("history", f[2]);
    if (!f[3].empty()) m.val_pck = parse_double("history", f[3]);
    out.push_back(m);
  }
  return out;
}

template void Checkpoint::put<float>(const std::string&, const Tensor<float>&);
template void Checkpoint::put<double>(const std::string&, const Tensor<double>&);
template Tensor<float> Checkpoint::get<float>(const std::string&) const;
template Tensor<double> Checkpoint::get<double>(const std::string&) const;
template void store_backbone<float>(Checkpoint&, const BackboneParams<float>&);
template void store_backbone<double>(Checkpoint&, const BackboneParams<double>&);
template BackboneParams<float> load_backbone<float>(const Checkpoint&);
template BackboneParams<double> load_backbone<double>(const Checkpoint&);
template void store_warper<float>(Checkpoint&, const WarperParams<float>&);
template void store_warper<double>(Checkpoint&, const WarperParams<double>&);
template WarperParams<float> load_warper<float>(const Checkpoint&);
template WarperParams<double> load_warper<double>(const Checkpoint&);

}  // namespace posewarp
