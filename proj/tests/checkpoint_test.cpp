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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "posewarp/checkpoint.hpp"
#include "posewarp/dataset_io.hpp"
#include "posewarp/error.hpp"

namespace posewarp {
namespace {

namespace fs = std::filesystem;
using testing::random_tensor;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("posewarp_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
             ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

Checkpoint sample_checkpoint() {
  Rng rng(1);
  BackboneArch arch;
  arch.width = 4;
  arch.hidden_layers = 1;
  arch.joints = 3;
  auto bb = BackboneParams<float>::he_initialized(arch, 2);
  WarperConfig wc;
  wc.joints = 3;
  wc.res_blocks = 1;
  wc.res_width = 4;
  wc.dilations = {1, 3};
  auto w = WarperParams<double>::identity_initialized(wc, 3);
  w.branches[1].offset_head.weights = random_tensor(w.branches[1].offset_head.weights.shape(), rng);
  Checkpoint ck;
  store_backbone(ck, bb);
  store_warper(ck, w);
  store_training(ck, TrainConfig::with_epochs(3), {{0, 1e-3, 0.5, std::nullopt}, {1, 1e-3, 0.25, 0.75}});
  return ck;
}

TEST(CheckpointTest, BytesRoundTripExactly) {
  const auto ck = sample_checkpoint();
  const auto bytes = serialize_checkpoint(ck);
  const auto back = deserialize_checkpoint(bytes);
  EXPECT_EQ(back, ck);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
}

TEST(CheckpointTest, ParametersSurviveFileRoundTrip) {
  TempDir dir;
  const auto ck = sample_checkpoint();
  write_checkpoint(dir.path() / "ck.pwck", ck);
  const auto back = read_checkpoint(dir.path() / "ck.pwck");
  const auto bb = load_backbone<float>(back);
  const auto w = load_warper<double>(back);
  EXPECT_EQ(bb.layers[1].weights, load_backbone<float>(ck).layers[1].weights);
  EXPECT_EQ(w.branches[1].offset_head.weights, load_warper<double>(ck).branches[1].offset_head.weights);
  EXPECT_TRUE(has_warper(back));
  const auto history = load_history(back);
  ASSERT_EQ(history.size(), 2u);
  EXPECT_FALSE(history[0].val_pck.has_value());
  EXPECT_DOUBLE_EQ(*history[1].val_pck, 0.75);
  EXPECT_DOUBLE_EQ(history[1].train_loss, 0.25);
}

TEST(CheckpointTest, DtypeConversionOnLoad) {
  const auto ck = sample_checkpoint();
  const auto as_double = load_backbone<double>(ck);
  const auto as_float = load_backbone<float>(ck);
  EXPECT_EQ(as_double.layers[0].weights.cast<float>(), as_float.layers[0].weights);
}

TEST(CheckpointTest, TruncationReportsOffset) {
  const auto bytes = serialize_checkpoint(sample_checkpoint());
  for (std::size_t cut : {std::size_t{2}, std::size_t{10}, bytes.size() / 2, bytes.size() - 1}) {
    const std::span<const std::uint8_t> part(bytes.data(), cut);
    try {
      deserialize_checkpoint(part);
      FAIL() << "accepted a checkpoint cut at " << cut;
    } catch (const IoError& e) {
      EXPECT_NE(std::string(e.what()).find("byte offset"), std::string::npos) << e.what();
    }
  }
}

TEST(CheckpointTest, RejectsBadMagicVersionAndTrailingBytes) {
  auto bytes = serialize_checkpoint(sample_checkpoint());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(deserialize_checkpoint(bad_magic), IoError);
  auto bad_version = bytes;
  bad_version[4] = 99;
  try {
    deserialize_checkpoint(bad_version);
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("version 99"), std::string::npos) << e.what();
  }
  bytes.push_back(0);
  EXPECT_THROW(deserialize_checkpoint(bytes), IoError);
}

TEST(CheckpointTest, MissingPiecesAreIoErrors) {
  Checkpoint empty;
  EXPECT_THROW(load_backbone<float>(empty), IoError);
  EXPECT_THROW(load_warper<float>(empty), IoError);
  EXPECT_FALSE(has_warper(empty));
  EXPECT_THROW(empty.get<float>("nope"), IoError);
  EXPECT_THROW(read_checkpoint("/nonexistent/ck.pwck"), IoError);
}

TEST(CheckpointTest, ShapeMismatchIsRejected) {
  auto ck = sample_checkpoint();
  for (auto& r : ck.records) {
    if (r.name == "backbone.conv0.weight") {
      r.shape = {1, 1, 1, static_cast<int>(r.bytes.size() / 4)};
    }
  }
  EXPECT_THROW(load_backbone<float>(ck), IoError);
}

TEST(DatasetIoTest, WriteReadRoundTripIsExact) {
  TempDir dir;
  GeneratorConfig g;
  g.frames = 9;
  g.height = 48;
  g.width = 48;
  const auto splits = split_dataset(4, {0.5, 0.25, 0.25}, 3, g);
  write_dataset(dir.path() / "data", splits, 3);
  DatasetManifest manifest;
  const auto back = read_dataset(dir.path() / "data", &manifest);
  EXPECT_EQ(back.train, splits.train);
  EXPECT_EQ(back.val, splits.val);
  EXPECT_EQ(back.test, splits.test);
  EXPECT_EQ(manifest.videos.size(), 4u);
  EXPECT_EQ(manifest.joints, 13);
  EXPECT_EQ(manifest.label_interval, 7);
}

TEST(DatasetIoTest, MalformedAnnotationsAreReported) {
  TempDir dir;
  GeneratorConfig g;
  g.frames = 3;
  g.height = 48;
  g.width = 48;
  const auto splits = split_dataset(1, {1.0, 0.0, 0.0}, 3, g);
  write_video(dir.path() / "v", splits.train[0]);
  std::ofstream(dir.path() / "v" / "annotations.csv", std::ios::app) << "1,2,3\n";
  EXPECT_THROW(read_video(dir.path() / "v", 7, 0), IoError);
  EXPECT_THROW(read_dataset(dir.path() / "missing"), IoError);
}

}  // namespace
}  // namespace posewarp
