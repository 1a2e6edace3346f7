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
#include <sstream>

#include "posewarp/cli.hpp"

namespace posewarp {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "posewarp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("posewarp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string path(const std::string& name) const { return (root_ / name).string(); }

  void make_data() {
    const auto r = run({"gen-data", "--out", path("data"), "--videos", "6", "--frames", "15", "--height", "48",
                        "--width", "48", "--splits", "0.5,0.25,0.25", "--seed", "2"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }

  fs::path root_;
};

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"fly"}).code, kExitUsage);
  const auto r = run({"gen-data", "--out", path("d"), "--bogus", "1"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("kind=usage"), std::string::npos);
  EXPECT_NE(r.err.find("Usage"), std::string::npos);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
}

TEST_F(CliTest, UnknownConfigKeyNamesTheKey) {
  std::ofstream(path("cfg.txt")) << "# sweep\nvideos=3\nvideo_count=9\n";
  const auto r = run({"gen-data", "--out", path("d"), "--config", path("cfg.txt")});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("key=video_count"), std::string::npos) << r.err;
}

TEST_F(CliTest, InvalidValuesAreConfigErrors) {
  auto r = run({"gen-data", "--out", path("d"), "--videos", "many"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("key=videos"), std::string::npos) << r.err;
  r = run({"gen-data", "--out", path("d"), "--splits", "0.5,0.5,0.5"});
  EXPECT_EQ(r.code, kExitConfig);
  r = run({"gen-data"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("key=out"), std::string::npos);
}

TEST_F(CliTest, FlagsOverrideConfigFile) {
  std::ofstream(path("cfg.txt")) << "videos=2\nframes=5\nheight=48\nwidth=48\nsplits=1,0,0\n";
  const auto r = run({"gen-data", "--config", path("cfg.txt"), "--videos", "3", "--out", path("d")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("wrote 3 videos"), std::string::npos) << r.out;
}

TEST_F(CliTest, MissingInputsAreIoErrors) {
  const auto r = run({"eval", "--data", path("nowhere"), "--out", path("run")});
  EXPECT_EQ(r.code, kExitIo);
  EXPECT_NE(r.err.find("kind=io"), std::string::npos);
}

TEST_F(CliTest, RefusesToWriteIntoDataDirectory) {
  make_data();
  const auto r = run({"eval", "--data", path("data"), "--out", path("data/run")});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("key=out"), std::string::npos);
}

TEST_F(CliTest, GradCheckPasses) {
  const auto r = run({"grad-check", "--out", path("gc")});
  EXPECT_EQ(r.code, kExitOk) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
  EXPECT_TRUE(fs::exists(root_ / "gc" / "metrics.csv"));
  EXPECT_EQ(run({"grad-check", "--tolerance", "0"}).code, kExitConfig);
}

TEST_F(CliTest, FullPipelineWritesRunDirectories) {
  make_data();
  const std::vector<std::string> small_bb{"--width", "4", "--hidden-layers", "1", "--backbone-dilations", "1,2,1",
                                          "--epochs", "1"};
  auto args = std::vector<std::string>{"train-backbone", "--data", path("data"), "--out", path("bb")};
  args.insert(args.end(), small_bb.begin(), small_bb.end());
  auto r = run(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;
  for (const char* f : {"checkpoint.pwck", "metrics.csv", "config.txt", "seed.txt"}) {
    EXPECT_TRUE(fs::exists(root_ / "bb" / f)) << f;
  }

  r = run({"train-warper", "--data", path("data"), "--out", path("w"), "--backbone", path("bb/checkpoint.pwck"),
           "--epochs", "1", "--dilations", "3,6", "--res-blocks", "1", "--res-width", "13"});
  ASSERT_EQ(r.code, kExitOk) << r.err;

  r = run({"propagate", "--data", path("data"), "--out", path("prop"), "--checkpoint", path("w/checkpoint.pwck")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream labels(root_ / "prop" / "pseudo_labels.csv");
  std::string header;
  std::getline(labels, header);
  EXPECT_EQ(header, "video,frame,joint_id,x,y,visible,confidence");
  EXPECT_TRUE(fs::exists(root_ / "prop" / "metrics.csv"));

  args = {"train-backbone", "--data", path("data"), "--out", path("bb2"), "--pseudo-labels",
          path("prop/pseudo_labels.csv")};
  args.insert(args.end(), small_bb.begin(), small_bb.end());
  r = run(args);
  ASSERT_EQ(r.code, kExitOk) << r.err;

  r = run({"eval", "--data", path("data"), "--out", path("eval"), "--checkpoint", path("w/checkpoint.pwck")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("posewarper"), std::string::npos);
  EXPECT_TRUE(fs::exists(root_ / "eval" / "report.jsonl"));
  EXPECT_TRUE(fs::exists(root_ / "eval" / "metrics.csv"));

  // A backbone checkpoint on its own is scored frame by frame.
  r = run({"eval", "--data", path("data"), "--out", path("eval_bb"), "--checkpoint", path("bb2/checkpoint.pwck")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("backbone PCK"), std::string::npos);

  r = run({"aggregate", "--data", path("data"), "--out", path("agg"), "--checkpoint", path("w/checkpoint.pwck")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("degraded/aggregate"), std::string::npos);

  r = run({"inspect-offsets", "--data", path("data"), "--out", path("probe"), "--checkpoint",
           path("w/checkpoint.pwck"), "--fit-split", "train", "--export-frame", "3"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(root_ / "probe" / "motion_fields" / "motion.csv"));

  r = run({"ablate", "--data", path("data"), "--out", path("abl"), "--backbone", path("bb/checkpoint.pwck"),
           "--epochs", "1", "--configs", "3;3,6", "--seeds", "1", "--res-blocks", "1", "--res-width", "13"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("dilations=3:6"), std::string::npos) << r.out;

  r = run({"train-warper", "--data", path("data"), "--out", path("w64"), "--backbone", path("bb/checkpoint.pwck"),
           "--epochs", "1", "--dilations", "3", "--res-blocks", "1", "--res-width", "13", "--precision", "f64"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  r = run({"eval", "--data", path("data"), "--out", path("e2"), "--precision", "f16"});
  EXPECT_EQ(r.code, kExitConfig);
}

TEST_F(CliTest, RepeatedRunsGiveIdenticalMetrics) {
  make_data();
  for (const char* dir : {"a", "b"}) {
    const auto r = run({"train-backbone", "--data", path("data"), "--out", path(dir), "--width", "4",
                        "--hidden-layers", "1", "--backbone-dilations", "1,1,1", "--epochs", "2", "--seed", "5"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(slurp(root_ / "a" / "metrics.csv"), slurp(root_ / "b" / "metrics.csv"));
  EXPECT_EQ(slurp(root_ / "a" / "checkpoint.pwck"), slurp(root_ / "b" / "checkpoint.pwck"));
}

}  // namespace
}  // namespace posewarp
