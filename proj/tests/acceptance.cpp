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

// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. The benchmark part trains the full
// pipeline for three seeds and takes roughly twenty minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "posewarp/checkpoint.hpp"
#include "posewarp/conv.hpp"
#include "posewarp/dataset_io.hpp"
#include "posewarp/deformable.hpp"
#include "posewarp/eval.hpp"
#include "posewarp/gradient_suite.hpp"
#include "posewarp/heatmaps.hpp"
#include "posewarp/presets.hpp"
#include "posewarp/rng.hpp"
#include "posewarp/runtime.hpp"
#include "posewarp/synthdata.hpp"
#include "posewarp/text_kv.hpp"
#include "posewarp/training.hpp"
#include "posewarp/warper.hpp"

namespace pw = posewarp;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  int id;
  bool pass;
  std::string detail;
};

std::vector<Verdict> verdicts;

void report(int id, bool pass, const std::string& detail) {
  verdicts.push_back({id, pass, detail});
  std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

pw::Tensord random_tensor(std::vector<int> shape, pw::Rng& rng) {
  pw::Tensord t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Direct summation over the zero-padded input, one output element at a time.
pw::Tensord brute_force_conv(const pw::Tensord& in, const pw::Tensord& w, const pw::Tensord& b,
                             const pw::KernelSpec& s) {
  const int C = in.dim(0), H = in.dim(1), W = in.dim(2);
  pw::Tensord out({s.out_channels, H, W});
  for (int o = 0; o < s.out_channels; ++o) {
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        double acc = b[static_cast<std::size_t>(o)];
        for (int c = 0; c < C; ++c) {
          for (int i = 0; i < s.kernel_h; ++i) {
            for (int j = 0; j < s.kernel_w; ++j) {
              const int yy = y + s.tap_dy(i), xx = x + s.tap_dx(j);
              if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
              acc += w(o, c, i, j) * in(c, yy, xx);
            }
          }
        }
        out(o, y, x) = acc;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

void criterion_gradients() {
  const auto t0 = Clock::now();
  const auto reports = pw::run_gradient_suite(0, 1e-4);
  const double secs = seconds_since(t0);
  bool ok = secs < 120.0;
  double worst = 0.0;
  std::string failed;
  for (const auto& r : reports) {
    ok = ok && r.passed;
    worst = std::max(worst, r.max_relative_error);
    if (!r.passed) failed += " " + r.op_name;
  }
  report(1, ok,
         std::to_string(reports.size()) + " ops, worst rel err " + fmt(worst * 1e6, 3) + "e-6, " + fmt(secs, 2) +
             " s" + (failed.empty() ? "" : ", failed:" + failed));
}

void criterion_zero_offset() {
  pw::Rng rng(2024);
  double worst_deform = 0.0, worst_conv = 0.0;
  for (int d : {1, 2, 3, 6, 12}) {
    for (int trial = 0; trial < 3; ++trial) {
      pw::KernelSpec s;
      s.in_channels = 2 + trial;
      s.out_channels = 3;
      s.dilation = d;
      const int H = 9 + 3 * trial + d, W = 11 + d;
      const auto in = random_tensor({s.in_channels, H, W}, rng);
      const auto w = random_tensor({s.out_channels, s.in_channels, 3, 3}, rng);
      const auto b = random_tensor({s.out_channels}, rng);
      const auto oracle = brute_force_conv(in, w, b, s);
      const auto conv = pw::conv2d_forward(in, w, b, s);
      const auto deform = pw::deform_conv_forward(in, pw::OffsetField<double>::zeros(s, H, W), w, b, s);
      worst_conv = std::max({worst_conv, pw::max_abs_diff(conv, oracle)});
      worst_deform = std::max({worst_deform, pw::max_abs_diff(deform, conv), pw::max_abs_diff(deform, oracle)});
    }
  }
  report(2, worst_conv < 1e-12 && worst_deform < 1e-12,
         "max |conv - oracle| " + sci(worst_conv) + ", max |deform - conv/oracle| " +
             sci(worst_deform));
}

void criterion_warp_identity() {
  bool ok = true;
  double worst = 0.0;
  int joint_mismatches = 0;
  for (const auto& config : {pw::WarperConfig{}, pw::desk_warper_config()}) {
    auto params = pw::WarperParams<double>::identity_initialized(config, 5);
    for (auto& br : params.branches) {
      br.offset_head.weights.fill(0.0);
      br.offset_head.bias.fill(0.0);
      br.deform.weights = pw::identity_kernel<double>(br.deform.spec, 1.0);
      br.deform.bias.fill(0.0);
    }
    pw::Rng rng(17);
    pw::Pose pose(config.joints);
    for (auto& j : pose.joints) {
      j.x = rng.uniform_int(2, 61);
      j.y = rng.uniform_int(2, 61);
      j.visible = true;
    }
    const auto y_a = pw::render_gaussian<double>(pose, 2.0, 64, 64);
    const auto frame_heatmap = pw::render_gaussian<double>(pose, 2.5, 64, 64);
    const auto out = pw::propagate_annotation(y_a, frame_heatmap, frame_heatmap, params);
    const double n = static_cast<double>(config.dilations.size());
    const auto expected = n * y_a;
    const double diff = pw::max_abs_diff(out, expected);
    worst = std::max(worst, diff);
    const auto decoded = pw::decode_peaks(out);
    for (int j = 0; j < config.joints; ++j) {
      if (decoded.joints[j].x != pose.joints[j].x || decoded.joints[j].y != pose.joints[j].y) ++joint_mismatches;
    }
    ok = ok && diff <= 1e-12 && joint_mismatches == 0;
  }
  report(3, ok, "max |out - |D|*y_A| " + sci(worst) + ", decoded joint mismatches " +
                    std::to_string(joint_mismatches));
}

void criterion_round_trip() {
  pw::Rng rng(99);
  double worst = 0.0;
  long checked = 0;
  for (double sigma = 1.0; sigma <= 4.0; sigma += 0.25) {
    for (int trial = 0; trial < 20; ++trial) {
      pw::Pose pose(13);
      for (auto& j : pose.joints) {
        j.x = rng.uniform(0.0, 63.0);
        j.y = rng.uniform(0.0, 63.0);
        j.visible = true;
      }
      const auto decoded = pw::decode_peaks(pw::render_gaussian<double>(pose, sigma, 64, 64));
      for (int j = 0; j < 13; ++j) {
        worst = std::max({worst, std::abs(decoded.joints[j].x - pose.joints[j].x),
                          std::abs(decoded.joints[j].y - pose.joints[j].y)});
        ++checked;
      }
    }
  }
  report(4, worst <= 0.5, std::to_string(checked) + " joints, sigma 1..4, max coordinate error " + fmt(worst) + " px");
}

// ---------------------------------------------------------------------------
// Benchmark pipeline (criteria 5 to 9)

struct SeedResult {
  double copy = 0, blockmatch = 0, posewarper = 0, one_dilation = 0;
  double gt_only = 0, with_pseudo = 0;
  double degraded_single = 0, degraded_aggregate = 0;
  double probe_error = 0, zero_error = 0;
  std::size_t probe_samples = 0;
  double seconds = 0;
};

pw::DatasetSplits benchmark_data(std::uint64_t seed) {
  return pw::split_dataset(50, {0.8, 0.1, 0.1}, seed, pw::GeneratorConfig{});
}

pw::EvalOptions eval_options(std::uint64_t seed) {
  pw::EvalOptions o;
  o.reference_scale = pw::SkeletonSpec::default_human().torso_length();
  o.seed = seed;
  return o;
}

double pck(const pw::ExperimentReport& r, const std::string& condition) {
  return r.mean_pck(condition).value_or(0.0);
}

int labeled_frames(const std::vector<pw::VideoSample>& videos) {
  int n = 0;
  for (const auto& v : videos) n += static_cast<int>(v.labeled_indices().size());
  return n;
}

SeedResult run_seed(std::uint64_t seed, const fs::path& out_dir) {
  const auto t0 = Clock::now();
  SeedResult r;
  const auto data = benchmark_data(seed);
  const auto opts = eval_options(seed);

  pw::TrainConfig bcfg = pw::desk_backbone_training();
  bcfg.seed = seed;
  const auto backbone = pw::train_backbone<float>(data.train, pw::desk_backbone_arch(), bcfg).params;
  r.gt_only = pck(pw::eval_backbone(data.test, backbone, opts), "backbone");
  std::printf("  seed %llu: backbone GT(1x) test PCK %s (%.0f s)\n", static_cast<unsigned long long>(seed),
              fmt(r.gt_only).c_str(), seconds_since(t0));

  pw::TrainConfig wcfg = pw::desk_warper_training();
  wcfg.seed = seed;
  pw::WarperConfig five = pw::desk_warper_config();
  five.joints = backbone.arch.joints;
  const auto warper = pw::train_warper<float>(data.train, backbone, five, wcfg).warper;
  r.posewarper = pck(pw::eval_propagation(data.test, backbone, warper, opts), "posewarper");
  r.copy = pck(pw::baseline_copy(data.test, opts), "copy");
  r.blockmatch = pck(pw::baseline_blockmatch(data.test, opts), "blockmatch");

  pw::WarperConfig one = five;
  one.dilations = {3};
  const auto warper_one = pw::train_warper<float>(data.train, backbone, one, wcfg).warper;
  r.one_dilation = pck(pw::eval_propagation(data.test, backbone, warper_one, opts), "posewarper");
  std::printf("  seed %llu: copy %s  blockmatch %s  posewarper %s  1-dilation %s (%.0f s)\n",
              static_cast<unsigned long long>(seed), fmt(r.copy).c_str(), fmt(r.blockmatch).c_str(),
              fmt(r.posewarper).c_str(), fmt(r.one_dilation).c_str(), seconds_since(t0));

  // Retrain on manual plus propagated labels with the same number of
  // optimizer steps (rounded up to whole epochs) as the sparse-only run.
  const auto propagated = pw::propagate_labels(data.train, backbone, warper, opts);
  const auto merged = pw::merge_pseudo_labels(data.train, propagated, bcfg.pseudo_label_threshold);
  const int sparse_frames = labeled_frames(data.train), merged_frames = labeled_frames(merged);
  const int epochs = std::max(1, (bcfg.epochs * sparse_frames + merged_frames - 1) / merged_frames);
  const pw::TrainConfig pcfg = pw::TrainConfig::from_kv({{"epochs", std::to_string(epochs)}}, bcfg);
  const auto retrained = pw::train_backbone<float>(merged, pw::desk_backbone_arch(), pcfg).params;
  r.with_pseudo = pck(pw::eval_backbone(data.test, retrained, opts), "backbone");
  std::printf("  seed %llu: GT(1x)+pGT(6x) backbone (%d vs %d frames, %d epochs) test PCK %s (%.0f s)\n",
              static_cast<unsigned long long>(seed), merged_frames, sparse_frames, epochs,
              fmt(r.with_pseudo).c_str(), seconds_since(t0));

  pw::DegradationSpec deg;
  deg.seed = seed;
  const auto agg = pw::eval_aggregation(data.test, backbone, warper, pw::default_deltas(), deg, opts);
  r.degraded_single = pck(agg, "degraded/single");
  r.degraded_aggregate = pck(agg, "degraded/aggregate");

  pw::MotionProbeOptions mo;
  mo.frame_stride = 4;
  const std::vector<pw::VideoSample> fit_set(data.train.begin(), data.train.begin() + 10);
  const auto probe = pw::offset_motion_regression(fit_set, data.test, backbone, warper, mo);
  r.probe_error = probe.test_error;
  r.zero_error = probe.zero_error;
  r.probe_samples = probe.test_samples;
  r.seconds = seconds_since(t0);
  std::printf("  seed %llu: blur single %s aggregate %s; probe EPE %s vs zero %s (%zu samples) (%.0f s)\n",
              static_cast<unsigned long long>(seed), fmt(r.degraded_single).c_str(),
              fmt(r.degraded_aggregate).c_str(), fmt(r.probe_error).c_str(), fmt(r.zero_error).c_str(),
              r.probe_samples, r.seconds);

  if (!out_dir.empty()) {
    const fs::path dir = out_dir / ("seed_" + std::to_string(seed));
    fs::create_directories(dir);
    agg.write(dir / "aggregation");
    probe.report.write(dir / "motion_probe");
    pw::Checkpoint ck;
    pw::store_backbone(ck, backbone);
    pw::store_warper(ck, warper);
    pw::write_checkpoint(dir / "posewarper.pwck", ck);
  }
  std::fflush(stdout);
  return r;
}

void criteria_benchmark(const std::vector<std::uint64_t>& seeds, const fs::path& out_dir) {
  // Pre-registered margin: fixed from the copy baseline alone, before any
  // model is trained.
  std::vector<double> copy_runs;
  for (auto s : seeds) copy_runs.push_back(pck(pw::baseline_copy(benchmark_data(s).test, eval_options(s)), "copy"));
  const double margin = std::max(0.02, 2.0 * sample_std(copy_runs));
  std::printf("pre-registered PoseWarper-copy margin: %s (copy PCK std %s over %zu seeds)\n", fmt(margin).c_str(),
              fmt(sample_std(copy_runs)).c_str(), seeds.size());

  const auto t0 = Clock::now();
  std::vector<SeedResult> results;
  for (auto s : seeds) results.push_back(run_seed(s, out_dir));
  const double minutes = seconds_since(t0) / 60.0;

  auto avg = [&](double SeedResult::*field) {
    std::vector<double> v;
    for (const auto& r : results) v.push_back(r.*field);
    return mean(v);
  };
  const double pwp = avg(&SeedResult::posewarper), bm = avg(&SeedResult::blockmatch), cp = avg(&SeedResult::copy);
  report(5, pwp > bm && bm > cp && pwp - cp >= margin && minutes < 30.0,
         "PoseWarper " + fmt(pwp) + " > block-matching " + fmt(bm) + " > copy " + fmt(cp) + ", margin " +
             fmt(pwp - cp) + " vs " + fmt(margin) + ", pipeline " + fmt(minutes, 1) + " min");

  const double one = avg(&SeedResult::one_dilation);
  report(6, pwp >= one - 0.005, "5 dilations " + fmt(pwp) + " vs 1 dilation " + fmt(one) + " (tolerance 0.005)");

  const double single = avg(&SeedResult::degraded_single), aggregate = avg(&SeedResult::degraded_aggregate);
  report(7, aggregate >= single, "blurred frames: aggregate " + fmt(aggregate) + " vs single " + fmt(single));

  const double gt = avg(&SeedResult::gt_only), pseudo = avg(&SeedResult::with_pseudo);
  report(8, pseudo >= gt, "GT(1x)+pGT(6x) " + fmt(pseudo) + " vs GT(1x) " + fmt(gt));

  bool all_below = true;
  std::string per_seed;
  for (const auto& r : results) {
    all_below = all_below && r.probe_error < r.zero_error;
    per_seed += " " + fmt(r.probe_error, 3) + "/" + fmt(r.zero_error, 3);
  }
  report(9, all_below, "held-out endpoint error probe/zero per seed:" + per_seed);
}

// ---------------------------------------------------------------------------

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  }
  std::size_t count_b = 0;
  for (const auto& e : fs::recursive_directory_iterator(b)) count_b += e.is_regular_file();
  if (files.size() != count_b || files.empty()) return false;
  for (const auto& f : files) {
    if (!fs::exists(b / f) || read_bytes(a / f) != read_bytes(b / f)) return false;
  }
  return true;
}

struct SmallRun {
  std::string metrics;
  std::vector<std::uint8_t> checkpoint;
};

SmallRun small_pipeline(const pw::DatasetSplits& data) {
  pw::BackboneArch arch = pw::desk_backbone_arch();
  arch.width = 8;
  arch.hidden_layers = 2;
  arch.dilations = {1, 2, 1, 1};
  pw::TrainConfig bcfg = pw::desk_backbone_training();
  bcfg = pw::TrainConfig::from_kv({{"epochs", "2"}, {"seed", "11"}, {"threads", "1"}}, bcfg);
  const auto bb = pw::train_backbone<float>(data.train, arch, bcfg);
  pw::WarperConfig wc = pw::desk_warper_config();
  wc.res_width = 13;
  wc.res_blocks = 1;
  wc.dilations = {3, 6};
  pw::TrainConfig wcfg = pw::TrainConfig::from_kv({{"epochs", "1"}, {"seed", "11"}}, pw::desk_warper_training());
  const auto w = pw::train_warper<float>(data.train, bb.params, wc, wcfg);
  const auto opts = eval_options(11);
  auto report = pw::eval_propagation(data.test, w.backbone, w.warper, opts);
  report.append(pw::eval_backbone(data.test, w.backbone, opts));
  std::string metrics = report.to_csv();
  for (const auto& h : bb.history) metrics += pw::format_double(h.train_loss) + "\n";
  for (const auto& h : w.history) metrics += pw::format_double(h.train_loss) + "\n";
  pw::Checkpoint ck;
  pw::store_backbone(ck, w.backbone);
  pw::store_warper(ck, w.warper);
  pw::store_training(ck, wcfg, w.history);
  return {metrics, pw::serialize_checkpoint(ck)};
}

void criterion_reproducibility() {
  pw::GeneratorConfig g;
  g.frames = 15;
  g.height = 48;
  g.width = 48;
  const auto data_a = pw::split_dataset(8, {0.5, 0.25, 0.25}, 21, g);
  const auto data_b = pw::split_dataset(8, {0.5, 0.25, 0.25}, 21, g);
  bool data_ok = data_a.train == data_b.train && data_a.val == data_b.val && data_a.test == data_b.test;

  const fs::path tmp = fs::temp_directory_path() / ("posewarp_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  pw::write_dataset(tmp / "a", data_a, 21);
  pw::write_dataset(tmp / "b", data_b, 21);
  data_ok = data_ok && same_tree(tmp / "a", tmp / "b");
  const auto reread = pw::read_dataset(tmp / "a");
  data_ok = data_ok && reread.train == data_a.train && reread.test == data_a.test;

  const auto run_a = small_pipeline(data_a);
  const auto run_b = small_pipeline(data_a);
  const bool metrics_ok = run_a.metrics == run_b.metrics && run_a.checkpoint == run_b.checkpoint;

  const auto ck = pw::deserialize_checkpoint(run_a.checkpoint);
  pw::write_checkpoint(tmp / "ck.pwck", ck);
  const auto back = pw::read_checkpoint(tmp / "ck.pwck");
  const auto bb = pw::load_backbone<float>(back);
  const auto w = pw::load_warper<float>(back);
  pw::Checkpoint again;
  pw::store_backbone(again, bb);
  pw::store_warper(again, w);
  for (const auto& [k, v] : back.meta) again.set_meta(k, v);
  const bool ck_ok = back == ck && pw::serialize_checkpoint(back) == run_a.checkpoint &&
                     pw::serialize_checkpoint(again) == run_a.checkpoint;
  fs::remove_all(tmp);

  report(10, data_ok && metrics_ok && ck_ok,
         std::string("dataset determinism ") + (data_ok ? "ok" : "BROKEN") + ", repeated-run metrics " +
             (metrics_ok ? "identical" : "DIFFER") + ", checkpoint round trip " + (ck_ok ? "bit-exact" : "BROKEN"));
}

}  // namespace

int main(int argc, char** argv) {
  pw::tune_allocator();
  std::setvbuf(stdout, nullptr, _IOLBF, 0);
  CLI::App app{"PoseWarp acceptance run"};
  std::string seeds_text = "1,2,3";
  std::string out_dir;
  bool skip_benchmark = false;
  app.add_option("--seeds", seeds_text, "benchmark seeds");
  app.add_option("--out", out_dir, "directory for per-seed reports and checkpoints");
  app.add_flag("--skip-benchmark", skip_benchmark, "only run the fast criteria (1-4, 10)");
  CLI11_PARSE(app, argc, argv);

  std::vector<std::uint64_t> seeds;
  for (int s : pw::parse_int_list("seeds", seeds_text)) seeds.push_back(static_cast<std::uint64_t>(s));

  const auto t0 = Clock::now();
  try {
    criterion_gradients();
    criterion_zero_offset();
    criterion_warp_identity();
    criterion_round_trip();
    if (!skip_benchmark) criteria_benchmark(seeds, out_dir);
    criterion_reproducibility();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 1;
  }
  std::sort(verdicts.begin(), verdicts.end(), [](const Verdict& a, const Verdict& b) { return a.id < b.id; });
  std::printf("\nsummary (%.1f min)\n", seconds_since(t0) / 60.0);
  bool all = true;
  for (const auto& v : verdicts) {
    std::printf("%s criterion %d\n", v.pass ? "PASS" : "FAIL", v.id);
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
