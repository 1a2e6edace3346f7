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

#include "posewarp/eval.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "posewarp/error.hpp"
#include "posewarp/image_io.hpp"
#include "posewarp/parallel.hpp"
#include "posewarp/text_kv.hpp"

namespace posewarp {

// ---------------------------------------------------------------------------
// Reports

std::optional<double> ReportRow::value(const std::string& name) const {
  for (const auto& [k, v] : values) {
    if (k == name) return v;
  }
  return std::nullopt;
}

void ExperimentReport::append(const ExperimentReport& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
  flags.insert(flags.end(), other.flags.begin(), other.flags.end());
  for (auto s : other.seeds) {
    if (std::find(seeds.begin(), seeds.end(), s) == seeds.end()) seeds.push_back(s);
  }
  wall_clock_seconds += other.wall_clock_seconds;
}

std::vector<const ReportRow*> ExperimentReport::find(const std::string& condition) const {
  std::vector<const ReportRow*> out;
  for (const auto& r : rows) {
    if (r.condition == condition) out.push_back(&r);
  }
  return out;
}

std::optional<double> ExperimentReport::mean_pck(const std::string& condition) const {
  double sum = 0.0;
  int n = 0;
  for (const auto* r : find(condition)) {
    if (!r->pck.mean) continue;
    sum += *r->pck.mean;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

std::optional<double> ExperimentReport::mean_value(const std::string& condition, const std::string& name) const {
  double sum = 0.0;
  int n = 0;
  for (const auto* r : find(condition)) {
    if (auto v = r->value(name)) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::size_t max_joints(const std::vector<ReportRow>& rows) {
  std::size_t j = 0;
  for (const auto& r : rows) j = std::max(j, r.pck.per_joint.size());
  return j;
}

}  // namespace

std::string ExperimentReport::to_jsonl() const {
  std::ostringstream os;
  nlohmann::json header = {{"type", "experiment"},
                           {"experiment_id", experiment_id},
                           {"seeds", seeds},
                           {"checkpoint", checkpoint},
                           {"config", config_snapshot},
                           {"wall_clock_seconds", wall_clock_seconds},
                           {"flags", flags}};
  os << header.dump() << "\n";
  for (const auto& r : rows) {
    nlohmann::json row = {{"type", "row"}, {"experiment_id", experiment_id}, {"condition", r.condition}};
    row["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json();
    row["pck"] = optional_json(r.pck.mean);
    nlohmann::json per_joint = nlohmann::json::array();
    for (const auto& p : r.pck.per_joint) per_joint.push_back(optional_json(p));
    row["pck_per_joint"] = per_joint;
    row["correct"] = r.pck.correct;
    row["visible"] = r.pck.visible;
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [k, v] : r.values) values[k] = v;
    row["values"] = values;
    os << row.dump() << "\n";
  }
  return os.str();
}

std::string ExperimentReport::to_csv() const {
  std::vector<std::string> value_names;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.values) {
      if (std::find(value_names.begin(), value_names.end(), k) == value_names.end()) value_names.push_back(k);
    }
  }
  const std::size_t joints = max_joints(rows);
  std::ostringstream os;
  os << "condition,seed,pck,correct,visible";
  for (std::size_t j = 0; j < joints; ++j) os << ",pck_j" << j;
  for (const auto& k : value_names) os << "," << k;
  os << "\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    const long correct = std::accumulate(r.pck.correct.begin(), r.pck.correct.end(), 0L);
    const long visible = std::accumulate(r.pck.visible.begin(), r.pck.visible.end(), 0L);
    os << r.condition << "," << (r.seed ? std::to_string(*r.seed) : "") << "," << opt(r.pck.mean) << "," << correct
       << "," << visible;
    for (std::size_t j = 0; j < joints; ++j) os << "," << (j < r.pck.per_joint.size() ? opt(r.pck.per_joint[j]) : "");
    for (const auto& k : value_names) os << "," << opt(r.value(k));
    os << "\n";
  }
  return os.str();
}

void ExperimentReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto put = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    out << text;
    if (!out) throw IoError("write failed: " + p.string());
  };
  put(dir / "report.jsonl", to_jsonl());
  put(dir / "metrics.csv", to_csv());
}

void EvalOptions::validate() const {
  POSEWARP_REQUIRE(pck_threshold > 0.0, "eval: pck_threshold must be positive");
  POSEWARP_REQUIRE(reference_scale > 0.0, "eval: reference_scale must be positive");
  POSEWARP_REQUIRE(sigma > 0.0, "eval: sigma must be positive");
  POSEWARP_REQUIRE(radius >= 1, "eval: radius must be >= 1");
  POSEWARP_REQUIRE(threads >= 1, "eval: threads must be >= 1");
}

// ---------------------------------------------------------------------------
// Propagation

std::vector<PropagationTarget> propagation_targets(const std::vector<VideoSample>& videos, int radius) {
  POSEWARP_REQUIRE(radius >= 1, "propagation: radius must be >= 1");
  std::vector<PropagationTarget> out;
  bool any_label = false;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const VideoSample& video = videos[v];
    for (int l : video.manual_indices()) {
      any_label = true;
      for (int d = -radius; d <= radius; ++d) {
        const int t = l + d;
        if (d == 0 || t < 0 || t >= video.num_frames()) continue;
        if (video.label_source(t) == LabelSource::kManual) continue;
        out.push_back({static_cast<int>(v), l, t});
      }
    }
  }
  POSEWARP_REQUIRE(any_label, "propagation: no labelled frames");
  return out;
}

namespace {

template <typename T>
std::vector<Heatmap<T>> video_heatmaps(const VideoSample& video, const BackboneParams<T>& backbone, int threads) {
  std::vector<Heatmap<T>> out(static_cast<std::size_t>(video.num_frames()));
  parallel_for(video.num_frames(), threads, [&](int t) {
    out[static_cast<std::size_t>(t)] = backbone_predict(video.frame(t).template cast<T>(), backbone);
  });
  return out;
}

template <typename T>
std::vector<std::vector<Heatmap<T>>> all_heatmaps(const std::vector<VideoSample>& videos,
                                                   const BackboneParams<T>& backbone, int threads) {
  std::vector<std::vector<Heatmap<T>>> out;
  out.reserve(videos.size());
  for (const auto& v : videos) out.push_back(video_heatmaps(v, backbone, threads));
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ReportRow make_row(const std::string& condition, const EvalOptions& options, PckResult pck) {
  ReportRow r;
  r.condition = condition;
  r.seed = options.seed;
  r.pck = std::move(pck);
  return r;
}

std::string options_text(const EvalOptions& o) {
  std::ostringstream os;
  os << "pck_threshold=" << format_double(o.pck_threshold) << "\nreference_scale=" << format_double(o.reference_scale)
     << "\nsigma=" << format_double(o.sigma) << "\nradius=" << o.radius
     << "\nmin_confidence=" << format_double(o.min_confidence) << "\n";
  return os.str();
}

ExperimentReport start_report(const std::string& id, const EvalOptions& options) {
  ExperimentReport r;
  r.experiment_id = id;
  if (options.seed) r.seeds.push_back(*options.seed);
  r.config_snapshot = options_text(options);
  return r;
}

}  // namespace

template <typename T>
std::vector<PropagatedPose> propagate_labels(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                                             const WarperParams<T>& warper, const EvalOptions& options) {
  options.validate();
  const auto targets = propagation_targets(videos, options.radius);
  const auto heatmaps = all_heatmaps(videos, backbone, options.threads);
  std::vector<PropagatedPose> out(targets.size());
  parallel_for(static_cast<int>(targets.size()), options.threads, [&](int i) {
    const auto& tg = targets[static_cast<std::size_t>(i)];
    const VideoSample& video = videos[static_cast<std::size_t>(tg.video)];
    const auto& hs = heatmaps[static_cast<std::size_t>(tg.video)];
    const auto y = render_gaussian<T>(video.training_label(tg.labeled), options.sigma, video.height(), video.width());
    const auto g = propagate_annotation(y, hs[static_cast<std::size_t>(tg.labeled)],
                                        hs[static_cast<std::size_t>(tg.target)], warper);
    out[static_cast<std::size_t>(i)] = {tg.video, tg.target, decode_peaks(g, options.min_confidence)};
  });
  return out;
}

PckResult score_targets(const std::vector<VideoSample>& videos, const std::vector<PropagatedPose>& poses,
                        const EvalOptions& options) {
  std::vector<Pose> pred, gt;
  pred.reserve(poses.size());
  gt.reserve(poses.size());
  for (const auto& p : poses) {
    const VideoSample& video = videos.at(static_cast<std::size_t>(p.video));
    POSEWARP_REQUIRE(video.label_source(p.frame) != LabelSource::kManual,
                     "score_targets: labelled frames are not scored");
    pred.push_back(p.pose);
    gt.push_back(video.ground_truth(p.frame));
  }
  return pck_evaluate(pred, gt, options.pck_threshold, options.reference_scale);
}

template <typename T>
ExperimentReport eval_propagation(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                                  const WarperParams<T>& warper, const EvalOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report = start_report("propagation", options);
  report.config_snapshot += "warper=" + warper.config.to_string() + "\nbackbone=" + backbone.arch.to_string() + "\n";
  const auto poses = propagate_labels(videos, backbone, warper, options);
  report.rows.push_back(make_row("posewarper", options, score_targets(videos, poses, options)));
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

ExperimentReport baseline_copy(const std::vector<VideoSample>& videos, const EvalOptions& options) {
  options.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report = start_report("baseline_copy", options);
  std::vector<PropagatedPose> poses;
  for (const auto& tg : propagation_targets(videos, options.radius)) {
    poses.push_back({tg.video, tg.target, videos[static_cast<std::size_t>(tg.video)].training_label(tg.labeled)});
  }
  report.rows.push_back(make_row("copy", options, score_targets(videos, poses, options)));
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

void BlockMatchOptions::validate() const {
  POSEWARP_REQUIRE(patch >= 1 && patch % 2 == 1, "blockmatch: patch size must be odd and positive");
  POSEWARP_REQUIRE(search >= 0, "blockmatch: search range must be >= 0");
}

ExperimentReport baseline_blockmatch(const std::vector<VideoSample>& videos, const EvalOptions& options,
                                     const BlockMatchOptions& match) {
  options.validate();
  match.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report = start_report("baseline_blockmatch", options);
  report.config_snapshot += "patch=" + std::to_string(match.patch) + "\nsearch=" + std::to_string(match.search) + "\n";
  const int half = match.patch / 2;
  long clamped = 0, unmatched = 0;
  std::vector<PropagatedPose> poses;
  for (const auto& tg : propagation_targets(videos, options.radius)) {
    const VideoSample& video = videos[static_cast<std::size_t>(tg.video)];
    const int height = video.height(), width = video.width();
    POSEWARP_REQUIRE(match.patch <= std::min(height, width) && 2 * match.search < std::min(height, width),
                     "blockmatch: patch and search range must fit in the frame");
    const Tensorf& a = video.frame(tg.labeled);
    const Tensorf& b = video.frame(tg.target);
    Pose pose = video.training_label(tg.labeled);
    for (auto& joint : pose.joints) {
      if (!joint.visible) continue;
      const int cx = std::clamp(static_cast<int>(std::lround(joint.x)), 0, width - 1);
      const int cy = std::clamp(static_cast<int>(std::lround(joint.y)), 0, height - 1);
      const int y0 = std::max(0, cy - half), y1 = std::min(height - 1, cy + half);
      const int x0 = std::max(0, cx - half), x1 = std::min(width - 1, cx + half);
      if (y1 - y0 + 1 < match.patch || x1 - x0 + 1 < match.patch) ++clamped;
      double best = std::numeric_limits<double>::infinity();
      int best_norm = 0, best_dy = 0, best_dx = 0;
      for (int dy = -match.search; dy <= match.search; ++dy) {
        for (int dx = -match.search; dx <= match.search; ++dx) {
          if (y0 + dy < 0 || y1 + dy >= height || x0 + dx < 0 || x1 + dx >= width) continue;
          double ssd = 0.0;
          for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
              const double d = static_cast<double>(a(0, y, x)) - static_cast<double>(b(0, y + dy, x + dx));
              ssd += d * d;
            }
          }
          const int norm = dy * dy + dx * dx;
          if (ssd < best || (ssd == best && norm < best_norm)) {
            best = ssd;
            best_norm = norm;
            best_dy = dy;
            best_dx = dx;
          }
        }
      }
      if (!std::isfinite(best)) ++unmatched;
      joint.x += best_dx;
      joint.y += best_dy;
    }
    poses.push_back({tg.video, tg.target, std::move(pose)});
  }
  ReportRow row = make_row("blockmatch", options, score_targets(videos, poses, options));
  row.values.emplace_back("border_clamped", static_cast<double>(clamped));
  row.values.emplace_back("unmatched", static_cast<double>(unmatched));
  report.rows.push_back(std::move(row));
  if (clamped > 0) report.flags.push_back("blockmatch: " + std::to_string(clamped) + " patches clamped at the border");
  if (unmatched > 0) report.flags.push_back("blockmatch: " + std::to_string(unmatched) + " joints without a candidate");
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

template <typename T>
ExperimentReport eval_backbone(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                               const EvalOptions& options, const std::string& condition) {
  options.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report = start_report("backbone", options);
  report.config_snapshot += "backbone=" + backbone.arch.to_string() + "\n";
  std::vector<Pose> pred, gt;
  for (const auto& video : videos) {
    for (const auto& h : video_heatmaps(video, backbone, options.threads)) {
      pred.push_back(decode_peaks(h, options.min_confidence));
    }
    for (int t = 0; t < video.num_frames(); ++t) gt.push_back(video.ground_truth(t));
  }
  report.rows.push_back(
      make_row(condition, options, pck_evaluate(pred, gt, options.pck_threshold, options.reference_scale)));
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

std::string dilation_condition(const std::vector<int>& dilations) { return "dilations=" + join_ints(dilations, ':'); }

template <typename T>
ExperimentReport ablate_dilations(const std::vector<VideoSample>& train, const std::vector<VideoSample>& test,
                                  const BackboneParams<T>& backbone, const std::vector<std::vector<int>>& configurations,
                                  const WarperConfig& base, const TrainConfig& train_config,
                                  const std::vector<std::uint64_t>& seeds, const EvalOptions& options) {
  POSEWARP_REQUIRE(!configurations.empty(), "ablate_dilations: no configurations");
  POSEWARP_REQUIRE(!seeds.empty(), "ablate_dilations: no seeds");
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report;
  report.experiment_id = "ablate_dilations";
  report.seeds = seeds;
  report.config_snapshot = options_text(options) + train_config.to_text();
  for (const auto& dilations : configurations) {
    WarperConfig wc = base;
    wc.dilations = dilations;
    for (std::uint64_t seed : seeds) {
      TrainConfig tc = train_config;
      tc.seed = seed;
      tc.dilations = dilations;
      const auto trained = train_warper<T>(train, backbone, wc, tc);
      EvalOptions eo = options;
      eo.seed = seed;
      auto r = eval_propagation(test, trained.backbone, trained.warper, eo);
      for (auto& row : r.rows) {
        row.condition = dilation_condition(dilations);
        row.values.emplace_back("final_train_loss", trained.history.back().train_loss);
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Aggregation

std::pair<std::vector<VideoSample>, std::vector<std::vector<int>>> degrade_videos(
    const std::vector<VideoSample>& videos, const DegradationSpec& spec) {
  POSEWARP_REQUIRE(spec.fraction > 0.0 && spec.fraction <= 1.0, "degrade_videos: fraction must be in (0, 1]");
  std::vector<VideoSample> out;
  std::vector<std::vector<int>> indices;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const int n = videos[v].num_frames();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(spec.seed, "degrade_frames", v));
    rng.shuffle(order);
    const int count = std::max(1, static_cast<int>(std::lround(spec.fraction * n)));
    std::vector<int> chosen(order.begin(), order.begin() + count);
    std::sort(chosen.begin(), chosen.end());
    out.push_back(apply_degradation(videos[v], chosen, spec.mode, spec.magnitude, derive_seed(spec.seed, "degrade", v)));
    indices.push_back(std::move(chosen));
  }
  return {std::move(out), std::move(indices)};
}

template <typename T>
ExperimentReport eval_aggregation(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                                  const WarperParams<T>& warper, const std::vector<int>& deltas,
                                  const DegradationSpec& degradation, const EvalOptions& options) {
  POSEWARP_REQUIRE(!deltas.empty(), "eval_aggregation: deltas must not be empty");
  options.validate();
  const auto start = std::chrono::steady_clock::now();
  ExperimentReport report = start_report("aggregation", options);
  report.config_snapshot += "deltas=" + join_ints(deltas) + "\ndegradation_magnitude=" +
                            format_double(degradation.magnitude) + "\ndegradation_fraction=" +
                            format_double(degradation.fraction) + "\n";

  auto run = [&](const std::vector<VideoSample>& set, const std::vector<std::vector<int>>* frames,
                 const std::string& prefix) {
    std::vector<Pose> single, aggregate, gt;
    for (std::size_t v = 0; v < set.size(); ++v) {
      const auto hs = video_heatmaps(set[v], backbone, options.threads);
      std::vector<int> ts;
      if (frames) {
        ts = (*frames)[v];
      } else {
        ts.resize(hs.size());
        std::iota(ts.begin(), ts.end(), 0);
      }
      std::vector<Pose> agg(ts.size());
      parallel_for(static_cast<int>(ts.size()), options.threads, [&](int i) {
        const auto h = temporal_aggregate_heatmaps<T>(hs, ts[static_cast<std::size_t>(i)], deltas, warper);
        agg[static_cast<std::size_t>(i)] = decode_peaks(h, options.min_confidence);
      });
      for (std::size_t i = 0; i < ts.size(); ++i) {
        single.push_back(decode_peaks(hs[static_cast<std::size_t>(ts[i])], options.min_confidence));
        aggregate.push_back(std::move(agg[i]));
        gt.push_back(set[v].ground_truth(ts[i]));
      }
    }
    report.rows.push_back(make_row(prefix + "/single", options,
                                   pck_evaluate(single, gt, options.pck_threshold, options.reference_scale)));
    report.rows.push_back(make_row(prefix + "/aggregate", options,
                                   pck_evaluate(aggregate, gt, options.pck_threshold, options.reference_scale)));
  };

  run(videos, nullptr, "clean");
  const auto [degraded, frames] = degrade_videos(videos, degradation);
  run(degraded, &frames, "degraded");
  report.wall_clock_seconds = seconds_since(start);
  return report;
}

// ---------------------------------------------------------------------------
// Offset interpretation

template <typename T>
std::vector<double> offset_features(const std::vector<OffsetField<T>>& offsets, int y, int x) {
  std::vector<double> f;
  for (const auto& o : offsets) {
    for (int c = 0; c < o.data.dim(0); ++c) f.push_back(static_cast<double>(o.data(c, y, x)));
  }
  return f;
}

template <typename T>
std::vector<MotionSample> collect_motion_samples(const std::vector<VideoSample>& videos,
                                                 const BackboneParams<T>& backbone, const WarperParams<T>& warper,
                                                 const MotionProbeOptions& options) {
  POSEWARP_REQUIRE(options.max_delta >= 1, "motion probe: max_delta must be >= 1");
  POSEWARP_REQUIRE(options.frame_stride >= 1, "motion probe: frame_stride must be >= 1");
  std::vector<MotionSample> out;
  for (const auto& video : videos) {
    const auto hs = video_heatmaps(video, backbone, options.threads);
    std::vector<std::pair<int, int>> pairs;
    for (int t = 0; t < video.num_frames(); t += options.frame_stride) {
      for (int d = -options.max_delta; d <= options.max_delta; ++d) {
        if (d != 0 && t + d >= 0 && t + d < video.num_frames()) pairs.emplace_back(t, t + d);
      }
    }
    std::vector<std::vector<MotionSample>> per_pair(pairs.size());
    parallel_for(static_cast<int>(pairs.size()), options.threads, [&](int i) {
      const auto [a, b] = pairs[static_cast<std::size_t>(i)];
      const auto& fa = hs[static_cast<std::size_t>(a)];
      const auto& fb = hs[static_cast<std::size_t>(b)];
      const auto [out_w, cache] = warp_heatmap(fb, compute_difference(fa, fb), warper);
      const Pose& pa = video.ground_truth(a);
      const Pose& pb = video.ground_truth(b);
      for (int j = 0; j < pa.size(); ++j) {
        const Joint& ja = pa.joints[static_cast<std::size_t>(j)];
        const Joint& jb = pb.joints[static_cast<std::size_t>(j)];
        if (!ja.visible || !jb.visible) continue;
        const int y = std::clamp(static_cast<int>(std::lround(ja.y)), 0, video.height() - 1);
        const int x = std::clamp(static_cast<int>(std::lround(ja.x)), 0, video.width() - 1);
        per_pair[static_cast<std::size_t>(i)].push_back({offset_features(out_w.offsets, y, x), jb.x - ja.x, jb.y - ja.y});
      }
    });
    for (auto& p : per_pair) {
      for (auto& s : p) out.push_back(std::move(s));
    }
  }
  return out;
}

std::pair<double, double> LinearMotionModel::predict(const std::vector<double>& features) const {
  POSEWARP_REQUIRE(static_cast<int>(features.size()) == feature_dim, "motion model: feature dimension mismatch");
  double dx = coefficients.back()[0], dy = coefficients.back()[1];
  for (std::size_t i = 0; i < features.size(); ++i) {
    dx += features[i] * coefficients[i][0];
    dy += features[i] * coefficients[i][1];
  }
  return {dx, dy};
}

LinearMotionModel fit_motion_model(const std::vector<MotionSample>& samples) {
  POSEWARP_REQUIRE(!samples.empty(), "fit_motion_model: no samples");
  const int f = static_cast<int>(samples.front().features.size());
  const int n = static_cast<int>(samples.size());
  Eigen::MatrixXd x(n, f + 1);
  Eigen::MatrixXd y(n, 2);
  for (int i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    POSEWARP_REQUIRE(static_cast<int>(s.features.size()) == f, "fit_motion_model: ragged features");
    for (int k = 0; k < f; ++k) x(i, k) = s.features[static_cast<std::size_t>(k)];
    x(i, f) = 1.0;
    y(i, 0) = s.dx;
    y(i, 1) = s.dy;
  }
  LinearMotionModel model;
  model.feature_dim = f;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  Eigen::MatrixXd beta;
  if (qr.rank() < f + 1) {
    model.ridge_fallback = true;
    const Eigen::MatrixXd gram = x.transpose() * x + 1e-6 * Eigen::MatrixXd::Identity(f + 1, f + 1);
    beta = gram.ldlt().solve(x.transpose() * y);
  } else {
    beta = qr.solve(y);
  }
  model.coefficients.assign(static_cast<std::size_t>(f + 1), std::vector<double>(2, 0.0));
  for (int k = 0; k <= f; ++k) {
    model.coefficients[static_cast<std::size_t>(k)][0] = beta(k, 0);
    model.coefficients[static_cast<std::size_t>(k)][1] = beta(k, 1);
  }
  return model;
}

double mean_endpoint_error(const LinearMotionModel& model, const std::vector<MotionSample>& samples) {
  POSEWARP_REQUIRE(!samples.empty(), "mean_endpoint_error: no samples");
  double sum = 0.0;
  for (const auto& s : samples) {
    const auto [dx, dy] = model.predict(s.features);
    sum += std::hypot(dx - s.dx, dy - s.dy);
  }
  return sum / static_cast<double>(samples.size());
}

double zero_predictor_error(const std::vector<MotionSample>& samples) {
  POSEWARP_REQUIRE(!samples.empty(), "zero_predictor_error: no samples");
  double sum = 0.0;
  for (const auto& s : samples) sum += std::hypot(s.dx, s.dy);
  return sum / static_cast<double>(samples.size());
}

template <typename T>
MotionRegressionResult offset_motion_regression(const std::vector<VideoSample>& train,
                                                const std::vector<VideoSample>& test,
                                                const BackboneParams<T>& backbone, const WarperParams<T>& warper,
                                                const MotionProbeOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const auto train_samples = collect_motion_samples(train, backbone, warper, options);
  const auto test_samples = collect_motion_samples(test, backbone, warper, options);
  MotionRegressionResult r;
  r.model = fit_motion_model(train_samples);
  r.train_error = mean_endpoint_error(r.model, train_samples);
  r.test_error = mean_endpoint_error(r.model, test_samples);
  r.zero_error = zero_predictor_error(test_samples);
  r.train_samples = train_samples.size();
  r.test_samples = test_samples.size();

  r.report.experiment_id = "offset_motion_regression";
  r.report.config_snapshot = "max_delta=" + std::to_string(options.max_delta) +
                             "\nframe_stride=" + std::to_string(options.frame_stride) +
                             "\nwarper=" + warper.config.to_string() + "\n";
  ReportRow row;
  row.condition = "linear_probe";
  row.values = {{"feature_dim", static_cast<double>(r.model.feature_dim)},
                {"train_samples", static_cast<double>(r.train_samples)},
                {"test_samples", static_cast<double>(r.test_samples)},
                {"train_endpoint_error", r.train_error},
                {"test_endpoint_error", r.test_error},
                {"zero_endpoint_error", r.zero_error},
                {"ridge_fallback", r.model.ridge_fallback ? 1.0 : 0.0}};
  r.report.rows.push_back(std::move(row));
  if (r.model.ridge_fallback) r.report.flags.push_back("rank-deficient design: ridge lambda=1e-6");
  r.report.wall_clock_seconds = seconds_since(start);
  return r;
}

template <typename T>
void export_motion_fields(const std::filesystem::path& dir, const VideoSample& video, int t, int delta,
                          const BackboneParams<T>& backbone, const WarperParams<T>& warper,
                          const LinearMotionModel& model) {
  const int b = t + delta;
  POSEWARP_REQUIRE(t >= 0 && t < video.num_frames() && b >= 0 && b < video.num_frames(),
                   "export_motion_fields: frame index out of range");
  std::filesystem::create_directories(dir);
  const auto fa = backbone_predict(video.frame(t).template cast<T>(), backbone);
  const auto fb = backbone_predict(video.frame(b).template cast<T>(), backbone);
  const auto [out, cache] = warp_heatmap(fb, compute_difference(fa, fb), warper);
  const int height = video.height(), width = video.width();

  Tensorf dx({1, height, width}), dy({1, height, width});
  std::ofstream csv(dir / "motion.csv");
  if (!csv) throw IoError("cannot write " + (dir / "motion.csv").string());
  csv << "y,x,dx,dy\n";
  double max_mag = 0.0;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto [px, py] = model.predict(offset_features(out.offsets, y, x));
      dx(0, y, x) = static_cast<float>(px);
      dy(0, y, x) = static_cast<float>(py);
      max_mag = std::max(max_mag, std::hypot(px, py));
      csv << y << "," << x << "," << format_double(px) << "," << format_double(py) << "\n";
    }
  }
  write_ppm(dir / "motion.ppm", motion_to_rgb(dx, dy, std::max(max_mag, 1e-9)));
  write_pgm(dir / "frame_a.pgm", video.frame(t));
  write_pgm(dir / "frame_b.pgm", video.frame(b));

  for (std::size_t k = 0; k < out.offsets.size(); ++k) {
    const auto& o = out.offsets[k];
    const int taps = o.data.dim(0) / 2;
    Tensorf mag({1, height, width});
    float peak = 0.0f;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double s = 0.0;
        for (int c = 0; c < taps; ++c) s += std::hypot(o.data(2 * c, y, x), o.data(2 * c + 1, y, x));
        mag(0, y, x) = static_cast<float>(s / taps);
        peak = std::max(peak, mag(0, y, x));
      }
    }
    if (peak > 0.0f) mag *= 1.0f / peak;
    write_pgm(dir / ("offset_magnitude_d" + std::to_string(warper.branches[k].dilation) + ".pgm"), mag);
  }
}

// ---------------------------------------------------------------------------
// Instantiations

#define POSEWARP_INSTANTIATE_EVAL(T)                                                                                   \
  template std::vector<PropagatedPose> propagate_labels<T>(const std::vector<VideoSample>&, const BackboneParams<T>&, \
                                                           const WarperParams<T>&, const EvalOptions&);                \
  template ExperimentReport eval_propagation<T>(const std::vector<VideoSample>&, const BackboneParams<T>&,             \
                                                const WarperParams<T>&, const EvalOptions&);                           \
  template ExperimentReport eval_backbone<T>(const std::vector<VideoSample>&, const BackboneParams<T>&,                \
                                             const EvalOptions&, const std::string&);                                  \
  template ExperimentReport ablate_dilations<T>(                                                                       \
      const std::vector<VideoSample>&, const std::vector<VideoSample>&, const BackboneParams<T>&,                      \
      const std::vector<std::vector<int>>&, const WarperConfig&, const TrainConfig&,                                   \
      const std::vector<std::uint64_t>&, const EvalOptions&);                                                          \
  template ExperimentReport eval_aggregation<T>(const std::vector<VideoSample>&, const BackboneParams<T>&,             \
                                                const WarperParams<T>&, const std::vector<int>&,                       \
                                                const DegradationSpec&, const EvalOptions&);                           \
  template std::vector<double> offset_features<T>(const std::vector<OffsetField<T>>&, int, int);                      \
  template std::vector<MotionSample> collect_motion_samples<T>(const std::vector<VideoSample>&,                        \
                                                               const BackboneParams<T>&, const WarperParams<T>&,       \
                                                               const MotionProbeOptions&);                             \
  template MotionRegressionResult offset_motion_regression<T>(const std::vector<VideoSample>&,                         \
                                                              const std::vector<VideoSample>&,                         \
                                                              const BackboneParams<T>&, const WarperParams<T>&,        \
                                                              const MotionProbeOptions&);                              \
  template void export_motion_fields<T>(const std::filesystem::path&, const VideoSample&, int, int,                    \
                                        const BackboneParams<T>&, const WarperParams<T>&, const LinearMotionModel&);

POSEWARP_INSTANTIATE_EVAL(float)
POSEWARP_INSTANTIATE_EVAL(double)

#undef POSEWARP_INSTANTIATE_EVAL

}  // namespace posewarp
