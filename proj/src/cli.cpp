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

#include "posewarp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "posewarp/checkpoint.hpp"
#include "posewarp/dataset_io.hpp"
#include "posewarp/error.hpp"
#include "posewarp/eval.hpp"
#include "posewarp/gradient_suite.hpp"
#include "posewarp/presets.hpp"
#include "posewarp/synthdata.hpp"
#include "posewarp/text_kv.hpp"
#include "posewarp/training.hpp"

namespace posewarp {
namespace {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Settings: defaults, then the --config file, then explicit flags.

struct KeySpec {
  std::string key;
  std::string fallback;
  std::string help;
};

class Settings {
 public:
  Settings(std::string command, std::vector<KeySpec> keys) : command_(std::move(command)), keys_(std::move(keys)) {
    for (const auto& k : keys_) values_[k.key] = k.fallback;
  }

  void bind(CLI::App& app) {
    app.add_option("--config", config_file_, "key=value file; flags override it");
    for (const auto& k : keys_) {
      std::string flag = "--" + k.key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      options_[k.key] = app.add_option(flag, flags_[k.key], k.help + (k.fallback.empty() ? "" : " [" + k.fallback + "]"));
    }
  }

  void resolve() {
    if (!config_file_.empty()) {
      std::ifstream in(config_file_);
      if (!in) throw IoError("cannot read config file " + config_file_);
      std::stringstream buffer;
      buffer << in.rdbuf();
      for (const auto& [key, value] : parse_kv_text(buffer.str())) {
        if (!values_.count(key)) throw ConfigError(key, "unknown key '" + key + "' for " + command_);
        values_[key] = value;
      }
    }
    for (const auto& [key, option] : options_) {
      if (option->count() > 0) values_[key] = flags_[key];
    }
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  const std::string& str(const std::string& key) const { return values_.at(key); }
  int integer(const std::string& key) const { return parse_int(key, str(key)); }
  std::uint64_t u64(const std::string& key) const {
    const long long v = parse_int64(key, str(key));
    if (v < 0) throw ConfigError(key, key + " must be >= 0");
    return static_cast<std::uint64_t>(v);
  }
  double real(const std::string& key) const { return parse_double(key, str(key)); }
  bool flag(const std::string& key) const { return parse_bool(key, str(key)); }
  std::string required(const std::string& key) const {
    if (str(key).empty()) throw ConfigError(key, "missing required setting '" + key + "'");
    return str(key);
  }

  /// Values of `keys` that are set, as key/value pairs.
  std::vector<std::pair<std::string, std::string>> subset(const std::set<std::string>& keys) const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& k : keys_) {
      if (keys.count(k.key) && !values_.at(k.key).empty()) out.emplace_back(k.key, values_.at(k.key));
    }
    return out;
  }

  std::string snapshot() const {
    std::string s = "command=" + command_ + "\n";
    for (const auto& k : keys_) s += k.key + "=" + values_.at(k.key) + "\n";
    return s;
  }

 private:
  std::string command_;
  std::vector<KeySpec> keys_;
  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> flags_;
  std::map<std::string, CLI::Option*> options_;
  std::string config_file_;
};

// Keys understood by TrainConfig::from_kv.
const std::set<std::string>& training_keys() {
  static const std::set<std::string> keys{"base_lr",     "milestones",       "epochs",    "batch_size",
                                          "max_delta",   "sigma",            "augment",   "rotation_degrees",
                                          "scale_min",   "scale_max",        "flip_probability",
                                          "seed",        "precision",        "finetune_backbone",
                                          "threads",     "validate_every",   "pseudo_label_threshold"};
  return keys;
}

std::vector<KeySpec> training_specs(const TrainConfig& d) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {{"epochs", std::to_string(d.epochs), "training epochs (milestones rescale unless given)"},
          {"base_lr", format_double(d.base_lr), "initial Adam learning rate"},
          {"milestones", "", "epochs at which the rate drops 10x (default: 10/15 of 20, rescaled)"},
          {"batch_size", std::to_string(d.batch_size), "samples per optimizer step"},
          {"sigma", format_double(d.sigma), "heatmap Gaussian sigma in pixels"},
          {"augment", b(d.augment.enabled), "random rotation, scaling and flipping"},
          {"rotation_degrees", format_double(d.augment.rotation_degrees), "rotation range, +-degrees"},
          {"scale_min", format_double(d.augment.scale_min), "smallest scale factor"},
          {"scale_max", format_double(d.augment.scale_max), "largest scale factor"},
          {"flip_probability", format_double(d.augment.flip_probability), "horizontal flip probability"},
          {"validate_every", std::to_string(d.validate_every), "validation interval in epochs (0: last only)"},
          {"precision", d.precision, "f32 or f64"}};
}

std::vector<KeySpec> common_specs() {
  return {{"seed", "0", "root random seed"}, {"threads", "1", "worker threads (1 is bit-reproducible)"}};
}

template <typename... Lists>
std::vector<KeySpec> concat(Lists... lists) {
  std::vector<KeySpec> out;
  (out.insert(out.end(), lists.begin(), lists.end()), ...);
  return out;
}

TrainConfig training_from(const Settings& s, TrainConfig base) {
  return TrainConfig::from_kv(s.subset(training_keys()), std::move(base));
}

// ---------------------------------------------------------------------------
// Run directories

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

fs::path prepare_run_dir(const Settings& s, const std::string& extra_config = "") {
  const fs::path dir = s.required("out");
  if (s.has("data") && !s.str("data").empty()) {
    const auto data = fs::weakly_canonical(s.str("data"));
    const auto out = fs::weakly_canonical(dir);
    auto rel = out.lexically_relative(data);
    if (!rel.empty() && *rel.begin() != "..") {
      throw ConfigError("out", "output directory must not lie inside the dataset directory");
    }
  }
  fs::create_directories(dir);
  write_text(dir / "config.txt", s.snapshot() + extra_config);
  write_text(dir / "seed.txt", s.str("seed") + "\n");
  return dir;
}

void write_history(const fs::path& path, const std::vector<EpochMetrics>& history) {
  std::ostringstream os;
  os << "epoch,lr,train_loss,val_pck\n";
  for (const auto& m : history) {
    os << m.epoch << "," << format_double(m.lr) << "," << format_double(m.train_loss) << ","
       << (m.val_pck ? format_double(*m.val_pck) : "") << "\n";
  }
  write_text(path, os.str());
}

const std::vector<VideoSample>& pick_split(const DatasetSplits& splits, const std::string& name) {
  if (name == "train") return splits.train;
  if (name == "val") return splits.val;
  if (name == "test") return splits.test;
  throw ConfigError("split", "unknown split '" + name + "' (train, val or test)");
}

std::vector<std::string> split_directories(const DatasetManifest& m, const std::string& split) {
  std::vector<std::string> out;
  for (const auto& e : m.videos) {
    if (e.split == split) out.push_back(e.directory);
  }
  return out;
}

EvalOptions eval_options(const Settings& s, double torso) {
  EvalOptions o;
  o.reference_scale = torso;
  o.threads = s.integer("threads");
  o.seed = s.u64("seed");
  return o;
}

double torso_length() { return SkeletonSpec::default_human().torso_length(); }

bool is_f64(const Settings& s) {
  const std::string& p = s.str("precision");
  if (p != "f32" && p != "f64") throw ConfigError("precision", "precision must be f32 or f64");
  return p == "f64";
}

// ---------------------------------------------------------------------------
// Pseudo-label files: video,frame,joint_id,x,y,visible,confidence

void write_pseudo_labels(const fs::path& path, const std::vector<PropagatedPose>& poses,
                         const std::vector<std::string>& dirs) {
  std::ostringstream os;
  os << "video,frame,joint_id,x,y,visible,confidence\n";
  for (const auto& p : poses) {
    for (int j = 0; j < p.pose.size(); ++j) {
      const Joint& jt = p.pose.joints[static_cast<std::size_t>(j)];
      os << dirs.at(static_cast<std::size_t>(p.video)) << "," << p.frame << "," << j << "," << format_double(jt.x)
         << "," << format_double(jt.y) << "," << (jt.visible ? 1 : 0) << "," << format_double(jt.confidence) << "\n";
    }
  }
  write_text(path, os.str());
}

std::vector<PropagatedPose> read_pseudo_labels(const fs::path& path, const std::vector<std::string>& dirs,
                                               int joints) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read pseudo labels " + path.string());
  std::map<std::pair<int, int>, std::size_t> slot;
  std::vector<PropagatedPose> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 7) throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 7 fields");
    const auto it = std::find(dirs.begin(), dirs.end(), f[0]);
    if (it == dirs.end()) throw IoError(path.string() + ":" + std::to_string(line_no) + ": unknown video " + f[0]);
    const int video = static_cast<int>(it - dirs.begin());
    const int frame = parse_int("frame", f[1]);
    const int joint = parse_int("joint_id", f[2]);
    if (joint < 0 || joint >= joints) throw IoError(path.string() + ":" + std::to_string(line_no) + ": bad joint id");
    auto [pos, inserted] = slot.try_emplace({video, frame}, out.size());
    if (inserted) out.push_back({video, frame, Pose(joints)});
    Joint& jt = out[pos->second].pose.joints[static_cast<std::size_t>(joint)];
    jt.x = parse_double("x", f[3]);
    jt.y = parse_double("y", f[4]);
    jt.visible = f[5] == "1";
    jt.confidence = parse_double("confidence", f[6]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_gen_data(const Settings& s, std::ostream& out) {
  GeneratorConfig g;
  g.frames = s.integer("frames");
  g.height = s.integer("height");
  g.width = s.integer("width");
  g.label_interval = s.integer("label_every");
  g.motion.root_speed_max = s.real("root_speed_max");
  g.motion.limb_speed_max = s.real("limb_speed_max");
  if (g.frames < 1) throw ConfigError("frames", "frames must be >= 1");
  if (g.label_interval < 1) throw ConfigError("label_every", "label_every must be >= 1");
  if (g.height < 16 || g.width < 16) throw ConfigError("height", "frames must be at least 16x16");
  const int videos = s.integer("videos");
  if (videos < 1) throw ConfigError("videos", "videos must be >= 1");
  const auto fractions = parse_double_list("splits", s.str("splits"));
  try {
    split_sizes(videos, fractions);
  } catch (const ContractError& e) {
    throw ConfigError("splits", e.what());
  }
  const auto splits = split_dataset(videos, fractions, s.u64("seed"), g);
  const fs::path dir = s.required("out");
  write_dataset(dir, splits, s.u64("seed"));
  out << "wrote " << videos << " videos (" << splits.train.size() << " train, " << splits.val.size() << " val, "
      << splits.test.size() << " test) to " << dir.string() << "\n";
  return kExitOk;
}

template <typename T>
int cmd_train_backbone(const Settings& s, std::ostream& out) {
  DatasetManifest manifest;
  const auto data = read_dataset(s.required("data"), &manifest);
  TrainConfig cfg = training_from(s, desk_backbone_training());
  BackboneArch arch = desk_backbone_arch();
  arch.width = s.integer("width");
  arch.hidden_layers = s.integer("hidden_layers");
  arch.dilations = s.str("backbone_dilations").empty() ? std::vector<int>{}
                                                        : parse_int_list("backbone_dilations", s.str("backbone_dilations"));
  arch.joints = manifest.joints;
  try {
    arch.validate();
  } catch (const ContractError& e) {
    throw ConfigError("backbone_dilations", e.what());
  }
  std::vector<VideoSample> train = pick_split(data, s.str("split"));
  std::string pseudo_note;
  if (!s.str("pseudo_labels").empty()) {
    const auto poses = read_pseudo_labels(s.str("pseudo_labels"), split_directories(manifest, s.str("split")),
                                          manifest.joints);
    train = merge_pseudo_labels(std::move(train), poses, cfg.pseudo_label_threshold);
    pseudo_note = "pseudo_label_count=" + std::to_string(poses.size()) + "\n";
  }
  const fs::path dir = prepare_run_dir(s, cfg.to_text() + "backbone.arch=" + arch.to_string() + "\n" + pseudo_note);
  const auto& val = data.val;
  const EvalOptions eo = eval_options(s, torso_length());
  BackboneValidator<T> validator;
  if (!val.empty()) {
    validator = [&](const BackboneParams<T>& p) { return eval_backbone(val, p, eo).mean_pck("backbone").value_or(0.0); };
  }
  const auto result = train_backbone<T>(train, arch, cfg, validator);
  Checkpoint ck;
  store_backbone(ck, result.params);
  store_training(ck, cfg, result.history);
  write_checkpoint(dir / "checkpoint.pwck", ck);
  write_history(dir / "metrics.csv", result.history);
  out << "backbone trained: final loss " << format_double(result.history.back().train_loss);
  if (result.history.back().val_pck) out << ", val PCK " << format_double(*result.history.back().val_pck);
  out << "\n";
  return kExitOk;
}

WarperConfig warper_config_from(const Settings& s, int joints) {
  WarperConfig wc = desk_warper_config();
  wc.joints = joints;
  wc.res_blocks = s.integer("res_blocks");
  wc.res_width = s.integer("res_width");
  wc.dilations = parse_int_list("dilations", s.str("dilations"));
  try {
    wc.validate();
  } catch (const ContractError& e) {
    throw ConfigError("dilations", e.what());
  }
  return wc;
}

template <typename T>
int cmd_train_warper(const Settings& s, std::ostream& out) {
  DatasetManifest manifest;
  const auto data = read_dataset(s.required("data"), &manifest);
  TrainConfig cfg = training_from(s, desk_warper_training());
  const auto backbone_ck = read_checkpoint(s.required("backbone"));
  const auto backbone = load_backbone<T>(backbone_ck);
  const WarperConfig wc = warper_config_from(s, backbone.arch.joints);
  cfg.dilations = wc.dilations;
  const fs::path dir = prepare_run_dir(s, cfg.to_text() + "warper.config=" + wc.to_string() + "\n");
  const EvalOptions eo = eval_options(s, torso_length());
  WarperValidator<T> validator;
  if (!data.val.empty()) {
    validator = [&](const BackboneParams<T>& b, const WarperParams<T>& w) {
      return eval_propagation(data.val, b, w, eo).mean_pck("posewarper").value_or(0.0);
    };
  }
  const auto result = train_warper<T>(pick_split(data, s.str("split")), backbone, wc, cfg, validator);
  Checkpoint ck;
  store_backbone(ck, result.backbone);
  store_warper(ck, result.warper);
  store_training(ck, cfg, result.history);
  ck.set_meta("initial_loss", format_double(result.initial_loss));
  write_checkpoint(dir / "checkpoint.pwck", ck);
  write_history(dir / "metrics.csv", result.history);
  out << "warper trained: initial loss " << format_double(result.initial_loss) << ", final loss "
      << format_double(result.history.back().train_loss) << "\n";
  return kExitOk;
}

template <typename T>
int cmd_propagate(const Settings& s, std::ostream& out) {
  DatasetManifest manifest;
  const auto data = read_dataset(s.required("data"), &manifest);
  const auto ck = read_checkpoint(s.required("checkpoint"));
  const auto backbone = load_backbone<T>(ck);
  const auto warper = load_warper<T>(ck);
  EvalOptions eo = eval_options(s, torso_length());
  eo.radius = s.integer("radius");
  if (eo.radius < 1) throw ConfigError("radius", "radius must be >= 1");
  const fs::path dir = prepare_run_dir(s);
  const auto& videos = pick_split(data, s.str("split"));
  const auto poses = propagate_labels(videos, backbone, warper, eo);
  write_pseudo_labels(dir / "pseudo_labels.csv", poses, split_directories(manifest, s.str("split")));
  // Offline quality of the pseudo-labels; nothing downstream reads it.
  ExperimentReport report;
  report.experiment_id = "propagate";
  report.seeds = {s.u64("seed")};
  report.checkpoint = s.str("checkpoint");
  report.config_snapshot = s.snapshot();
  report.rows.push_back({"propagated", s.u64("seed"), score_targets(videos, poses, eo),
                         {{"poses", static_cast<double>(poses.size())}}});
  report.write(dir);
  out << "propagated " << poses.size() << " poses to " << (dir / "pseudo_labels.csv").string() << "\n";
  return kExitOk;
}

template <typename T>
int cmd_aggregate(const Settings& s, std::ostream& out) {
  const auto data = read_dataset(s.required("data"));
  const auto ck = read_checkpoint(s.required("checkpoint"));
  const auto backbone = load_backbone<T>(ck);
  const auto warper = load_warper<T>(ck);
  DegradationSpec deg;
  deg.mode = parse_degradation_mode(s.str("degrade"));
  deg.magnitude = s.real("magnitude");
  deg.fraction = s.real("fraction");
  deg.seed = s.u64("seed");
  if (!(deg.fraction > 0.0 && deg.fraction <= 1.0)) throw ConfigError("fraction", "fraction must be in (0, 1]");
  if (!(deg.magnitude > 0.0)) throw ConfigError("magnitude", "magnitude must be positive");
  const auto deltas = parse_int_list("deltas", s.str("deltas"));
  if (deltas.empty()) throw ConfigError("deltas", "deltas must not be empty");
  const fs::path dir = prepare_run_dir(s);
  auto report = eval_aggregation(pick_split(data, s.str("split")), backbone, warper, deltas, deg,
                                 eval_options(s, torso_length()));
  report.checkpoint = s.str("checkpoint");
  report.config_snapshot += s.snapshot();
  report.write(dir);
  for (const auto& r : report.rows) out << r.condition << " PCK " << format_double(r.pck.mean.value_or(0.0)) << "\n";
  return kExitOk;
}

template <typename T>
int cmd_eval(const Settings& s, std::ostream& out) {
  const auto data = read_dataset(s.required("data"));
  const auto& videos = pick_split(data, s.str("split"));
  EvalOptions eo = eval_options(s, torso_length());
  eo.radius = s.integer("radius");
  if (eo.radius < 1) throw ConfigError("radius", "radius must be >= 1");
  BlockMatchOptions bm;
  bm.patch = s.integer("patch");
  bm.search = s.integer("search");
  if (bm.patch < 1 || bm.patch % 2 == 0) throw ConfigError("patch", "patch must be odd and positive");
  if (bm.search < 0) throw ConfigError("search", "search must be >= 0");
  const fs::path dir = prepare_run_dir(s);
  ExperimentReport report = baseline_copy(videos, eo);
  report.experiment_id = "propagation_eval";
  report.append(baseline_blockmatch(videos, eo, bm));
  if (!s.str("checkpoint").empty()) {
    const auto ck = read_checkpoint(s.str("checkpoint"));
    // A backbone-only checkpoint is scored frame by frame.
    if (has_warper(ck)) {
      report.append(eval_propagation(videos, load_backbone<T>(ck), load_warper<T>(ck), eo));
    } else {
      report.append(eval_backbone(videos, load_backbone<T>(ck), eo));
    }
    report.checkpoint = s.str("checkpoint");
  }
  report.config_snapshot += s.snapshot();
  report.write(dir);
  for (const auto& r : report.rows) out << r.condition << " PCK " << format_double(r.pck.mean.value_or(0.0)) << "\n";
  return kExitOk;
}

template <typename T>
int cmd_ablate(const Settings& s, std::ostream& out) {
  DatasetManifest manifest;
  const auto data = read_dataset(s.required("data"), &manifest);
  TrainConfig cfg = training_from(s, desk_warper_training());
  const auto backbone = load_backbone<T>(read_checkpoint(s.required("backbone")));
  WarperConfig base = warper_config_from(s, backbone.arch.joints);
  std::vector<std::vector<int>> configs;
  for (const auto& part : split(s.str("configs"), ';')) {
    if (trim(part).empty()) continue;
    configs.push_back(parse_int_list("configs", part));
  }
  if (configs.empty()) throw ConfigError("configs", "no dilation configurations given");
  std::vector<std::uint64_t> seeds;
  for (const auto& t : split(s.str("seeds"), ',')) seeds.push_back(static_cast<std::uint64_t>(parse_int64("seeds", t)));
  if (seeds.empty()) throw ConfigError("seeds", "no seeds given");
  const fs::path dir = prepare_run_dir(s, cfg.to_text());
  EvalOptions eo = eval_options(s, torso_length());
  auto report = ablate_dilations<T>(data.train, pick_split(data, s.str("split")), backbone, configs, base, cfg, seeds, eo);
  report.checkpoint = s.str("backbone");
  report.config_snapshot += s.snapshot();
  report.write(dir);
  for (const auto& c : configs) {
    out << dilation_condition(c) << " mean PCK "
        << format_double(report.mean_pck(dilation_condition(c)).value_or(0.0)) << "\n";
  }
  return kExitOk;
}

template <typename T>
int cmd_inspect_offsets(const Settings& s, std::ostream& out) {
  const auto data = read_dataset(s.required("data"));
  const auto ck = read_checkpoint(s.required("checkpoint"));
  const auto backbone = load_backbone<T>(ck);
  const auto warper = load_warper<T>(ck);
  MotionProbeOptions mo;
  mo.max_delta = s.integer("max_delta");
  mo.frame_stride = s.integer("frame_stride");
  mo.threads = s.integer("threads");
  if (mo.max_delta < 1) throw ConfigError("max_delta", "max_delta must be >= 1");
  if (mo.frame_stride < 1) throw ConfigError("frame_stride", "frame_stride must be >= 1");
  const fs::path dir = prepare_run_dir(s);
  const auto& fit_set = pick_split(data, s.str("fit_split"));
  const auto& test_set = pick_split(data, s.str("split"));
  auto result = offset_motion_regression(fit_set, test_set, backbone, warper, mo);
  result.report.checkpoint = s.str("checkpoint");
  result.report.config_snapshot += s.snapshot();
  result.report.write(dir);
  const int video = s.integer("export_video");
  const int frame = s.integer("export_frame");
  const int delta = s.integer("export_delta");
  if (video < 0 || video >= static_cast<int>(test_set.size())) throw ConfigError("export_video", "video out of range");
  if (frame < 0 || frame >= test_set[static_cast<std::size_t>(video)].num_frames() ||
      frame + delta < 0 || frame + delta >= test_set[static_cast<std::size_t>(video)].num_frames()) {
    throw ConfigError("export_frame", "export frame pair out of range");
  }
  export_motion_fields(dir / "motion_fields", test_set[static_cast<std::size_t>(video)], frame, delta, backbone,
                       warper, result.model);
  out << "endpoint error " << format_double(result.test_error) << " (zero predictor "
      << format_double(result.zero_error) << ", " << result.test_samples << " held-out samples"
      << (result.model.ridge_fallback ? ", ridge fallback" : "") << ")\n";
  return kExitOk;
}

int cmd_grad_check(const Settings& s, std::ostream& out) {
  const double tol = s.real("tolerance");
  if (!(tol > 0.0)) throw ConfigError("tolerance", "tolerance must be positive");
  bool ok = true;
  std::ostringstream csv;
  csv << "op,passed,max_relative_error,tolerance,scalars_checked,worst\n";
  for (const auto& r : run_gradient_suite(s.u64("seed"), tol)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.op_name << " max_rel_err=" << format_double(r.max_relative_error)
        << " scalars=" << r.scalars_checked << " worst=" << r.location << "\n";
    csv << r.op_name << "," << (r.passed ? 1 : 0) << "," << format_double(r.max_relative_error) << ","
        << format_double(r.tolerance) << "," << r.scalars_checked << ",\"" << r.location << "\"\n";
    ok = ok && r.passed;
  }
  if (!s.str("out").empty()) write_text(prepare_run_dir(s) / "metrics.csv", csv.str());
  return ok ? kExitOk : kExitFailure;
}

struct Command {
  std::string name;
  std::string help;
  std::vector<KeySpec> keys;
  std::function<int(const Settings&, std::ostream&)> run;
};

template <typename F32, typename F64>
std::function<int(const Settings&, std::ostream&)> by_precision(F32 f32, F64 f64) {
  return [f32, f64](const Settings& s, std::ostream& out) { return is_f64(s) ? f64(s, out) : f32(s, out); };
}

std::vector<Command> commands() {
  const TrainConfig bt = desk_backbone_training();
  const TrainConfig wt = desk_warper_training();
  const BackboneArch ba = desk_backbone_arch();
  const WarperConfig wc = desk_warper_config();
  const std::vector<KeySpec> out_key{{"out", "", "output directory"}};
  const std::vector<KeySpec> data_key{{"data", "", "dataset directory"}};
  const std::vector<KeySpec> precision_key{{"precision", "f32", "f32 or f64"}};
  const std::vector<KeySpec> warper_keys{
      {"dilations", join_ints(wc.dilations), "warp branch dilations"},
      {"res_blocks", std::to_string(wc.res_blocks), "residual blocks"},
      {"res_width", std::to_string(wc.res_width), "residual block width"},
      {"max_delta", std::to_string(wt.max_delta), "largest time gap of training pairs"},
      {"finetune_backbone", wt.finetune_backbone ? "true" : "false", "update the backbone jointly"}};

  std::vector<Command> cmds;
  cmds.push_back({"gen-data", "generate a synthetic video dataset",
                  concat(out_key, common_specs(),
                         std::vector<KeySpec>{{"videos", "50", "number of videos"},
                                              {"frames", "29", "frames per video"},
                                              {"label_every", "7", "label interval k"},
                                              {"height", "64", "frame height"},
                                              {"width", "64", "frame width"},
                                              {"splits", "0.8,0.1,0.1", "train,val,test fractions"},
                                              {"root_speed_max", "1", "largest root speed, px/frame"},
                                              {"limb_speed_max", "0.08", "largest limb speed, rad/frame"}}),
                  cmd_gen_data});
  cmds.push_back({"train-backbone", "train the heatmap backbone on labelled frames",
                  concat(data_key, out_key, common_specs(), training_specs(bt),
                         std::vector<KeySpec>{{"split", "train", "training split"},
                                              {"width", std::to_string(ba.width), "backbone width"},
                                              {"hidden_layers", std::to_string(ba.hidden_layers), "hidden layers"},
                                              {"backbone_dilations", join_ints(ba.dilations), "per-layer dilations"},
                                              {"pseudo_labels", "", "pseudo_labels.csv from propagate"},
                                              {"pseudo_label_threshold", format_double(bt.pseudo_label_threshold),
                                               "confidence below which pseudo joints are dropped"}}),
                  by_precision(cmd_train_backbone<float>, cmd_train_backbone<double>)});
  cmds.push_back({"train-warper", "train the warping head on frame pairs",
                  concat(data_key, out_key, common_specs(), training_specs(wt), warper_keys,
                         std::vector<KeySpec>{{"split", "train", "training split"},
                                              {"backbone", "", "backbone checkpoint"}}),
                  by_precision(cmd_train_warper<float>, cmd_train_warper<double>)});
  cmds.push_back({"propagate", "propagate labels to neighbouring frames",
                  concat(data_key, out_key, common_specs(), precision_key,
                         std::vector<KeySpec>{{"checkpoint", "", "warper checkpoint"},
                                              {"split", "train", "split to propagate"},
                                              {"radius", "3", "frames on each side"}}),
                  by_precision(cmd_propagate<float>, cmd_propagate<double>)});
  cmds.push_back({"aggregate", "evaluate temporal aggregation on clean and degraded frames",
                  concat(data_key, out_key, common_specs(), precision_key,
                         std::vector<KeySpec>{{"checkpoint", "", "warper checkpoint"},
                                              {"split", "test", "evaluation split"},
                                              {"deltas", "-3,-2,-1,0,1,2,3", "time gaps to aggregate"},
                                              {"degrade", "blur", "blur or occlusion"},
                                              {"magnitude", "1.5", "blur sigma or occluder half-size"},
                                              {"fraction", "0.5", "fraction of frames degraded"}}),
                  by_precision(cmd_aggregate<float>, cmd_aggregate<double>)});
  cmds.push_back({"eval", "propagation PCK of PoseWarper and the baselines",
                  concat(data_key, out_key, common_specs(), precision_key,
                         std::vector<KeySpec>{{"checkpoint", "", "warper checkpoint (optional)"},
                                              {"split", "test", "evaluation split"},
                                              {"radius", "3", "frames on each side"},
                                              {"patch", "9", "block-matching patch size"},
                                              {"search", "6", "block-matching search range"}}),
                  by_precision(cmd_eval<float>, cmd_eval<double>)});
  cmds.push_back({"ablate", "train one head per dilation configuration and seed",
                  concat(data_key, out_key, std::vector<KeySpec>{{"threads", "1", "worker threads"}},
                         training_specs(wt), warper_keys,
                         std::vector<KeySpec>{{"seed", "0", "unused: see seeds"},
                                              {"backbone", "", "backbone checkpoint"},
                                              {"split", "test", "evaluation split"},
                                              {"configs", "1;3;3,6;3,6,12;3,6,12,18;3,6,12,18,24",
                                               "semicolon-separated dilation lists"},
                                              {"seeds", "1,2,3", "training seeds"}}),
                  by_precision(cmd_ablate<float>, cmd_ablate<double>)});
  cmds.push_back({"inspect-offsets", "fit a linear offsets-to-motion probe and export motion fields",
                  concat(data_key, out_key, common_specs(), precision_key,
                         std::vector<KeySpec>{{"checkpoint", "", "warper checkpoint"},
                                              {"fit_split", "val", "split the probe is fitted on"},
                                              {"split", "test", "held-out split"},
                                              {"max_delta", "3", "largest time gap"},
                                              {"frame_stride", "2", "pair start stride"},
                                              {"export_video", "0", "video of the exported pair"},
                                              {"export_frame", "7", "first frame of the exported pair"},
                                              {"export_delta", "2", "time gap of the exported pair"}}),
                  by_precision(cmd_inspect_offsets<float>, cmd_inspect_offsets<double>)});
  cmds.push_back({"grad-check", "run the finite-difference gradient suite",
                  std::vector<KeySpec>{{"out", "", "optional run directory for metrics.csv"},
                                       {"seed", "0", "random seed"},
                                       {"tolerance", "0.0001", "relative tolerance"}},
                  cmd_grad_check});
  return cmds;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"PoseWarp: pose propagation and aggregation on sparsely labelled synthetic videos", "posewarp"};
  app.require_subcommand(1);
  auto cmds = commands();
  std::vector<Settings> settings;
  settings.reserve(cmds.size());
  std::vector<CLI::App*> subs;
  for (auto& c : cmds) {
    settings.emplace_back(c.name, c.keys);
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    settings.back().bind(*sub);
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "posewarp: error kind=usage key=-: " << one_line(e.what()) << "\n";
    err << app.help();
    return kExitUsage;
  }
  for (std::size_t i = 0; i < cmds.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      settings[i].resolve();
      return cmds[i].run(settings[i], out);
    } catch (const ConfigError& e) {
      err << "posewarp: error kind=config key=" << e.key() << ": " << one_line(e.what()) << "\n";
      return kExitConfig;
    } catch (const IoError& e) {
      err << "posewarp: error kind=io key=-: " << one_line(e.what()) << "\n";
      return kExitIo;
    } catch (const std::exception& e) {
      err << "posewarp: error kind=runtime key=-: " << one_line(e.what()) << "\n";
      return kExitFailure;
    }
  }
  return kExitUsage;
}

}  // namespace posewarp
