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

#include "posewarp/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "posewarp/error.hpp"
#include "posewarp/parallel.hpp"
#include "posewarp/text_kv.hpp"

namespace posewarp {

// ---------------------------------------------------------------------------
// Adam

template <typename T>
void adam_step(const std::vector<ParamRef<T>>& params, const std::vector<ConstParamRef<T>>& grads,
               AdamState<T>& state, double lr) {
  POSEWARP_REQUIRE(params.size() == grads.size(), "adam_step: parameter/gradient count mismatch");
  POSEWARP_REQUIRE(params.size() == state.first_moment.size(), "adam_step: optimizer state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = *params[i].tensor;
    const auto& g = *grads[i].tensor;
    if (!p.same_shape(g) || !p.same_shape(state.first_moment[i]) || !p.same_shape(state.second_moment[i])) {
      throw ContractError("adam_step: shape mismatch for " + params[i].name + " " + p.shape_string() + " vs " +
                          g.shape_string());
    }
    if (!g.all_finite()) throw NumericError("adam_step: non-finite gradient in " + params[i].name);
  }

  state.step += 1;
  const double b1 = state.beta1, b2 = state.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].tensor->data();
    auto g = grads[i].tensor->data();
    auto m = state.first_moment[i].data();
    auto v = state.second_moment[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double gk = static_cast<double>(g[k]);
      const double mk = b1 * static_cast<double>(m[k]) + (1.0 - b1) * gk;
      const double vk = b2 * static_cast<double>(v[k]) + (1.0 - b2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      if (lr == 0.0) continue;
      const double update = lr * (mk / c1) / (std::sqrt(vk / c2) + state.epsilon);
      p[k] = static_cast<T>(static_cast<double>(p[k]) - update);
    }
  }
}

// ---------------------------------------------------------------------------
// Configuration

TrainConfig TrainConfig::with_epochs(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.milestones.clear();
  for (int reference : {10, 15}) {
    const int m = std::max(1, static_cast<int>(std::lround(reference * epochs / 20.0)));
    if (m < epochs && (c.milestones.empty() || m > c.milestones.back())) c.milestones.push_back(m);
  }
  return c;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key, key + ": " + why); };
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) fail("base_lr", "must be positive");
  if (epochs < 1) fail("epochs", "must be >= 1");
  for (std::size_t i = 0; i < milestones.size(); ++i) {
    if (milestones[i] < 1) fail("milestones", "must be >= 1");
    if (i > 0 && milestones[i] <= milestones[i - 1]) fail("milestones", "must be strictly increasing");
  }
  if (batch_size < 1) fail("batch_size", "must be >= 1");
  if (max_delta < 0) fail("max_delta", "must be >= 0");
  if (dilations.empty()) fail("dilations", "must not be empty");
  for (std::size_t i = 0; i < dilations.size(); ++i) {
    if (dilations[i] < 1) fail("dilations", "must be >= 1");
    if (i > 0 && dilations[i] <= dilations[i - 1]) fail("dilations", "must be strictly increasing");
  }
  if (!(sigma > 0.0)) fail("sigma", "must be positive");
  if (augment.rotation_degrees < 0.0 || augment.rotation_degrees > 180.0) fail("rotation_degrees", "must be in [0, 180]");
  if (!(augment.scale_min > 0.0)) fail("scale_min", "must be positive");
  if (augment.scale_max < augment.scale_min) fail("scale_max", "must be >= scale_min");
  if (augment.flip_probability < 0.0 || augment.flip_probability > 1.0) fail("flip_probability", "must be in [0, 1]");
  if (precision != "f32" && precision != "f64") fail("precision", "must be f32 or f64");
  if (pseudo_label_threshold < 0.0 || pseudo_label_threshold > 1.0) fail("pseudo_label_threshold", "must be in [0, 1]");
  if (threads < 1) fail("threads", "must be >= 1");
  if (validate_every < 0) fail("validate_every", "must be >= 0");
}

std::string TrainConfig::to_text() const {
  std::ostringstream os;
  os << "base_lr=" << format_double(base_lr) << "\n"
     << "milestones=" << join_ints(milestones) << "\n"
     << "epochs=" << epochs << "\n"
     << "batch_size=" << batch_size << "\n"
     << "max_delta=" << max_delta << "\n"
     << "dilations=" << join_ints(dilations) << "\n"
     << "sigma=" << format_double(sigma) << "\n"
     << "augment=" << (augment.enabled ? "true" : "false") << "\n"
     << "rotation_degrees=" << format_double(augment.rotation_degrees) << "\n"
     << "scale_min=" << format_double(augment.scale_min) << "\n"
     << "scale_max=" << format_double(augment.scale_max) << "\n"
     << "flip_probability=" << format_double(augment.flip_probability) << "\n"
     << "seed=" << seed << "\n"
     << "precision=" << precision << "\n"
     << "finetune_backbone=" << (finetune_backbone ? "true" : "false") << "\n"
     << "pseudo_label_threshold=" << format_double(pseudo_label_threshold) << "\n"
     << "threads=" << threads << "\n"
     << "validate_every=" << validate_every << "\n";
  return os.str();
}

TrainConfig TrainConfig::from_kv(const std::vector<std::pair<std::string, std::string>>& kv, TrainConfig base) {
  TrainConfig c = std::move(base);
  bool milestones_given = false;
  bool epochs_given = false;
  for (const auto& [key, value] : kv) {
    if (key == "base_lr") {
      c.base_lr = parse_double(key, value);
    } else if (key == "milestones") {
      c.milestones = value.empty() ? std::vector<int>{} : parse_int_list(key, value);
      milestones_given = true;
    } else if (key == "epochs") {
      c.epochs = parse_int(key, value);
      epochs_given = true;
    } else if (key == "batch_size") {
      c.batch_size = parse_int(key, value);
    } else if (key == "max_delta") {
      c.max_delta = parse_int(key, value);
    } else if (key == "dilations") {
      c.dilations = parse_int_list(key, value);
    } else if (key == "sigma") {
      c.sigma = parse_double(key, value);
    } else if (key == "augment") {
      c.augment.enabled = parse_bool(key, value);
    } else if (key == "rotation_degrees") {
      c.augment.rotation_degrees = parse_double(key, value);
    } else if (key == "scale_min") {
      c.augment.scale_min = parse_double(key, value);
    } else if (key == "scale_max") {
      c.augment.scale_max = parse_double(key, value);
    } else if (key == "flip_probability") {
      c.augment.flip_probability = parse_double(key, value);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(parse_int64(key, value));
    } else if (key == "precision") {
      c.precision = value;
    } else if (key == "finetune_backbone") {
      c.finetune_backbone = parse_bool(key, value);
    } else if (key == "pseudo_label_threshold") {
      c.pseudo_label_threshold = parse_double(key, value);
    } else if (key == "threads") {
      c.threads = parse_int(key, value);
    } else if (key == "validate_every") {
      c.validate_every = parse_int(key, value);
    } else {
      throw ConfigError(key, "unknown training key: " + key);
    }
  }
  if (epochs_given && !milestones_given && c.epochs >= 1) c.milestones = with_epochs(c.epochs).milestones;
  c.validate();
  return c;
}

double lr_schedule(int epoch, const TrainConfig& config) {
  POSEWARP_REQUIRE(epoch >= 0, "lr_schedule: epoch must be >= 0");
  double lr = config.base_lr;
  for (int m : config.milestones) {
    if (epoch >= m) lr /= 10.0;
  }
  return lr;
}

// ---------------------------------------------------------------------------
// Augmentation

AugmentTransform sample_transform(const AugmentConfig& config, Rng& rng) {
  AugmentTransform t;
  if (!config.enabled) return t;
  const double deg = rng.uniform(-config.rotation_degrees, config.rotation_degrees);
  t.angle = deg * std::numbers::pi / 180.0;
  t.scale = rng.uniform(config.scale_min, config.scale_max);
  t.flip = rng.bernoulli(config.flip_probability);
  return t;
}

namespace {

struct Similarity {
  double cx, cy, c, s, scale;
  bool flip;

  Similarity(const AugmentTransform& t, int height, int width)
      : cx((width - 1) / 2.0),
        cy((height - 1) / 2.0),
        c(std::cos(t.angle)),
        s(std::sin(t.angle)),
        scale(t.scale),
        flip(t.flip) {}

  void forward(double x, double y, double& ox, double& oy) const {
    double dx = x - cx, dy = y - cy;
    if (flip) dx = -dx;
    ox = cx + scale * (c * dx - s * dy);
    oy = cy + scale * (s * dx + c * dy);
  }

  void inverse(double x, double y, double& ox, double& oy) const {
    const double dx = (x - cx) / scale, dy = (y - cy) / scale;
    double rx = c * dx + s * dy;
    const double ry = -s * dx + c * dy;
    if (flip) rx = -rx;
    ox = cx + rx;
    oy = cy + ry;
  }
};

template <typename T>
T sample_zero_fill(const T* plane, int height, int width, double y, double x) {
  const double fy = std::floor(y), fx = std::floor(x);
  const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
  const double wy = y - fy, wx = x - fx;
  auto at = [&](int yy, int xx) -> double {
    if (yy < 0 || yy >= height || xx < 0 || xx >= width) return 0.0;
    return static_cast<double>(plane[static_cast<std::size_t>(yy) * width + xx]);
  };
  const double v = (1 - wy) * ((1 - wx) * at(y0, x0) + wx * at(y0, x0 + 1)) +
                   wy * ((1 - wx) * at(y0 + 1, x0) + wx * at(y0 + 1, x0 + 1));
  return static_cast<T>(v);
}

}  // namespace

template <typename T>
std::pair<Tensor<T>, Pose> apply_transform(const Tensor<T>& frame, const Pose& pose, const AugmentTransform& transform,
                                           const std::vector<int>& mirror) {
  POSEWARP_REQUIRE(frame.rank() == 3, "augment: frame must be [C, H, W]");
  POSEWARP_REQUIRE(transform.scale > 0.0 && std::isfinite(transform.scale), "augment: scale must be positive");
  if (transform.flip) {
    POSEWARP_REQUIRE(static_cast<int>(mirror.size()) == pose.size(), "augment: mirror table does not match pose");
  }
  if (transform.is_identity()) return {frame, pose};

  const int channels = frame.dim(0), height = frame.dim(1), width = frame.dim(2);
  const Similarity sim(transform, height, width);
  Tensor<T> out({channels, height, width});
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double sx, sy;
      sim.inverse(x, y, sx, sy);
      for (int ch = 0; ch < channels; ++ch) {
        out(ch, y, x) = sample_zero_fill(frame.channel(ch).data(), height, width, sy, sx);
      }
    }
  }

  Pose moved(pose.size());
  for (int j = 0; j < pose.size(); ++j) {
    const Joint& src = pose.joints[static_cast<std::size_t>(j)];
    Joint dst = src;
    sim.forward(src.x, src.y, dst.x, dst.y);
    if (dst.x < 0.0 || dst.x > width - 1 || dst.y < 0.0 || dst.y > height - 1) dst.visible = false;
    const int slot = transform.flip ? mirror[static_cast<std::size_t>(j)] : j;
    moved.joints[static_cast<std::size_t>(slot)] = dst;
  }
  return {std::move(out), std::move(moved)};
}

template <typename T>
std::pair<Tensor<T>, Pose> augment(const Tensor<T>& frame, const Pose& pose, const AugmentConfig& config,
                                   std::uint64_t seed, const std::vector<int>& mirror) {
  Rng rng(seed);
  return apply_transform(frame, pose, sample_transform(config, rng), mirror);
}

// ---------------------------------------------------------------------------
// Training loops

namespace {

template <typename Params>
void average_in_order(std::vector<Params>& per_item, Params& out) {
  out = zeros_like(per_item.front());
  for (const auto& g : per_item) accumulate(out, g, typename Params::value_type(1));
  const auto scale = static_cast<typename Params::value_type>(1.0 / static_cast<double>(per_item.size()));
  for (auto& p : named_tensors(out)) *p.tensor *= scale;
}

template <typename Params>
void apply_adam(Params& params, const Params& grads, AdamState<typename Params::value_type>& state, double lr) {
  auto p = named_tensors(params);
  auto g = named_tensors(grads);
  adam_step(p, g, state, lr);
  params.revision += 1;
}

void check_loss(double loss, const char* stage, int epoch, long step) {
  if (!std::isfinite(loss)) {
    throw NumericError(std::string(stage) + ": non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                       std::to_string(step));
  }
}

bool should_validate(const TrainConfig& config, int epoch) {
  if (epoch == config.epochs - 1) return true;
  return config.validate_every > 0 && (epoch + 1) % config.validate_every == 0;
}

struct LabeledFrame {
  int video;
  int frame;
};

const std::vector<int>& mirror_table() {
  static const std::vector<int> mirror = SkeletonSpec::default_human().mirror;
  return mirror;
}

const std::vector<int>& mirror_for(int joints) {
  const auto& m = mirror_table();
  if (static_cast<int>(m.size()) == joints) return m;
  static thread_local std::vector<int> identity;
  identity.resize(static_cast<std::size_t>(joints));
  for (int j = 0; j < joints; ++j) identity[static_cast<std::size_t>(j)] = j;
  return identity;
}

}  // namespace

template <typename T>
BackboneTrainResult<T> train_backbone(const std::vector<VideoSample>& videos, const BackboneArch& arch,
                                      const TrainConfig& config, const BackboneValidator<T>& validator,
                                      const BackboneParams<T>* init) {
  config.validate();
  arch.validate();
  std::vector<LabeledFrame> items;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    for (int t : videos[v].labeled_indices()) items.push_back({static_cast<int>(v), t});
  }
  POSEWARP_REQUIRE(!items.empty(), "train_backbone: dataset has no labelled frame");

  BackboneTrainResult<T> result;
  result.params = init ? *init : BackboneParams<T>::he_initialized(arch, derive_seed(config.seed, "backbone_init"));
  result.params.revision = 0;
  POSEWARP_REQUIRE(result.params.arch == arch, "train_backbone: initial parameters do not match the architecture");
  auto state = AdamState<T>::for_params(result.params);
  const auto& mirror = mirror_for(arch.joints);

  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    std::vector<int> order(items.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    Rng shuffle_rng(derive_seed(config.seed, {fnv1a("backbone_order"), static_cast<std::uint64_t>(epoch)}));
    shuffle_rng.shuffle(order);

    double loss_sum = 0.0;
    {
      GroundTruthGuard guard;
      for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
        const int count = static_cast<int>(std::min<std::size_t>(config.batch_size, order.size() - start));
        std::vector<BackboneParams<T>> grads(static_cast<std::size_t>(count));
        std::vector<double> losses(static_cast<std::size_t>(count), 0.0);
        parallel_for(count, config.threads, [&](int b) {
          const auto& item = items[static_cast<std::size_t>(order[start + static_cast<std::size_t>(b)])];
          const VideoSample& video = videos[static_cast<std::size_t>(item.video)];
          const std::uint64_t seed = derive_seed(
              config.seed, {fnv1a("backbone_augment"), static_cast<std::uint64_t>(epoch),
                            static_cast<std::uint64_t>(start) + static_cast<std::uint64_t>(b)});
          auto [frame, pose] =
              augment(video.frame(item.frame).template cast<T>(), video.training_label(item.frame), config.augment,
                      seed, mirror);
          auto target = render_gaussian<T>(pose, config.sigma, frame.dim(1), frame.dim(2));
          auto [pred, cache] = backbone_forward(frame, result.params);
          auto mse = mse_loss(pred, target, pose.visibility());
          losses[static_cast<std::size_t>(b)] = mse.loss;
          grads[static_cast<std::size_t>(b)] = backbone_backward(cache, result.params, mse.grad, false).params;
        });
        BackboneParams<T> mean_grad;
        average_in_order(grads, mean_grad);
        double batch_loss = 0.0;
        for (double l : losses) batch_loss += l;
        check_loss(batch_loss, "train_backbone", epoch, step);
        loss_sum += batch_loss;
        apply_adam(result.params, mean_grad, state, lr);
        ++step;
      }
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.lr = lr;
    m.train_loss = loss_sum / static_cast<double>(items.size());
    if (validator && should_validate(config, epoch)) m.val_pck = validator(result.params);
    result.history.push_back(m);
  }
  return result;
}

std::vector<FramePair> sample_pairs(const std::vector<VideoSample>& videos, int max_delta, Rng& rng) {
  std::vector<FramePair> pairs;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    const int n = videos[v].num_frames();
    for (int t : videos[v].manual_indices()) {
      const int delta = rng.uniform_int(-max_delta, max_delta);
      pairs.push_back({static_cast<int>(v), t, std::clamp(t + delta, 0, n - 1)});
    }
  }
  return pairs;
}

namespace {

/// Backbone heatmaps of every frame, for frozen-backbone runs without
/// augmentation.
template <typename T>
std::vector<std::vector<Heatmap<T>>> precompute_heatmaps(const std::vector<VideoSample>& videos,
                                                          const BackboneParams<T>& backbone, int threads) {
  std::vector<std::vector<Heatmap<T>>> out(videos.size());
  for (std::size_t v = 0; v < videos.size(); ++v) out[v].resize(static_cast<std::size_t>(videos[v].num_frames()));
  std::vector<std::pair<int, int>> jobs;
  for (std::size_t v = 0; v < videos.size(); ++v) {
    for (int t = 0; t < videos[v].num_frames(); ++t) jobs.emplace_back(static_cast<int>(v), t);
  }
  parallel_for(static_cast<int>(jobs.size()), threads, [&](int i) {
    const auto [v, t] = jobs[static_cast<std::size_t>(i)];
    out[static_cast<std::size_t>(v)][static_cast<std::size_t>(t)] =
        backbone_predict(videos[static_cast<std::size_t>(v)].frame(t).template cast<T>(), backbone);
  });
  return out;
}

template <typename T>
struct PairGrads {
  WarperParams<T> warper;
  BackboneParams<T> backbone;
  double loss = 0.0;
};

}  // namespace

template <typename T>
WarperTrainResult<T> train_warper(const std::vector<VideoSample>& videos, const BackboneParams<T>& backbone,
                                  const WarperConfig& warper_config, const TrainConfig& config,
                                  const WarperValidator<T>& validator, const WarperParams<T>* init) {
  config.validate();
  warper_config.validate();
  backbone.validate();
  POSEWARP_REQUIRE(warper_config.joints == backbone.arch.joints, "train_warper: joint count mismatch");
  bool any_label = false;
  for (const auto& v : videos) any_label = any_label || !v.manual_indices().empty();
  POSEWARP_REQUIRE(any_label, "train_warper: dataset has no manually labelled frame");

  WarperTrainResult<T> result;
  result.backbone = backbone;
  result.backbone.revision = 0;
  result.warper = init ? *init
                       : WarperParams<T>::identity_initialized(warper_config, derive_seed(config.seed, "warper_init"));
  result.warper.revision = 0;
  POSEWARP_REQUIRE(result.warper.config == warper_config, "train_warper: initial head does not match its config");

  auto warper_state = AdamState<T>::for_params(result.warper);
  auto backbone_state = AdamState<T>::for_params(result.backbone);
  const bool finetune = config.finetune_backbone;
  const bool cache_heatmaps = !finetune && !config.augment.enabled;
  std::vector<std::vector<Heatmap<T>>> cached;
  if (cache_heatmaps) cached = precompute_heatmaps(videos, result.backbone, config.threads);
  const auto& mirror = mirror_for(warper_config.joints);

  long step = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, config);
    Rng pair_rng(derive_seed(config.seed, {fnv1a("warper_pairs"), static_cast<std::uint64_t>(epoch)}));
    std::vector<FramePair> pairs = sample_pairs(videos, config.max_delta, pair_rng);
    pair_rng.shuffle(pairs);
    if (epoch == 0) {
      GroundTruthGuard guard;
      if (cache_heatmaps) {
        double sum = 0.0;
        for (const auto& p : pairs) {
          const auto& fa = cached[static_cast<std::size_t>(p.video)][static_cast<std::size_t>(p.labeled)];
          const auto& fb = cached[static_cast<std::size_t>(p.video)][static_cast<std::size_t>(p.source)];
          const Pose& y = videos[static_cast<std::size_t>(p.video)].training_label(p.labeled);
          auto [out, cache] = warp_heatmap(fb, compute_difference(fa, fb), result.warper);
          sum += mse_loss(out.warped, render_gaussian<T>(y, config.sigma, fa.dim(1), fa.dim(2)), y.visibility()).loss;
        }
        result.initial_loss = sum / static_cast<double>(pairs.size());
      } else {
        result.initial_loss = mean_pair_loss(videos, pairs, result.backbone, result.warper, config.sigma);
      }
    }

    double loss_sum = 0.0;
    {
      GroundTruthGuard guard;
      for (std::size_t start = 0; start < pairs.size(); start += static_cast<std::size_t>(config.batch_size)) {
        const int count = static_cast<int>(std::min<std::size_t>(config.batch_size, pairs.size() - start));
        std::vector<PairGrads<T>> grads(static_cast<std::size_t>(count));
        parallel_for(count, config.threads, [&](int b) {
          const FramePair& pair = pairs[start + static_cast<std::size_t>(b)];
          const VideoSample& video = videos[static_cast<std::size_t>(pair.video)];
          PairGrads<T>& g = grads[static_cast<std::size_t>(b)];

          Heatmap<T> fa, fb;
          BackboneCache<T> cache_a, cache_b;
          Pose label;
          if (cache_heatmaps) {
            fa = cached[static_cast<std::size_t>(pair.video)][static_cast<std::size_t>(pair.labeled)];
            fb = cached[static_cast<std::size_t>(pair.video)][static_cast<std::size_t>(pair.source)];
            label = video.training_label(pair.labeled);
          } else {
            Rng rng(derive_seed(config.seed, {fnv1a("warper_augment"), static_cast<std::uint64_t>(epoch),
                                              static_cast<std::uint64_t>(start) + static_cast<std::uint64_t>(b)}));
            const AugmentTransform tf = sample_transform(config.augment, rng);
            auto [frame_a, pose_a] =
                apply_transform(video.frame(pair.labeled).template cast<T>(), video.training_label(pair.labeled), tf,
                                mirror);
            auto frame_b = apply_transform(video.frame(pair.source).template cast<T>(), Pose(pose_a.size()), tf,
                                           mirror)
                               .first;
            label = std::move(pose_a);
            if (finetune) {
              std::tie(fa, cache_a) = backbone_forward(frame_a, result.backbone);
              std::tie(fb, cache_b) = backbone_forward(frame_b, result.backbone);
            } else {
              fa = backbone_predict(frame_a, result.backbone);
              fb = backbone_predict(frame_b, result.backbone);
            }
          }

          const auto target = render_gaussian<T>(label, config.sigma, fa.dim(1), fa.dim(2));
          auto [out, wcache] = warp_heatmap(fb, compute_difference(fa, fb), result.warper);
          auto mse = mse_loss(out.warped, target, label.visibility());
          g.loss = mse.loss;
          auto wg = warper_backward(wcache, result.warper, mse.grad);
          g.warper = std::move(wg.params);
          if (finetune) {
            // psi = f_a - f_b, and f_b also feeds the deformable sampling.
            Tensor<T> grad_fb = wg.grad_f_source;
            grad_fb -= wg.grad_psi;
            g.backbone = backbone_backward(cache_a, result.backbone, wg.grad_psi, false).params;
            accumulate(g.backbone, backbone_backward(cache_b, result.backbone, grad_fb, false).params, T(1));
          }
        });

        std::vector<WarperParams<T>> wgrads;
        std::vector<BackboneParams<T>> bgrads;
        double batch_loss = 0.0;
        for (auto& g : grads) {
          batch_loss += g.loss;
          wgrads.push_back(std::move(g.warper));
          if (finetune) bgrads.push_back(std::move(g.backbone));
        }
        check_loss(batch_loss, "train_warper", epoch, step);
        loss_sum += batch_loss;

        WarperParams<T> wmean;
        average_in_order(wgrads, wmean);
        apply_adam(result.warper, wmean, warper_state, lr);
        if (finetune) {
          BackboneParams<T> bmean;
          average_in_order(bgrads, bmean);
          apply_adam(result.backbone, bmean, backbone_state, lr);
        }
        ++step;
      }
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.lr = lr;
    m.train_loss = loss_sum / static_cast<double>(pairs.size());
    if (validator && should_validate(config, epoch)) m.val_pck = validator(result.backbone, result.warper);
    result.history.push_back(m);
  }
  return result;
}

template <typename T>
double mean_pair_loss(const std::vector<VideoSample>& videos, const std::vector<FramePair>& pairs,
                      const BackboneParams<T>& backbone, const WarperParams<T>& warper, double sigma) {
  POSEWARP_REQUIRE(!pairs.empty(), "mean_pair_loss: no pairs");
  double sum = 0.0;
  for (const auto& p : pairs) {
    const auto& video = videos.at(static_cast<std::size_t>(p.video));
    const Pose& y = video.training_label(p.labeled);
    const auto fa = backbone_predict(video.frame(p.labeled).template cast<T>(), backbone);
    const auto fb = backbone_predict(video.frame(p.source).template cast<T>(), backbone);
    auto [out, cache] = warp_heatmap(fb, compute_difference(fa, fb), warper);
    sum += mse_loss(out.warped, render_gaussian<T>(y, sigma, fa.dim(1), fa.dim(2)), y.visibility()).loss;
  }
  return sum / static_cast<double>(pairs.size());
}

template <typename T>
double mean_copy_loss(const std::vector<VideoSample>& videos, const std::vector<FramePair>& pairs,
                      const BackboneParams<T>& backbone, double sigma) {
  POSEWARP_REQUIRE(!pairs.empty(), "mean_copy_loss: no pairs");
  double sum = 0.0;
  for (const auto& p : pairs) {
    const auto& video = videos.at(static_cast<std::size_t>(p.video));
    const Pose& y = video.training_label(p.labeled);
    const auto fb = backbone_predict(video.frame(p.source).template cast<T>(), backbone);
    sum += mse_loss(fb, render_gaussian<T>(y, sigma, fb.dim(1), fb.dim(2)), y.visibility()).loss;
  }
  return sum / static_cast<double>(pairs.size());
}

// ---------------------------------------------------------------------------
// Pseudo labels

std::vector<VideoSample> merge_pseudo_labels(std::vector<VideoSample> dataset,
                                             const std::vector<PropagatedPose>& propagated,
                                             double confidence_threshold) {
  for (const auto& p : propagated) {
    POSEWARP_REQUIRE(p.video >= 0 && p.video < static_cast<int>(dataset.size()),
                     "merge_pseudo_labels: video index out of range");
    VideoSample& video = dataset[static_cast<std::size_t>(p.video)];
    POSEWARP_REQUIRE(p.frame >= 0 && p.frame < video.num_frames(), "merge_pseudo_labels: frame index out of range");
    if (video.label_source(p.frame) != LabelSource::kNone) continue;
    Pose pose = p.pose;
    for (auto& j : pose.joints) {
      if (j.confidence < confidence_threshold) j.visible = false;
    }
    video.set_pseudo_label(p.frame, std::move(pose));
  }
  return dataset;
}

// ---------------------------------------------------------------------------
// Instantiations

#define POSEWARP_INSTANTIATE_TRAINING(T)                                                                             \
  template void adam_step<T>(const std::vector<ParamRef<T>>&, const std::vector<ConstParamRef<T>>&, AdamState<T>&,  \
                             double);                                                                                \
  template std::pair<Tensor<T>, Pose> apply_transform<T>(const Tensor<T>&, const Pose&, const AugmentTransform&,     \
                                                         const std::vector<int>&);                                   \
  template std::pair<Tensor<T>, Pose> augment<T>(const Tensor<T>&, const Pose&, const AugmentConfig&, std::uint64_t, \
                                                 const std::vector<int>&);                                           \
  template BackboneTrainResult<T> train_backbone<T>(const std::vector<VideoSample>&, const BackboneArch&,            \
                                                    const TrainConfig&, const BackboneValidator<T>&,                 \
                                                    const BackboneParams<T>*);                                       \
  template WarperTrainResult<T> train_warper<T>(const std::vector<VideoSample>&, const BackboneParams<T>&,           \
                                                const WarperConfig&, const TrainConfig&, const WarperValidator<T>&,  \
                                                const WarperParams<T>*);                                             \
  template double mean_pair_loss<T>(const std::vector<VideoSample>&, const std::vector<FramePair>&,                  \
                                    const BackboneParams<T>&, const WarperParams<T>&, double);                       \
  template double mean_copy_loss<T>(const std::vector<VideoSample>&, const std::vector<FramePair>&,                  \
                                    const BackboneParams<T>&, double);

POSEWARP_INSTANTIATE_TRAINING(float)
POSEWARP_INSTANTIATE_TRAINING(double)

#undef POSEWARP_INSTANTIATE_TRAINING

}  // namespace posewarp
