#include <chrono>
#include <cmath>
#include <string>

#include "splat4d/densify.hpp"
#include "splat4d/metrics.hpp"
#include "splat4d/optim.hpp"

namespace splat4d {

void TrainConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(Errc::kInvalidArgument, what);
  };
  require(iterations >= 0, "iterations must be >= 0");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(loss_lambda >= 0.0 && loss_lambda <= 1.0, "loss_lambda must be in [0, 1]");
  require(densify_until_fraction > 0.0 && densify_until_fraction <= 1.0,
          "densify_until_fraction must be in (0, 1]");
  require(densify_interval >= 1, "densify_interval must be >= 1");
  require(opacity_reset_interval >= 1, "opacity_reset_interval must be >= 1");
  require(split_scale_factor > 1.0, "split_scale_factor must be > 1");
  for (double lr_value : {lr.position_spatial, lr.position_spatial_final, lr.position_temporal,
                          lr.sh, lr.dc_sh, lr.opacity, lr.scales, lr.rotor}) {
    require(lr_value > 0.0, "learning rates must be > 0");
  }
}

RenderOptions TrainConfig::render_options() const {
  RenderOptions opts;
  opts.min_marginal = cull_in_training ? 0.05 : 0.0;
  opts.covariance = ablation_no_4drot ? CovarianceMode::kSpatialOnly : CovarianceMode::kFull4D;
  opts.threads = threads;
  return opts;
}

std::vector<std::size_t> sample_batch(std::span<const std::size_t> frames, int batch_size,
                                      std::mt19937_64& rng) {
  if (frames.empty()) throw Error(Errc::kInvalidArgument, "cannot sample from an empty dataset");
  std::uniform_int_distribution<std::size_t> pick(0, frames.size() - 1);
  std::vector<std::size_t> out(static_cast<std::size_t>(batch_size));
  for (auto& f : out) f = frames[pick(rng)];
  return out;
}

namespace {

void adam_update(float& param, double grad, double& m, double& v, double lr, double c1,
                 double c2, const AdamHyper& h) {
  m = h.beta1 * m + (1.0 - h.beta1) * grad;
  v = h.beta2 * v + (1.0 - h.beta2) * grad * grad;
  const double m_hat = m / c1;
  const double v_hat = v / c2;
  param = static_cast<float>(param - lr * m_hat / (std::sqrt(v_hat) + h.eps));
}

}  // namespace

void adam_step(std::span<float> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamHyper& hyper) {
  if (params.size() != grads.size()) throw Error(Errc::kShapeMismatch, "params/grads size mismatch");
  state.m.resize(params.size(), 0.0);
  state.v.resize(params.size(), 0.0);
  ++state.step;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_update(params[i], grads[i], state.m[i], state.v[i], lr, c1, c2, hyper);
  }
}

SceneOptimizer::SceneOptimizer(const Scene& scene, const TrainConfig& cfg, double spatial_extent)
    : stride_(scene.stride()),
      dc_slots_(static_cast<std::size_t>(scene.sh_config().basis_size())),
      cfg_(cfg),
      extent_(spatial_extent),
      duration_(scene.duration()),
      slot_lr_(scene.stride(), 0.0) {
  state_.m.assign(scene.params().size(), 0.0);
  state_.v.assign(scene.params().size(), 0.0);
  set_iteration(0);
}

void SceneOptimizer::set_iteration(int iteration) {
  const double frac = cfg_.iterations > 0
                          ? std::clamp(static_cast<double>(iteration) / cfg_.iterations, 0.0, 1.0)
                          : 0.0;
  const double spatial =
      std::exp((1.0 - frac) * std::log(cfg_.lr.position_spatial) +
               frac * std::log(cfg_.lr.position_spatial_final)) * extent_;
  for (int k = 0; k < 3; ++k) slot_lr_[Scene::kMean + k] = spatial;
  slot_lr_[Scene::kMean + 3] = cfg_.lr.position_temporal * duration_;
  for (int k = 0; k < 4; ++k) {
    slot_lr_[Scene::kLogScales + k] = cfg_.lr.scales;
    slot_lr_[Scene::kRotorLeft + k] = cfg_.lr.rotor;
    slot_lr_[Scene::kRotorRight + k] = cfg_.lr.rotor;
  }
  slot_lr_[Scene::kOpacity] = cfg_.lr.opacity;
  for (std::size_t k = Scene::kSh; k < stride_; ++k) {
    const bool dc = (k - Scene::kSh) % dc_slots_ == 0;
    slot_lr_[k] = dc ? cfg_.lr.dc_sh : cfg_.lr.sh;
  }
}

void SceneOptimizer::step(Scene& scene, std::span<const double> grads) {
  auto params = scene.params();
  if (params.size() != grads.size() || params.size() != state_.m.size()) {
    throw Error(Errc::kShapeMismatch, "optimizer state does not match scene");
  }
  ++state_.step;
  const AdamHyper hyper;
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state_.step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state_.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    adam_update(params[i], grads[i], state_.m[i], state_.v[i], slot_lr_[i % stride_], c1, c2,
                hyper);
  }
}

void SceneOptimizer::remap(const std::vector<std::int64_t>& origin) {
  std::vector<double> m(origin.size() * stride_, 0.0), v(origin.size() * stride_, 0.0);
  for (std::size_t j = 0; j < origin.size(); ++j) {
    if (origin[j] < 0) continue;
    const std::size_t src = static_cast<std::size_t>(origin[j]) * stride_;
    std::copy_n(state_.m.begin() + src, stride_, m.begin() + j * stride_);
    std::copy_n(state_.v.begin() + src, stride_, v.begin() + j * stride_);
  }
  state_.m = std::move(m);
  state_.v = std::move(v);
}

void SceneOptimizer::reset_opacity_moments() {
  for (std::size_t i = Scene::kOpacity; i < state_.m.size(); i += stride_) {
    state_.m[i] = 0.0;
    state_.v[i] = 0.0;
  }
}

double holdout_psnr(const Scene& scene, const Dataset& dataset, const RenderOptions& opts) {
  const auto& frames = dataset.test_frames.empty() ? dataset.train_frames : dataset.test_frames;
  if (frames.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t f : frames) {
    const RenderOutput out =
        render(scene, dataset.camera_of(f), dataset.frames[f].time, dataset.background, opts);
    total += psnr(out.color, dataset.frames[f].image);
  }
  return total / static_cast<double>(frames.size());
}

TrainResult train(const Dataset& dataset, Scene scene, const TrainConfig& cfg,
                  std::mt19937_64& rng, const TrainCallback& callback) {
  cfg.validate();
  TrainResult result;
  if (cfg.ablation_no_4dsh && scene.sh_config().n_max > 0) {
    ShConfig sh = scene.sh_config();
    sh.n_max = 0;
    scene = scene.with_sh_config(sh);
  }
  if (cfg.iterations == 0) {
    result.scene = std::move(scene);
    return result;
  }
  std::vector<std::size_t> train_frames = dataset.train_frames;
  if (train_frames.empty()) {
    for (std::size_t i = 0; i < dataset.frames.size(); ++i) train_frames.push_back(i);
  }
  if (train_frames.empty()) throw Error(Errc::kInvalidArgument, "dataset has no frames");

  const double extent = dataset.camera_extent();
  const BackwardOptions bopts{cfg.loss_lambda, cfg.render_options()};
  RenderOptions eval_opts = bopts.render;
  eval_opts.min_marginal = 0.05;
  SceneOptimizer optimizer(scene, cfg, extent);
  GradStats stats;
  stats.reset(scene.size());
  const int densify_until = static_cast<int>(cfg.iterations * cfg.densify_until_fraction);
  const int image_width = dataset.camera_of(train_frames.front()).width;
  const auto start = std::chrono::steady_clock::now();
  const double inv_batch = 1.0 / cfg.batch_size;
  std::vector<double> grads;

  for (int it = 1; it <= cfg.iterations; ++it) {
    optimizer.set_iteration(it);
    const auto batch = sample_batch(train_frames, cfg.batch_size, rng);
    grads.assign(scene.params().size(), 0.0);
    LossValue mean_loss{0.0, 0.0, 0.0};
    for (std::size_t f : batch) {
      const DatasetFrame& frame = dataset.frames[f];
      const LossValue lv = backward(scene, dataset.camera(frame.camera), frame.time, frame.image,
                                    dataset.background, bopts, grads, inv_batch, &stats);
      mean_loss.total += lv.total * inv_batch;
      mean_loss.l1 += lv.l1 * inv_batch;
      mean_loss.ssim += lv.ssim * inv_batch;
    }
    optimizer.step(scene, grads);

    if (it < densify_until) {
      if (it >= cfg.densify_from && it % cfg.densify_interval == 0) {
        DensifyContext ctx;
        ctx.scene_extent = extent;
        ctx.image_width = image_width;
        ctx.clone_step_lr = Vec4(optimizer.spatial_position_lr(), optimizer.spatial_position_lr(),
                                 optimizer.spatial_position_lr(), optimizer.temporal_position_lr());
        ctx.mean_grads.resize(scene.size() * 4);
        for (std::size_t i = 0; i < scene.size(); ++i)
          for (int k = 0; k < 4; ++k) ctx.mean_grads[i * 4 + k] = grads[i * scene.stride() + k];
        const DensifyReport report = densify_and_prune(scene, stats, cfg, ctx, rng);
        optimizer.remap(report.origin);
        result.densify.push_back({it, report.cloned, report.split, report.pruned, report.total});
      }
      if (it % cfg.opacity_reset_interval == 0) {
        const float reset = static_cast<float>(logit(0.01));
        for (std::size_t i = 0; i < scene.size(); ++i) scene.record(i)[Scene::kOpacity] = reset;
        optimizer.reset_opacity_moments();
      }
    }

    const bool last = it == cfg.iterations;
    const bool eval_now = cfg.eval_interval > 0 && (last || it % cfg.eval_interval == 0);
    if (last || eval_now || (cfg.log_interval > 0 && it % cfg.log_interval == 0)) {
      MetricsRow row;
      row.iteration = it;
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      row.loss = mean_loss.total;
      row.l1 = mean_loss.l1;
      row.ssim = mean_loss.ssim;
      row.num_gaussians = scene.size();
      if (eval_now) {
        row.psnr_holdout = holdout_psnr(scene, dataset, eval_opts);
      }
      result.metrics.push_back(row);
    }
    if (callback) callback(it, scene);
  }
  result.scene = std::move(scene);
  return result;
}

}  // namespace splat4d
