#include "splat4d/densify.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace splat4d {

Vec4 sample_gaussian4d(const Vec4& mean, const Mat4& cov, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec4 z;
  for (int k = 0; k < 4; ++k) z[k] = normal(rng);
  Eigen::LLT<Mat4> llt(cov);
  if (llt.info() == Eigen::Success) return mean + llt.matrixL() * z;
  Eigen::SelfAdjointEigenSolver<Mat4> eig(cov);
  const Vec4 root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return mean + eig.eigenvectors() * root.asDiagonal() * z;
}

std::array<Gaussian4D, 2> split_gaussian(const Gaussian4D& g, std::mt19937_64& rng,
                                         const SplitOptions& opts) {
  const Mat4 cov = build_covariance(g, opts.covariance);
  std::array<Gaussian4D, 2> out{g, g};
  const double shrink = std::log(opts.scale_factor);
  for (Gaussian4D& child : out) {
    child.mean = sample_gaussian4d(g.mean, cov, rng);
    if (opts.no_time_split) child.mean[3] = g.mean[3];
    child.scales.log.array() -= shrink;
  }
  return out;
}

Gaussian4D clone_gaussian(const Gaussian4D& g, const Vec4& step) {
  Gaussian4D out = g;
  out.mean -= step;
  return out;
}

namespace {

bool should_prune(const Scene& scene, std::size_t i, const GradStats& stats,
                  const TrainConfig& cfg, const DensifyContext& ctx) {
  const auto r = scene.record(i);
  if (sigmoid(r[Scene::kOpacity]) < cfg.opacity_prune_threshold) return true;
  double max_scale = 0.0;
  for (int k = 0; k < 3; ++k) {
    max_scale = std::max(max_scale, std::exp(static_cast<double>(r[Scene::kLogScales + k])));
  }
  if (max_scale > cfg.max_scale_fraction * ctx.scene_extent) return true;
  if (i < stats.size() && 2.0 * stats.max_radius[i] > cfg.max_screen_fraction * ctx.image_width) {
    return true;
  }
  return false;
}

}  // namespace

DensifyReport prune(Scene& scene, GradStats& stats, const TrainConfig& cfg,
                    const DensifyContext& ctx) {
  DensifyReport report;
  report.before = scene.size();
  std::vector<bool> keep(scene.size(), true);
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (should_prune(scene, i, stats, cfg, ctx)) {
      keep[i] = false;
      ++report.pruned;
    }
  }
  scene.keep(keep);
  for (std::size_t i = 0; i < keep.size(); ++i)
    if (keep[i]) report.origin.push_back(static_cast<std::int64_t>(i));
  report.total = scene.size();
  stats.reset(scene.size());
  return report;
}

DensifyReport densify_and_prune(Scene& scene, GradStats& stats, const TrainConfig& cfg,
                                const DensifyContext& ctx, std::mt19937_64& rng) {
  const std::size_t n = scene.size();
  DensifyReport report;
  report.before = n;
  const double temporal_threshold = cfg.grad_threshold_temporal * scene.duration();
  const SplitOptions split_opts{cfg.split_scale_factor, cfg.ablation_no_time_split,
                                cfg.ablation_no_4drot ? CovarianceMode::kSpatialOnly
                                                      : CovarianceMode::kFull4D};

  Scene next(scene.sh_config(), scene.duration());
  next.reserve(n + n / 4);
  std::vector<std::int64_t> origin;
  // Survivors first (with their original optimizer state), new Gaussians after.
  std::vector<Gaussian4D> spawned;
  std::vector<bool> was_split(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const double cnt = i < stats.size() ? stats.count[i] : 0.0;
    if (cnt <= 0.0) continue;
    const double view = stats.view_grad_sum[i] / cnt;
    const double time = stats.time_grad_sum[i] / cnt;
    if (view < cfg.grad_threshold_spatial && time < temporal_threshold) continue;

    const Gaussian4D g = scene.gaussian(i);
    const double max_spatial = g.scales.activated().head<3>().maxCoeff();
    if (max_spatial <= cfg.percent_dense * ctx.scene_extent) {
      Vec4 step = Vec4::Zero();
      if (!ctx.mean_grads.empty()) {
        for (int k = 0; k < 4; ++k) step[k] = ctx.clone_step_lr[k] * ctx.mean_grads[i * 4 + k];
      }
      spawned.push_back(clone_gaussian(g, step));
      ++report.cloned;
    } else {
      const auto children = split_gaussian(g, rng, split_opts);
      spawned.push_back(children[0]);
      spawned.push_back(children[1]);
      was_split[i] = true;
      ++report.split;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (was_split[i]) continue;
    next.append_record(scene.record(i));
    origin.push_back(static_cast<std::int64_t>(i));
  }
  for (const Gaussian4D& g : spawned) {
    next.push_back(g);
    origin.push_back(-1);
  }

  // Max screen radius carries over to survivors only.
  GradStats carried;
  carried.reset(next.size());
  for (std::size_t j = 0; j < origin.size(); ++j) {
    if (origin[j] >= 0 && static_cast<std::size_t>(origin[j]) < stats.size()) {
      carried.max_radius[j] = stats.max_radius[origin[j]];
    }
  }
  scene = std::move(next);

  DensifyReport pruned = prune(scene, carried, cfg, ctx);
  report.pruned = pruned.pruned;
  report.origin.reserve(pruned.origin.size());
  for (std::int64_t k : pruned.origin) report.origin.push_back(origin[k]);
  report.total = scene.size();
  stats.reset(scene.size());
  return report;
}

}  // namespace splat4d
