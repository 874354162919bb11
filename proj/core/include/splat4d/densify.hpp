#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "splat4d/optim.hpp"
#include "splat4d/scene.hpp"

namespace splat4d {

/// Draws one sample from the full 4D Gaussian (all coordinates jointly).
Vec4 sample_gaussian4d(const Vec4& mean, const Mat4& cov, std::mt19937_64& rng);

struct SplitOptions {
  double scale_factor = 1.6;
  bool no_time_split = false;
  CovarianceMode covariance = CovarianceMode::kFull4D;
};

/// Two children whose means are independent draws from g's 4D density; all
/// four log-scales shrink by log(scale_factor); rotor, opacity, and SH are
/// copied. With no_time_split the children keep g's mu_t.
std::array<Gaussian4D, 2> split_gaussian(const Gaussian4D& g, std::mt19937_64& rng,
                                         const SplitOptions& opts = {});

/// Exact copy with the mean moved by -step.
Gaussian4D clone_gaussian(const Gaussian4D& g, const Vec4& step);

struct DensifyContext {
  double scene_extent = 1.0;
  int image_width = 1;
  /// Per-axis optimizer step applied to clone offsets (spatial x3, temporal).
  Vec4 clone_step_lr = Vec4::Zero();
  /// Mean parameter gradient per Gaussian (layout of Scene::kMean, 4 per
  /// Gaussian) used for clone offsets; empty means no offset.
  std::vector<double> mean_grads;
};

struct DensifyReport {
  std::size_t cloned = 0;
  std::size_t split = 0;
  std::size_t pruned = 0;
  std::size_t before = 0;
  std::size_t total = 0;
  /// origin[i] = index before the pass for surviving Gaussians, -1 for new.
  std::vector<std::int64_t> origin;
};

/// Clone/split Gaussians whose mean view-space gradient or mean |dL/dmu_t|
/// crosses its threshold, then prune transparent, oversized, or
/// screen-filling ones. Resets `stats` to the new scene size.
DensifyReport densify_and_prune(Scene& scene, GradStats& stats, const TrainConfig& cfg,
                                const DensifyContext& ctx, std::mt19937_64& rng);

/// Pruning only (used by the same pass when no Gaussian crosses a threshold).
DensifyReport prune(Scene& scene, GradStats& stats, const TrainConfig& cfg,
                    const DensifyContext& ctx);

}  // namespace splat4d
