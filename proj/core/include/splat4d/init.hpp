#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "splat4d/ply.hpp"
#include "splat4d/scene.hpp"

namespace splat4d {

enum class TimeInitMode { kUniform, kMidpoint };

struct InitConfig {
  ShConfig sh;  // period <= 0 means "use the scene duration"
  TimeInitMode time_mode = TimeInitMode::kUniform;
  double opacity = 0.1;
  int knn = 3;
  /// Spatial scale used when a point has no neighbours.
  double fallback_scale = 0.01;
};

/// Mean distance from each point to its k nearest neighbours (fewer when the
/// cloud has fewer than k + 1 points; 0 when it has one point).
std::vector<double> knn_mean_distance(const std::vector<Vec3>& points, int k);

/// One Gaussian per point (randomly subsampled to `count_target` when that is
/// non-zero and smaller than the cloud): identity rotors, time scale
/// duration / 2, opacity `cfg.opacity`, DC color from the point color.
Scene init_from_points(const std::vector<ColoredPoint>& points, double duration,
                       std::size_t count_target, const InitConfig& cfg, std::mt19937_64& rng);

/// `count` gray points uniform in [-half_extent, half_extent]^3.
Scene init_random_cube(std::size_t count, double half_extent, double duration,
                       const InitConfig& cfg, std::mt19937_64& rng);

/// Appends `count` gray points uniform on the sphere of `radius`.
void init_sphere_shell(Scene& scene, std::size_t count, double radius, const InitConfig& cfg,
                       std::mt19937_64& rng);

}  // namespace splat4d
