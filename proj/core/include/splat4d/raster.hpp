#pragma once

#include <cstddef>
#include <vector>

#include "splat4d/camera.hpp"
#include "splat4d/geom4d.hpp"
#include "splat4d/scene.hpp"

namespace splat4d {

inline constexpr int kTileSize = 16;

struct RenderOptions {
  /// Gaussians whose unnormalized temporal marginal falls below this are culled.
  double min_marginal = 0.05;
  /// Per-splat compositing weight ceiling.
  double max_weight = 0.99;
  /// Blending stops once transmittance drops below this.
  double min_transmittance = 1e-4;
  /// Bin splats only to tiles inside their screen extent. When false every
  /// splat is evaluated on every tile (used by gradient checks).
  bool truncate = true;
  /// Screen extent is max(extent_sigma, k) standard deviations of the major
  /// axis, where k is the radius at which opacity * marginal * exp(-k^2/2)
  /// drops below extent_threshold.
  double extent_sigma = 3.0;
  double extent_threshold = 1e-4;
  CovarianceMode covariance = CovarianceMode::kFull4D;
  int threads = 1;
};

struct RenderStats {
  double cull_ms = 0.0;
  double sort_ms = 0.0;
  double bin_ms = 0.0;
  double blend_ms = 0.0;
  std::size_t visible = 0;
  std::size_t tile_entries = 0;
};

struct RenderOutput {
  Image color;  // H x W x 3, linear RGB, background composited
  Image alpha;  // H x W x 1, 1 - final transmittance
  Image flow;   // H x W x 2 (pixels per dt); only filled by render_flow
  RenderStats stats;
};

struct CulledGaussian {
  std::size_t index = 0;
  Gaussian3Conditional conditional;
  double marginal = 0.0;
};

/// Render-time record of one visible Gaussian.
struct Splat2D {
  std::size_t index = 0;
  Vec2 mean2d = Vec2::Zero();
  Mat2 inv_cov2d = Mat2::Identity();
  double depth = 0.0;
  double marginal_w = 1.0;
  Vec3 color = Vec3::Zero();
  double alpha = 0.0;
};

/// Gaussians that survive the temporal marginal cull, the near plane, and the
/// screen-extent test, in index order.
std::vector<CulledGaussian> cull(const Scene& scene, const Camera& cam, double t,
                                 const RenderOptions& opts = {});

/// Visible splats sorted front to back (depth, then index).
std::vector<Splat2D> project_splats(const Scene& scene, const Camera& cam, double t,
                                    const RenderOptions& opts = {});

RenderOutput render(const Scene& scene, const Camera& cam, double t, const Vec3& background,
                    const RenderOptions& opts = {});

/// Composites each visible Gaussian's projected conditional-mean displacement
/// between t and t + dt with the compositing weights of time t. The result
/// has `flow` and `alpha` filled; `color` is left empty.
RenderOutput render_flow(const Scene& scene, const Camera& cam, double t, double dt,
                         const RenderOptions& opts = {});

/// Brute-force reference: every visible splat at every pixel, one global
/// depth sort, no early termination. Only `min_marginal`, `max_weight`, and
/// `covariance` are read from `opts`.
RenderOutput oracle_render(const Scene& scene, const Camera& cam, double t,
                           const Vec3& background, const RenderOptions& opts = {});

}  // namespace splat4d
