#pragma once

// Internal rasterizer state shared by the forward renderer and the training
// backward pass. Not part of the installed interface contract.

#include <cstdint>
#include <vector>

#include "splat4d/raster.hpp"

namespace splat4d::detail {

struct PreparedSplat {
  std::uint32_t index = 0;
  Vec2 mean2d = Vec2::Zero();
  Mat2 cov2d = Mat2::Identity();
  Mat2 conic = Mat2::Identity();
  double depth = 0.0;
  double marginal = 1.0;
  double opacity = 0.0;
  Vec3 color = Vec3::Zero();
  std::uint8_t color_active = 0;  // bit c set when channel c is above the zero floor
  Vec2 flow = Vec2::Zero();
  double radius = 0.0;
  int tile_x0 = 0, tile_y0 = 0, tile_x1 = 0, tile_y1 = 0;  // inclusive tile range

  // Forward intermediates reused by the backward pass.
  Vec4 scales = Vec4::Ones();
  Mat4 rotation = Mat4::Identity();
  Mat4 cov4 = Mat4::Identity();
  Vec3 mean_cond = Vec3::Zero();
  Mat3 cov_cond = Mat3::Identity();
  Vec3 mean_cam = Vec3::Zero();
  double tau = 0.0;  // t - mu_t
};

/// The per-pixel subset of PreparedSplat, stored once per tile entry so the
/// blend loops read memory sequentially.
struct BlendSplat {
  double mx = 0.0, my = 0.0;
  double cxx = 0.0, cxy = 0.0, cyy = 0.0;  // conic
  double opacity = 0.0;
  double marginal = 0.0;
  double r = 0.0, g = 0.0, b = 0.0;
  std::uint32_t splat = 0;  // index into Frame::splats
};

struct Frame {
  const Camera* camera = nullptr;
  double t = 0.0;
  int width = 0, height = 0;
  int tiles_x = 0, tiles_y = 0;
  std::vector<PreparedSplat> splats;         // sorted front to back
  std::vector<std::uint32_t> tile_offsets;   // tiles_x * tiles_y + 1
  std::vector<std::uint32_t> tile_splats;    // indices into `splats`
  std::vector<BlendSplat> tile_blend;        // parallel to tile_splats
};

struct PixelState {
  std::vector<double> final_transmittance;
  std::vector<std::uint32_t> contributors;  // number of list entries processed
};

/// Cull, project, shade, sort, and bin. `flow_dt` > 0 also fills
/// PreparedSplat::flow.
Frame prepare_frame(const Scene& scene, const Camera& cam, double t, const RenderOptions& opts,
                    RenderStats* stats = nullptr, double flow_dt = 0.0);

struct CompositeTargets {
  Image* color = nullptr;
  Image* alpha = nullptr;
  Image* flow = nullptr;
  PixelState* pixels = nullptr;
};

void composite(const Frame& frame, const Vec3& background, const RenderOptions& opts,
               CompositeTargets targets);

/// Per-splat gradients of the loss w.r.t. the quantities composited per
/// pixel. `conic` holds sum(dL/dq * d d^T) as (xx, xy, yy).
struct SplatGrad {
  Vec2 mean2d = Vec2::Zero();
  Vec3 conic = Vec3::Zero();
  Vec3 color = Vec3::Zero();
  double opacity = 0.0;
  double marginal = 0.0;
};

void composite_backward(const Frame& frame, const PixelState& pixels, const Vec3& background,
                        const Image& grad_color, const RenderOptions& opts,
                        std::vector<SplatGrad>& grads);

}  // namespace splat4d::detail
