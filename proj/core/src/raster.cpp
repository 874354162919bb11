#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "splat4d/detail/frame.hpp"
#include "splat4d/detail/parallel.hpp"
#include "splat4d/raster.hpp"
#include "splat4d/sh4d.hpp"

namespace splat4d {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

// Splats further than this (in half squared Mahalanobis units) from a pixel
// contribute less than 1e-17 and are skipped identically in both passes.
constexpr double kMaxHalfMahalanobis = 40.0;

struct ShScratch {
  std::vector<double> sh;
  std::vector<double> fourier;
};

bool prepare_one(const Scene& scene, std::size_t i, const Camera& cam, const Mat3& w,
                 const Vec3& trans, const Vec3& center, double t, const RenderOptions& opts,
                 double flow_dt, ShScratch& scratch, detail::PreparedSplat& s) {
  const auto r = scene.record(i);
  Vec4 mean, log_scales, ql, qr;
  for (int k = 0; k < 4; ++k) {
    mean[k] = r[Scene::kMean + k];
    log_scales[k] = r[Scene::kLogScales + k];
    ql[k] = r[Scene::kRotorLeft + k];
    qr[k] = r[Scene::kRotorRight + k];
  }
  if (ql.norm() < kRotorNormFloor) return false;
  if (opts.covariance == CovarianceMode::kFull4D && qr.norm() < kRotorNormFloor) return false;

  s.index = static_cast<std::uint32_t>(i);
  s.scales = Scales4{log_scales}.activated();
  s.rotation = rotation_matrix(Rotor4{ql, qr}, opts.covariance);
  const Mat4 m = s.rotation * s.scales.asDiagonal();
  s.cov4 = m * m.transpose();
  s.cov4 = 0.5 * (s.cov4 + s.cov4.transpose());

  const double var_t = s.cov4(3, 3);
  if (var_t < kTimeVarianceFloor) return false;
  s.tau = t - mean[3];
  s.marginal = std::exp(-0.5 * s.tau * s.tau / var_t);
  if (s.marginal < opts.min_marginal) return false;

  const Vec3 coupling = s.cov4.block<3, 1>(0, 3);
  s.mean_cond = mean.head<3>() + coupling * (s.tau / var_t);
  s.cov_cond = s.cov4.topLeftCorner<3, 3>() - coupling * coupling.transpose() / var_t;
  s.cov_cond = 0.5 * (s.cov_cond + s.cov_cond.transpose());

  s.mean_cam = w * s.mean_cond + trans;
  const double z = s.mean_cam.z();
  if (!(z > cam.near)) return false;
  s.depth = z;
  s.mean2d = Vec2(cam.fx * s.mean_cam.x() / z + cam.cx, cam.fy * s.mean_cam.y() / z + cam.cy);
  s.cov2d = project_covariance(cam, s.mean_cam, s.cov_cond);
  const double det = s.cov2d.determinant();
  if (!(det > 0.0)) return false;
  s.conic << s.cov2d(1, 1) / det, -s.cov2d(0, 1) / det, -s.cov2d(1, 0) / det, s.cov2d(0, 0) / det;

  s.opacity = sigmoid(r[Scene::kOpacity]);

  const double sigma = std::sqrt(max_eigenvalue(s.cov2d));
  double k = opts.extent_sigma;
  const double peak = s.opacity * s.marginal;
  if (peak > opts.extent_threshold) {
    k = std::max(k, std::sqrt(2.0 * std::log(peak / opts.extent_threshold)));
  }
  s.radius = k * sigma;
  const int tiles_x = (cam.width + kTileSize - 1) / kTileSize;
  const int tiles_y = (cam.height + kTileSize - 1) / kTileSize;
  if (opts.truncate) {
    const int px0 = std::max(0, static_cast<int>(std::ceil(s.mean2d.x() - s.radius - 0.5)));
    const int py0 = std::max(0, static_cast<int>(std::ceil(s.mean2d.y() - s.radius - 0.5)));
    const int px1 =
        std::min(cam.width - 1, static_cast<int>(std::floor(s.mean2d.x() + s.radius - 0.5)));
    const int py1 =
        std::min(cam.height - 1, static_cast<int>(std::floor(s.mean2d.y() + s.radius - 0.5)));
    if (px0 > px1 || py0 > py1) return false;
    s.tile_x0 = px0 / kTileSize;
    s.tile_y0 = py0 / kTileSize;
    s.tile_x1 = px1 / kTileSize;
    s.tile_y1 = py1 / kTileSize;
  } else {
    s.tile_x0 = 0;
    s.tile_y0 = 0;
    s.tile_x1 = tiles_x - 1;
    s.tile_y1 = tiles_y - 1;
  }

  const ShConfig& cfg = scene.sh_config();
  Vec3 dir = s.mean_cond - center;
  const double dn = dir.norm();
  dir = dn > 0.0 ? Vec3(dir / dn) : Vec3(0.0, 0.0, 1.0);
  eval_sh(cfg.l_max, dir, scratch.sh);
  eval_fourier(cfg, s.tau, scratch.fourier);
  const int count = cfg.sh_count();
  const int basis = cfg.basis_size();
  s.color_active = 0;
  for (int c = 0; c < 3; ++c) {
    double v = 0.5;
    const float* coeff = r.data() + Scene::kSh + c * basis;
    for (int n = 0; n <= cfg.n_max; ++n) {
      double acc = 0.0;
      for (int j = 0; j < count; ++j) acc += coeff[n * count + j] * scratch.sh[j];
      v += scratch.fourier[n] * acc;
    }
    if (v > 0.0) s.color_active |= static_cast<std::uint8_t>(1u << c);
    s.color[c] = std::max(v, 0.0);
  }

  s.flow = Vec2::Zero();
  if (flow_dt > 0.0) {
    const Vec3 next = w * (mean.head<3>() + coupling * ((s.tau + flow_dt) / var_t)) + trans;
    if (next.z() > cam.near) {
      const Vec2 uv(cam.fx * next.x() / next.z() + cam.cx, cam.fy * next.y() / next.z() + cam.cy);
      s.flow = uv - s.mean2d;
    }
  }
  return true;
}

}  // namespace

namespace detail {

Frame prepare_frame(const Scene& scene, const Camera& cam, double t, const RenderOptions& opts,
                    RenderStats* stats, double flow_dt) {
  Frame frame;
  frame.camera = &cam;
  frame.t = t;
  frame.width = cam.width;
  frame.height = cam.height;
  frame.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
  frame.tiles_y = (cam.height + kTileSize - 1) / kTileSize;

  auto start = Clock::now();
  const Mat3 w = cam.rotation();
  const Vec3 trans = cam.translation();
  const Vec3 center = cam.center();
  ShScratch scratch;
  scratch.sh.resize(scene.sh_config().sh_count());
  scratch.fourier.resize(scene.sh_config().n_max + 1);
  std::vector<PreparedSplat> visible;
  visible.reserve(scene.size());
  PreparedSplat s;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (prepare_one(scene, i, cam, w, trans, center, t, opts, flow_dt, scratch, s)) {
      visible.push_back(s);
    }
  }
  if (stats) stats->cull_ms += elapsed_ms(start);

  start = Clock::now();
  std::vector<std::uint32_t> order(visible.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (visible[a].depth != visible[b].depth) return visible[a].depth < visible[b].depth;
    return visible[a].index < visible[b].index;
  });
  frame.splats.reserve(visible.size());
  for (std::uint32_t o : order) frame.splats.push_back(visible[o]);
  if (stats) stats->sort_ms += elapsed_ms(start);

  start = Clock::now();
  const std::size_t tiles = static_cast<std::size_t>(frame.tiles_x) * frame.tiles_y;
  frame.tile_offsets.assign(tiles + 1, 0);
  for (const PreparedSplat& sp : frame.splats)
    for (int ty = sp.tile_y0; ty <= sp.tile_y1; ++ty)
      for (int tx = sp.tile_x0; tx <= sp.tile_x1; ++tx) ++frame.tile_offsets[ty * frame.tiles_x + tx + 1];
  for (std::size_t k = 0; k < tiles; ++k) frame.tile_offsets[k + 1] += frame.tile_offsets[k];
  frame.tile_splats.resize(frame.tile_offsets[tiles]);
  std::vector<std::uint32_t> cursor(frame.tile_offsets.begin(), frame.tile_offsets.end() - 1);
  for (std::uint32_t j = 0; j < frame.splats.size(); ++j) {
    const PreparedSplat& sp = frame.splats[j];
    for (int ty = sp.tile_y0; ty <= sp.tile_y1; ++ty)
      for (int tx = sp.tile_x0; tx <= sp.tile_x1; ++tx)
        frame.tile_splats[cursor[ty * frame.tiles_x + tx]++] = j;
  }
  frame.tile_blend.resize(frame.tile_splats.size());
  for (std::size_t e = 0; e < frame.tile_splats.size(); ++e) {
    const PreparedSplat& sp = frame.splats[frame.tile_splats[e]];
    frame.tile_blend[e] = {sp.mean2d.x(), sp.mean2d.y(), sp.conic(0, 0), sp.conic(0, 1), sp.conic(1, 1),
                           sp.opacity,    sp.marginal,   sp.color.x(),   sp.color.y(),   sp.color.z(),
                           frame.tile_splats[e]};
  }
  if (stats) {
    stats->bin_ms += elapsed_ms(start);
    stats->visible = frame.splats.size();
    stats->tile_entries = frame.tile_splats.size();
  }
  return frame;
}

void composite(const Frame& frame, const Vec3& background, const RenderOptions& opts,
               CompositeTargets targets) {
  const int tiles = frame.tiles_x * frame.tiles_y;
  if (targets.pixels) {
    const std::size_t n = static_cast<std::size_t>(frame.width) * frame.height;
    targets.pixels->final_transmittance.assign(n, 1.0);
    targets.pixels->contributors.assign(n, 0);
  }
  const bool with_flow = targets.flow != nullptr;
  parallel_for(tiles, opts.threads, [&](int tile, int) {
    const int tx = tile % frame.tiles_x, ty = tile / frame.tiles_x;
    const std::uint32_t begin = frame.tile_offsets[tile], end = frame.tile_offsets[tile + 1];
    const int x_end = std::min(frame.width, (tx + 1) * kTileSize);
    const int y_end = std::min(frame.height, (ty + 1) * kTileSize);
    for (int py = ty * kTileSize; py < y_end; ++py) {
      for (int px = tx * kTileSize; px < x_end; ++px) {
        const double u = px + 0.5, v = py + 0.5;
        double trans = 1.0;
        Vec3 color = Vec3::Zero();
        Vec2 flow = Vec2::Zero();
        std::uint32_t processed = 0;
        for (std::uint32_t e = begin; e < end; ++e) {
          const BlendSplat& s = frame.tile_blend[e];
          processed = e - begin + 1;
          const double dx = u - s.mx, dy = v - s.my;
          const double half_q = 0.5 * (s.cxx * dx * dx + 2.0 * s.cxy * dx * dy + s.cyy * dy * dy);
          if (half_q > kMaxHalfMahalanobis) continue;
          const double weight = std::min(s.marginal * s.opacity * std::exp(-half_q), opts.max_weight);
          const double wt = weight * trans;
          color += wt * Vec3(s.r, s.g, s.b);
          if (with_flow) flow += wt * frame.splats[s.splat].flow;
          trans *= 1.0 - weight;
          if (trans < opts.min_transmittance) break;
        }
        if (targets.color) {
          for (int c = 0; c < 3; ++c) targets.color->at(px, py, c) = color[c] + trans * background[c];
        }
        if (targets.alpha) targets.alpha->at(px, py) = 1.0 - trans;
        if (targets.flow) {
          targets.flow->at(px, py, 0) = flow.x();
          targets.flow->at(px, py, 1) = flow.y();
        }
        if (targets.pixels) {
          const std::size_t p = static_cast<std::size_t>(py) * frame.width + px;
          targets.pixels->final_transmittance[p] = trans;
          targets.pixels->contributors[p] = processed;
        }
      }
    }
  });
}

void composite_backward(const Frame& frame, const PixelState& pixels, const Vec3& background,
                        const Image& grad_color, const RenderOptions& opts,
                        std::vector<SplatGrad>& grads) {
  const int tiles = frame.tiles_x * frame.tiles_y;
  const int workers = worker_count(tiles, opts.threads);
  std::vector<std::vector<SplatGrad>> partial(workers);
  for (auto& p : partial) p.assign(frame.splats.size(), SplatGrad{});

  parallel_for(tiles, opts.threads, [&](int tile, int worker) {
    std::vector<SplatGrad>& out = partial[worker];
    const int tx = tile % frame.tiles_x, ty = tile / frame.tiles_x;
    const std::uint32_t begin = frame.tile_offsets[tile];
    const int x_end = std::min(frame.width, (tx + 1) * kTileSize);
    const int y_end = std::min(frame.height, (ty + 1) * kTileSize);
    for (int py = ty * kTileSize; py < y_end; ++py) {
      for (int px = tx * kTileSize; px < x_end; ++px) {
        const std::size_t p = static_cast<std::size_t>(py) * frame.width + px;
        const Vec3 dl_dpix(grad_color.at(px, py, 0), grad_color.at(px, py, 1),
                           grad_color.at(px, py, 2));
        if (dl_dpix.isZero(0.0)) continue;
        const double u = px + 0.5, v = py + 0.5;
        const double final_t = pixels.final_transmittance[p];
        const double bg_term = background.dot(dl_dpix) * final_t;
        double trans = final_t;
        Vec3 accum = Vec3::Zero();
        double last_weight = 0.0;
        Vec3 last_color = Vec3::Zero();
        for (std::uint32_t e = begin + pixels.contributors[p]; e-- > begin;) {
          const BlendSplat& s = frame.tile_blend[e];
          const std::uint32_t j = s.splat;
          const double dx = u - s.mx, dy = v - s.my;
          const double half_q = 0.5 * (s.cxx * dx * dx + 2.0 * s.cxy * dx * dy + s.cyy * dy * dy);
          if (half_q > kMaxHalfMahalanobis) continue;
          const Vec3 s_color(s.r, s.g, s.b);
          const double gauss = std::exp(-half_q);
          const double raw = s.marginal * s.opacity * gauss;
          const double weight = std::min(raw, opts.max_weight);
          trans /= 1.0 - weight;

          SplatGrad& g = out[j];
          g.color += (weight * trans) * dl_dpix;
          accum = last_weight * last_color + (1.0 - last_weight) * accum;
          last_weight = weight;
          last_color = s_color;
          double dl_dw = trans * (s_color - accum).dot(dl_dpix) - bg_term / (1.0 - weight);
          if (raw > opts.max_weight) dl_dw = 0.0;

          g.opacity += dl_dw * s.marginal * gauss;
          g.marginal += dl_dw * s.opacity * gauss;
          const double dl_dq = -0.5 * dl_dw * raw;
          // q = d^T K d with d = pixel - mean2d
          const Vec2 kd(s.cxx * dx + s.cxy * dy, s.cxy * dx + s.cyy * dy);
          g.mean2d -= 2.0 * dl_dq * kd;
          g.conic += dl_dq * Vec3(dx * dx, dx * dy, dy * dy);
        }
      }
    }
  });

  grads = std::move(partial[0]);
  for (int w = 1; w < workers; ++w) {
    for (std::size_t j = 0; j < grads.size(); ++j) {
      const SplatGrad& o = partial[w][j];
      grads[j].mean2d += o.mean2d;
      grads[j].conic += o.conic;
      grads[j].color += o.color;
      grads[j].opacity += o.opacity;
      grads[j].marginal += o.marginal;
    }
  }
}

}  // namespace detail

std::vector<CulledGaussian> cull(const Scene& scene, const Camera& cam, double t,
                                 const RenderOptions& opts) {
  const detail::Frame frame = detail::prepare_frame(scene, cam, t, opts);
  std::vector<CulledGaussian> out;
  out.reserve(frame.splats.size());
  for (const auto& s : frame.splats) out.push_back({s.index, {s.mean_cond, s.cov_cond}, s.marginal});
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return out;
}

std::vector<Splat2D> project_splats(const Scene& scene, const Camera& cam, double t,
                                    const RenderOptions& opts) {
  const detail::Frame frame = detail::prepare_frame(scene, cam, t, opts);
  std::vector<Splat2D> out;
  out.reserve(frame.splats.size());
  for (const auto& s : frame.splats) {
    out.push_back({s.index, s.mean2d, s.conic, s.depth, s.marginal, s.color, s.opacity});
  }
  return out;
}

RenderOutput render(const Scene& scene, const Camera& cam, double t, const Vec3& background,
                    const RenderOptions& opts) {
  RenderOutput out;
  const detail::Frame frame = detail::prepare_frame(scene, cam, t, opts, &out.stats);
  out.color = Image(cam.width, cam.height, 3);
  out.alpha = Image(cam.width, cam.height, 1);
  const auto start = Clock::now();
  detail::composite(frame, background, opts, {&out.color, &out.alpha, nullptr, nullptr});
  out.stats.blend_ms += elapsed_ms(start);
  return out;
}

RenderOutput render_flow(const Scene& scene, const Camera& cam, double t, double dt,
                         const RenderOptions& opts) {
  if (!(dt > 0.0)) throw Error(Errc::kInvalidArgument, "flow time step must be > 0");
  RenderOutput out;
  const detail::Frame frame = detail::prepare_frame(scene, cam, t, opts, &out.stats, dt);
  out.alpha = Image(cam.width, cam.height, 1);
  out.flow = Image(cam.width, cam.height, 2);
  const auto start = Clock::now();
  detail::composite(frame, Vec3::Zero(), opts, {nullptr, &out.alpha, &out.flow, nullptr});
  out.stats.blend_ms += elapsed_ms(start);
  return out;
}

RenderOutput oracle_render(const Scene& scene, const Camera& cam, double t,
                           const Vec3& background, const RenderOptions& opts) {
  struct Entry {
    std::size_t index;
    double depth;
    Vec2 mean2d;
    Mat2 conic;
    double weight_scale;
    Vec3 color;
  };
  std::vector<Entry> entries;
  const Vec3 center = cam.center();
  for (std::size_t i = 0; i < scene.size(); ++i) {
    const Gaussian4D g = scene.gaussian(i);
    Mat4 cov;
    try {
      cov = build_covariance(g, opts.covariance);
    } catch (const Error&) {
      continue;
    }
    if (cov(3, 3) < kTimeVarianceFloor) continue;
    const double marginal = marginal_value(g.mean[3], cov(3, 3), t);
    if (marginal < opts.min_marginal) continue;
    const Gaussian3Conditional cond = condition_on_time(g.mean, cov, t);
    const ProjectedPoint pp = project_point(cam, cond.mean);
    if (!pp.in_front) continue;
    const Mat2 cov2 = project_covariance(cam, cam.to_camera(cond.mean), cond.cov);
    entries.push_back({i, pp.depth, pp.uv, cov2.inverse(), marginal * g.opacity(),
                       eval_color(g.sh, scene.sh_config(), cond.mean - center, t - g.mean[3])});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.depth < b.depth; });

  RenderOutput out;
  out.color = Image(cam.width, cam.height, 3);
  out.alpha = Image(cam.width, cam.height, 1);
  for (int py = 0; py < cam.height; ++py) {
    for (int px = 0; px < cam.width; ++px) {
      const Vec2 pix(px + 0.5, py + 0.5);
      double trans = 1.0;
      Vec3 color = Vec3::Zero();
      for (const Entry& e : entries) {
        const Vec2 d = pix - e.mean2d;
        const double w =
            std::min(e.weight_scale * std::exp(-0.5 * d.dot(e.conic * d)), opts.max_weight);
        color += w * trans * e.color;
        trans *= 1.0 - w;
      }
      for (int c = 0; c < 3; ++c) out.color.at(px, py, c) = color[c] + trans * background[c];
      out.alpha.at(px, py) = 1.0 - trans;
    }
  }
  return out;
}

}  // namespace splat4d
