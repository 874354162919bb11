#include <cmath>
#include <numbers>

#include "splat4d/detail/frame.hpp"
#include "splat4d/metrics.hpp"
#include "splat4d/optim.hpp"
#include "splat4d/sh4d.hpp"

namespace splat4d {

namespace {

// Gradient w.r.t. a raw (unnormalized) quaternion given the gradient w.r.t.
// its normalized value.
Vec4 normalize_backward(const Vec4& raw, const Vec4& grad_unit) {
  const double n = raw.norm();
  const Vec4 u = raw / n;
  return (grad_unit - u * u.dot(grad_unit)) / n;
}

const std::array<Mat4, 4>& left_basis() {
  static const std::array<Mat4, 4> b = {left_isoclinic(Vec4::Unit(0)), left_isoclinic(Vec4::Unit(1)),
                                        left_isoclinic(Vec4::Unit(2)), left_isoclinic(Vec4::Unit(3))};
  return b;
}

const std::array<Mat4, 4>& right_basis() {
  static const std::array<Mat4, 4> b = {
      right_isoclinic(Vec4::Unit(0)), right_isoclinic(Vec4::Unit(1)),
      right_isoclinic(Vec4::Unit(2)), right_isoclinic(Vec4::Unit(3))};
  return b;
}

Vec4 spatial_quaternion_backward(const Vec4& q, const Mat3& g) {
  const double r = q[0], x = q[1], y = q[2], z = q[3];
  Vec4 d;
  d[0] = 2.0 * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) + x * g(2, 1));
  d[1] = 2.0 * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - 2.0 * x * g(1, 1) - r * g(1, 2) +
                z * g(2, 0) + r * g(2, 1) - 2.0 * x * g(2, 2));
  d[2] = 2.0 * (-2.0 * y * g(0, 0) + x * g(0, 1) + r * g(0, 2) + x * g(1, 0) + z * g(1, 2) -
                r * g(2, 0) + z * g(2, 1) - 2.0 * y * g(2, 2));
  d[3] = 2.0 * (-2.0 * z * g(0, 0) - r * g(0, 1) + x * g(0, 2) + r * g(1, 0) - 2.0 * z * g(1, 1) +
                y * g(1, 2) + x * g(2, 0) + y * g(2, 1));
  return d;
}

struct SplatParamGrad {
  double view_norm = 0.0;
  double time_abs = 0.0;
};

SplatParamGrad splat_param_backward(const Scene& scene, const Camera& cam,
                                    const detail::PreparedSplat& s, const detail::SplatGrad& g,
                                    CovarianceMode mode, std::span<double> out, double scale) {
  const auto rec = scene.record(s.index);
  const ShConfig& cfg = scene.sh_config();
  const Mat3 w = cam.rotation();
  const double var_t = s.cov4(3, 3);
  const Vec3 coupling = s.cov4.block<3, 1>(0, 3);

  // Conic -> 2D covariance -> conditional 3D covariance and camera-space mean.
  Mat2 g_conic;
  g_conic << g.conic[0], g.conic[1], g.conic[1], g.conic[2];
  const Mat2 g_cov2 = -s.conic * g_conic * s.conic;
  const Eigen::Matrix<double, 2, 3> jac = perspective_jacobian(cam, s.mean_cam);
  const Eigen::Matrix<double, 2, 3> t_mat = jac * w;
  const Mat3 g_cov_cond = t_mat.transpose() * g_cov2 * t_mat;
  const Eigen::Matrix<double, 2, 3> g_t = 2.0 * g_cov2 * t_mat * s.cov_cond;
  const Eigen::Matrix<double, 2, 3> g_jac = g_t * w.transpose();

  const double x = s.mean_cam.x(), y = s.mean_cam.y(), z = s.mean_cam.z();
  const double iz = 1.0 / z, iz2 = iz * iz, iz3 = iz2 * iz;
  Vec3 g_cam;
  g_cam.x() = g.mean2d.x() * cam.fx * iz - g_jac(0, 2) * cam.fx * iz2;
  g_cam.y() = g.mean2d.y() * cam.fy * iz - g_jac(1, 2) * cam.fy * iz2;
  g_cam.z() = -(g.mean2d.x() * cam.fx * x + g.mean2d.y() * cam.fy * y) * iz2 -
              g_jac(0, 0) * cam.fx * iz2 + g_jac(0, 2) * 2.0 * cam.fx * x * iz3 -
              g_jac(1, 1) * cam.fy * iz2 + g_jac(1, 2) * 2.0 * cam.fy * y * iz3;
  Vec3 g_mean_cond = w.transpose() * g_cam;
  double g_tau = 0.0;
  double g_var = 0.0;

  // Color: SH coefficients, view direction, and Fourier time terms.
  const int count = cfg.sh_count();
  const int basis = cfg.basis_size();
  Vec3 g_color = g.color;
  for (int c = 0; c < 3; ++c)
    if (!(s.color_active & (1u << c))) g_color[c] = 0.0;
  if (!g_color.isZero(0.0)) {
    const Vec3 v = s.mean_cond - cam.center();
    const double vn = v.norm();
    const Vec3 dir = vn > 0.0 ? Vec3(v / vn) : Vec3(0.0, 0.0, 1.0);
    std::array<double, 16> sh{};
    std::array<Vec3, 16> dsh{};
    std::vector<double> fourier(cfg.n_max + 1);
    eval_sh(cfg.l_max, dir, sh);
    eval_sh_gradient(cfg.l_max, dir, dsh);
    eval_fourier(cfg, s.tau, fourier);
    std::array<double, 16> g_sh{};
    for (int c = 0; c < 3; ++c) {
      if (g_color[c] == 0.0) continue;
      const float* coeff = rec.data() + Scene::kSh + c * basis;
      double* out_coeff = out.data() + Scene::kSh + c * basis;
      for (int n = 0; n <= cfg.n_max; ++n) {
        double dot = 0.0;
        for (int k = 0; k < count; ++k) {
          out_coeff[n * count + k] += scale * g_color[c] * fourier[n] * sh[k];
          g_sh[k] += g_color[c] * fourier[n] * coeff[n * count + k];
          dot += coeff[n * count + k] * sh[k];
        }
        if (n > 0) {
          const double omega = 2.0 * std::numbers::pi * n / cfg.period;
          g_tau += g_color[c] * dot * (-std::sin(omega * s.tau) * omega);
        }
      }
    }
    if (vn > 0.0) {
      Vec3 g_dir = Vec3::Zero();
      for (int k = 0; k < count; ++k) g_dir += g_sh[k] * dsh[k];
      g_mean_cond += (g_dir - dir * dir.dot(g_dir)) / vn;
    }
  }

  // Temporal marginal.
  g_tau += g.marginal * s.marginal * (-s.tau / var_t);
  g_var += g.marginal * s.marginal * 0.5 * s.tau * s.tau / (var_t * var_t);

  out[Scene::kOpacity] += scale * g.opacity * s.opacity * (1.0 - s.opacity);

  // Conditioning on time.
  Vec3 g_coupling = -2.0 * g_cov_cond * coupling / var_t;
  g_var += coupling.dot(g_cov_cond * coupling) / (var_t * var_t);
  g_coupling += g_mean_cond * (s.tau / var_t);
  g_tau += coupling.dot(g_mean_cond) / var_t;
  g_var -= coupling.dot(g_mean_cond) * s.tau / (var_t * var_t);

  for (int k = 0; k < 3; ++k) out[Scene::kMean + k] += scale * g_mean_cond[k];
  out[Scene::kMean + 3] -= scale * g_tau;

  // Sigma = M M^T with M = R diag(s).
  Mat4 g_sigma = Mat4::Zero();
  g_sigma.topLeftCorner<3, 3>() = g_cov_cond;
  g_sigma.block<3, 1>(0, 3) = g_coupling;
  g_sigma(3, 3) = g_var;
  const Mat4 m = s.rotation * s.scales.asDiagonal();
  const Mat4 g_m = (g_sigma + g_sigma.transpose()) * m;
  const Mat4 g_rot = g_m * s.scales.asDiagonal();
  for (int j = 0; j < 4; ++j) {
    const double g_scale = g_m.col(j).dot(s.rotation.col(j));
    const double raw = std::exp(static_cast<double>(rec[Scene::kLogScales + j]));
    if (raw > kScaleFloor) out[Scene::kLogScales + j] += scale * g_scale * s.scales[j];
  }

  Vec4 ql, qr;
  for (int k = 0; k < 4; ++k) {
    ql[k] = rec[Scene::kRotorLeft + k];
    qr[k] = rec[Scene::kRotorRight + k];
  }
  Vec4 g_ql, g_qr = Vec4::Zero();
  if (mode == CovarianceMode::kFull4D) {
    const Vec4 ul = ql.normalized(), ur = qr.normalized();
    const Mat4 g_left = g_rot * right_isoclinic(ur).transpose();
    const Mat4 g_right = left_isoclinic(ul).transpose() * g_rot;
    Vec4 g_ul, g_ur;
    for (int k = 0; k < 4; ++k) {
      g_ul[k] = g_left.cwiseProduct(left_basis()[k]).sum();
      g_ur[k] = g_right.cwiseProduct(right_basis()[k]).sum();
    }
    g_ql = normalize_backward(ql, g_ul);
    g_qr = normalize_backward(qr, g_ur);
  } else {
    const Mat3 g3 = g_rot.topLeftCorner<3, 3>();
    g_ql = normalize_backward(ql, spatial_quaternion_backward(ql.normalized(), g3));
  }
  for (int k = 0; k < 4; ++k) {
    out[Scene::kRotorLeft + k] += scale * g_ql[k];
    out[Scene::kRotorRight + k] += scale * g_qr[k];
  }
  return {g.mean2d.norm(), std::abs(g_tau)};
}

}  // namespace

LossValue loss(const Image& rendered, const Image& target, double lambda) {
  if (!rendered.same_shape(target)) throw Error(Errc::kShapeMismatch, "image dimensions differ");
  LossValue out;
  double l1 = 0.0;
  for (std::size_t i = 0; i < rendered.data.size(); ++i) l1 += std::abs(rendered.data[i] - target.data[i]);
  out.l1 = rendered.data.empty() ? 0.0 : l1 / static_cast<double>(rendered.data.size());
  out.ssim = lambda > 0.0 ? ssim(rendered, target) : 1.0;
  out.total = (1.0 - lambda) * out.l1 + lambda * (1.0 - out.ssim);
  return out;
}

LossValue loss_with_gradient(const Image& rendered, const Image& target, double lambda,
                             Image& grad) {
  if (!rendered.same_shape(target)) throw Error(Errc::kShapeMismatch, "image dimensions differ");
  LossValue out;
  const double inv_n = 1.0 / static_cast<double>(rendered.data.size());
  if (lambda > 0.0) {
    out.ssim = ssim_with_gradient(rendered, target, grad);
    for (double& g : grad.data) g *= -lambda;
  } else {
    grad = Image(rendered.width, rendered.height, rendered.channels);
  }
  double l1 = 0.0;
  for (std::size_t i = 0; i < rendered.data.size(); ++i) {
    const double d = rendered.data[i] - target.data[i];
    l1 += std::abs(d);
    grad.data[i] += (1.0 - lambda) * inv_n * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
  }
  out.l1 = l1 * inv_n;
  out.total = (1.0 - lambda) * out.l1 + lambda * (1.0 - out.ssim);
  return out;
}

void GradStats::reset(std::size_t n) {
  view_grad_sum.assign(n, 0.0);
  time_grad_sum.assign(n, 0.0);
  max_radius.assign(n, 0.0);
  count.assign(n, 0);
}

LossValue backward(const Scene& scene, const Camera& cam, double t, const Image& target,
                   const Vec3& background, const BackwardOptions& opts, std::span<double> grads,
                   double scale, GradStats* stats) {
  if (grads.size() != scene.params().size()) {
    throw Error(Errc::kShapeMismatch, "gradient buffer does not match scene parameters");
  }
  const detail::Frame frame = detail::prepare_frame(scene, cam, t, opts.render);
  Image color(cam.width, cam.height, 3);
  detail::PixelState pixels;
  detail::composite(frame, background, opts.render, {&color, nullptr, nullptr, &pixels});

  Image grad_color;
  const LossValue value = loss_with_gradient(color, target, opts.loss_lambda, grad_color);

  std::vector<detail::SplatGrad> splat_grads;
  detail::composite_backward(frame, pixels, background, grad_color, opts.render, splat_grads);

  const std::size_t stride = scene.stride();
  for (std::size_t j = 0; j < frame.splats.size(); ++j) {
    const detail::PreparedSplat& s = frame.splats[j];
    std::span<double> out = grads.subspan(s.index * stride, stride);
    const SplatParamGrad pg =
        splat_param_backward(scene, cam, s, splat_grads[j], opts.render.covariance, out, scale);
    if (stats) {
      stats->view_grad_sum[s.index] += pg.view_norm;
      stats->time_grad_sum[s.index] += pg.time_abs;
      stats->max_radius[s.index] = std::max(stats->max_radius[s.index], s.radius);
      stats->count[s.index] += 1;
    }
  }
  return value;
}

BackwardResult backward(const Scene& scene, const Camera& cam, double t, const Image& target,
                        const Vec3& background, const BackwardOptions& opts) {
  BackwardResult out;
  out.grads.assign(scene.params().size(), 0.0);
  out.loss = backward(scene, cam, t, target, background, opts, out.grads);
  return out;
}

}  // namespace splat4d
