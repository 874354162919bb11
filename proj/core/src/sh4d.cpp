#include "splat4d/sh4d.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace splat4d {

namespace {

constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                           -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[7] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                           0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                           -0.5900435899266435};

}  // namespace

void ShConfig::validate() const {
  if (l_max < 0 || l_max > kMaxShDegree) {
    throw Error(Errc::kInvalidArgument, "l_max must be in [0, 3], got " + std::to_string(l_max));
  }
  if (n_max < 0) throw Error(Errc::kInvalidArgument, "n_max must be >= 0");
  if (!(period > 0.0)) throw Error(Errc::kInvalidArgument, "period must be > 0");
}

void eval_sh(int l_max, const Vec3& dir, std::span<double> out) {
  const double x = dir.x(), y = dir.y(), z = dir.z();
  out[0] = kShC0;
  if (l_max < 1) return;
  out[1] = -kC1 * y;
  out[2] = kC1 * z;
  out[3] = -kC1 * x;
  if (l_max < 2) return;
  const double xx = x * x, yy = y * y, zz = z * z;
  out[4] = kC2[0] * x * y;
  out[5] = kC2[1] * y * z;
  out[6] = kC2[2] * (2.0 * zz - xx - yy);
  out[7] = kC2[3] * x * z;
  out[8] = kC2[4] * (xx - yy);
  if (l_max < 3) return;
  out[9] = kC3[0] * y * (3.0 * xx - yy);
  out[10] = kC3[1] * x * y * z;
  out[11] = kC3[2] * y * (4.0 * zz - xx - yy);
  out[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
  out[13] = kC3[4] * x * (4.0 * zz - xx - yy);
  out[14] = kC3[5] * z * (xx - yy);
  out[15] = kC3[6] * x * (xx - 3.0 * yy);
}

void eval_sh_gradient(int l_max, const Vec3& dir, std::span<Vec3> out) {
  const double x = dir.x(), y = dir.y(), z = dir.z();
  out[0] = Vec3::Zero();
  if (l_max < 1) return;
  out[1] = Vec3(0.0, -kC1, 0.0);
  out[2] = Vec3(0.0, 0.0, kC1);
  out[3] = Vec3(-kC1, 0.0, 0.0);
  if (l_max < 2) return;
  const double xx = x * x, yy = y * y, zz = z * z;
  out[4] = kC2[0] * Vec3(y, x, 0.0);
  out[5] = kC2[1] * Vec3(0.0, z, y);
  out[6] = kC2[2] * Vec3(-2.0 * x, -2.0 * y, 4.0 * z);
  out[7] = kC2[3] * Vec3(z, 0.0, x);
  out[8] = kC2[4] * Vec3(2.0 * x, -2.0 * y, 0.0);
  if (l_max < 3) return;
  out[9] = kC3[0] * Vec3(6.0 * x * y, 3.0 * xx - 3.0 * yy, 0.0);
  out[10] = kC3[1] * Vec3(y * z, x * z, x * y);
  out[11] = kC3[2] * Vec3(-2.0 * x * y, 4.0 * zz - xx - 3.0 * yy, 8.0 * y * z);
  out[12] = kC3[3] * Vec3(-6.0 * x * z, -6.0 * y * z, 6.0 * zz - 3.0 * xx - 3.0 * yy);
  out[13] = kC3[4] * Vec3(4.0 * zz - 3.0 * xx - yy, -2.0 * x * y, 8.0 * x * z);
  out[14] = kC3[5] * Vec3(2.0 * x * z, -2.0 * y * z, xx - yy);
  out[15] = kC3[6] * Vec3(3.0 * xx - 3.0 * yy, -6.0 * x * y, 0.0);
}

void eval_fourier(const ShConfig& cfg, double t_rel, std::span<double> out) {
  const double w = 2.0 * std::numbers::pi * t_rel / cfg.period;
  for (int n = 0; n <= cfg.n_max; ++n) out[n] = n == 0 ? 1.0 : std::cos(w * n);
}

ShBasis eval_basis(const ShConfig& cfg, const Vec3& dir, double t_rel) {
  cfg.validate();
  const double norm = dir.norm();
  if (!(norm > 1e-12)) throw Error(Errc::kZeroDirection, "view direction has zero length");
  ShBasis out;
  out.renormalized = std::abs(norm - 1.0) > 1e-6;
  const Vec3 unit = dir / norm;

  const int count = cfg.sh_count();
  std::vector<double> sh(count);
  std::vector<double> fourier(cfg.n_max + 1);
  eval_sh(cfg.l_max, unit, sh);
  eval_fourier(cfg, t_rel, fourier);
  out.values.resize(cfg.basis_size());
  for (int n = 0; n <= cfg.n_max; ++n)
    for (int k = 0; k < count; ++k) out.values[n * count + k] = fourier[n] * sh[k];
  return out;
}

Vec3 eval_color(std::span<const double> coeffs, const ShConfig& cfg, const Vec3& dir,
                double t_rel) {
  if (static_cast<int>(coeffs.size()) != cfg.coeff_count()) {
    throw Error(Errc::kShapeMismatch, "expected " + std::to_string(cfg.coeff_count()) +
                                          " SH coefficients, got " +
                                          std::to_string(coeffs.size()));
  }
  const ShBasis basis = eval_basis(cfg, dir, t_rel);
  const int size = cfg.basis_size();
  Vec3 rgb;
  for (int c = 0; c < 3; ++c) {
    double v = 0.5;
    for (int i = 0; i < size; ++i) v += coeffs[c * size + i] * basis.values[i];
    rgb[c] = std::max(v, 0.0);
  }
  return rgb;
}

}  // namespace splat4d
