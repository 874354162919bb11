#pragma once

#include <span>
#include <vector>

#include "splat4d/common.hpp"

namespace splat4d {

inline constexpr int kMaxShDegree = 3;
inline constexpr double kShC0 = 0.28209479177387814;  // 1/(2 sqrt(pi))

/// Degrees of the spherindrical basis: real SH up to l_max times a cosine
/// Fourier series up to n_max with period `period` (time units).
struct ShConfig {
  int l_max = 2;
  int n_max = 1;
  double period = 1.0;

  int sh_count() const { return (l_max + 1) * (l_max + 1); }
  int basis_size() const { return (n_max + 1) * sh_count(); }
  int coeff_count() const { return 3 * basis_size(); }

  /// Throws kInvalidArgument unless 0 <= l_max <= 3, n_max >= 0, period > 0.
  void validate() const;
};

/// Real spherical harmonics Y_k(dir) for k < (l_max+1)^2 at a unit direction,
/// using the sign and constant conventions of common splatting renderers.
void eval_sh(int l_max, const Vec3& dir, std::span<double> out);

/// Partial derivatives dY_k/d(x, y, z) of the SH polynomials at `dir`.
void eval_sh_gradient(int l_max, const Vec3& dir, std::span<Vec3> out);

/// cos(2 pi n t_rel / period) for n = 0..n_max.
void eval_fourier(const ShConfig& cfg, double t_rel, std::span<double> out);

struct ShBasis {
  std::vector<double> values;  // index n * sh_count + k
  bool renormalized = false;   // input direction was not unit length
};

/// Spherindrical basis Z_{n,l,m}(dir, t_rel). A non-unit direction is
/// normalized and flagged; a zero direction throws kZeroDirection.
ShBasis eval_basis(const ShConfig& cfg, const Vec3& dir, double t_rel);

/// Per-channel dot(coefficients, basis) + 0.5, floored at 0.
/// Coefficient layout: coeffs[c * basis_size + n * sh_count + k].
Vec3 eval_color(std::span<const double> coeffs, const ShConfig& cfg, const Vec3& dir,
                double t_rel);

/// DC coefficient that reproduces `value` for a constant-color Gaussian.
inline double rgb_to_dc(double value) { return (value - 0.5) / kShC0; }
inline double dc_to_rgb(double dc) { return dc * kShC0 + 0.5; }

}  // namespace splat4d
