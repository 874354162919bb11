#pragma once

#include <array>
#include <vector>

#include "splat4d/common.hpp"

namespace splat4d {

inline constexpr double kScaleFloor = 1e-7;
inline constexpr double kTimeVarianceFloor = 1e-14;
inline constexpr double kRotorNormFloor = 1e-12;

/// A 4D rotation stored as a pair of quaternions (w, x, y, z ordering, i.e.
/// (a, b, c, d) and (p, q, r, s)). The stored values are unconstrained
/// optimization parameters; every matrix build normalizes them first.
struct Rotor4 {
  Vec4 left = Vec4(1.0, 0.0, 0.0, 0.0);
  Vec4 right = Vec4(1.0, 0.0, 0.0, 0.0);
};

/// Log-space semi-axis lengths (x, y, z, t).
struct Scales4 {
  Vec4 log = Vec4::Zero();

  /// exp(log) clamped below at kScaleFloor.
  Vec4 activated() const;
};

struct Gaussian4D {
  Vec4 mean = Vec4::Zero();  // (x, y, z, t)
  Scales4 scales;
  Rotor4 rotor;
  double opacity_logit = 0.0;
  std::vector<double> sh;  // RGB x Fourier order x SH index

  double opacity() const;
};

struct Gaussian3Conditional {
  Vec3 mean = Vec3::Zero();
  Mat3 cov = Mat3::Identity();
};

/// How space-time coupling enters the covariance. kSpatialOnly builds a
/// block-diagonal covariance from a 3D rotation of the left quaternion and
/// leaves the right quaternion out of the computation entirely.
enum class CovarianceMode { kFull4D, kSpatialOnly };

double sigmoid(double x);
double logit(double p);

/// Left isoclinic matrix L(q): L(q) v is the quaternion product q * v.
Mat4 left_isoclinic(const Vec4& q);
/// Right isoclinic matrix R(q): R(q) v is the quaternion product v * q.
Mat4 right_isoclinic(const Vec4& q);

/// Normalizes q; throws kDegenerateRotor when |q| < kRotorNormFloor.
Vec4 normalized_quaternion(const Vec4& q);

Mat4 rotor_to_matrix(const Rotor4& rotor);

/// 3x3 rotation of a (normalized) quaternion, embedded as diag(R3, 1).
Mat4 spatial_rotation_matrix(const Vec4& q);

Mat4 rotation_matrix(const Rotor4& rotor, CovarianceMode mode);

/// Inverse of rotor_to_matrix for any R in SO(4). The result is one of the
/// two sign-equivalent pairs, each quaternion of unit norm.
Rotor4 matrix_to_rotor(const Mat4& rotation);

Mat4 build_covariance(const Scales4& scales, const Rotor4& rotor,
                      CovarianceMode mode = CovarianceMode::kFull4D);
Mat4 build_covariance(const Gaussian4D& g, CovarianceMode mode = CovarianceMode::kFull4D);

/// Schur-complement conditioning of a 4D Gaussian on its last coordinate.
Gaussian3Conditional condition_on_time(const Vec4& mean, const Mat4& cov, double t);
Gaussian3Conditional condition_at_time(const Gaussian4D& g, double t,
                                       CovarianceMode mode = CovarianceMode::kFull4D);

/// Unnormalized 1D Gaussian exp(-(t - mean_t)^2 / (2 var_t)); peak value 1.
double marginal_value(double mean_t, double var_t, double t);
double marginal_at_time(const Gaussian4D& g, double t,
                        CovarianceMode mode = CovarianceMode::kFull4D);

/// Unnormalized 4D density exp(-0.5 (x - mean)^T cov^{-1} (x - mean)).
double eval_density(const Vec4& mean, const Mat4& cov, const Vec4& x);
double eval_density(const Gaussian4D& g, const Vec4& x);

/// Unnormalized 3D density of a conditional Gaussian at a spatial point.
double eval_density(const Gaussian3Conditional& g, const Vec3& x);

/// Scales and rotor that reproduce a given symmetric positive definite
/// covariance under build_covariance (full 4D mode).
struct ScalesRotor {
  Scales4 scales;
  Rotor4 rotor;
};
ScalesRotor decompose_covariance(const Mat4& cov);

}  // namespace splat4d
