#include "splat4d/geom4d.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace splat4d {

namespace {

using Mat16 = Eigen::Matrix<double, 16, 16>;
using Vec16 = Eigen::Matrix<double, 16, 1>;

// Column (4k + m) holds vec(L(e_k) R(e_m)). The product L(q_l) R(q_r) is
// bilinear, so vec(R) = A vec(q_l q_r^T) and A is invertible.
const Mat16& bilinear_rotor_map() {
  static const Mat16 map = [] {
    Mat16 a;
    for (int k = 0; k < 4; ++k) {
      for (int m = 0; m < 4; ++m) {
        const Mat4 prod = left_isoclinic(Vec4::Unit(k)) * right_isoclinic(Vec4::Unit(m));
        a.col(4 * k + m) = Eigen::Map<const Vec16>(prod.data());
      }
    }
    return a;
  }();
  return map;
}

}  // namespace

Vec4 Scales4::activated() const {
  Vec4 s;
  for (int i = 0; i < 4; ++i) s[i] = std::max(std::exp(log[i]), kScaleFloor);
  return s;
}

double Gaussian4D::opacity() const { return sigmoid(opacity_logit); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

Mat4 left_isoclinic(const Vec4& q) {
  const double a = q[0], b = q[1], c = q[2], d = q[3];
  Mat4 m;
  m << a, -b, -c, -d,
       b,  a, -d,  c,
       c,  d,  a, -b,
       d, -c,  b,  a;
  return m;
}

Mat4 right_isoclinic(const Vec4& q) {
  const double p = q[0], qq = q[1], r = q[2], s = q[3];
  Mat4 m;
  m << p, -qq, -r, -s,
       qq,  p,  s, -r,
       r,  -s,  p, qq,
       s,   r, -qq, p;
  return m;
}

Vec4 normalized_quaternion(const Vec4& q) {
  const double n = q.norm();
  if (!(n >= kRotorNormFloor)) {
    throw Error(Errc::kDegenerateRotor, "quaternion norm below 1e-12");
  }
  return q / n;
}

Mat4 rotor_to_matrix(const Rotor4& rotor) {
  return left_isoclinic(normalized_quaternion(rotor.left)) *
         right_isoclinic(normalized_quaternion(rotor.right));
}

Mat4 spatial_rotation_matrix(const Vec4& quat) {
  const Vec4 q = normalized_quaternion(quat);
  const double r = q[0], x = q[1], y = q[2], z = q[3];
  Mat4 m = Mat4::Identity();
  m(0, 0) = 1.0 - 2.0 * (y * y + z * z);
  m(0, 1) = 2.0 * (x * y - r * z);
  m(0, 2) = 2.0 * (x * z + r * y);
  m(1, 0) = 2.0 * (x * y + r * z);
  m(1, 1) = 1.0 - 2.0 * (x * x + z * z);
  m(1, 2) = 2.0 * (y * z - r * x);
  m(2, 0) = 2.0 * (x * z - r * y);
  m(2, 1) = 2.0 * (y * z + r * x);
  m(2, 2) = 1.0 - 2.0 * (x * x + y * y);
  return m;
}

Mat4 rotation_matrix(const Rotor4& rotor, CovarianceMode mode) {
  return mode == CovarianceMode::kFull4D ? rotor_to_matrix(rotor)
                                         : spatial_rotation_matrix(rotor.left);
}

Rotor4 matrix_to_rotor(const Mat4& rotation) {
  const Vec16 r = Eigen::Map<const Vec16>(rotation.data());
  const Vec16 x = bilinear_rotor_map().partialPivLu().solve(r);
  // x = vec(q_l q_r^T) in column-major order of a 4x4 (row k = left index).
  Mat4 outer;
  for (int k = 0; k < 4; ++k)
    for (int m = 0; m < 4; ++m) outer(k, m) = x[4 * k + m];
  Eigen::JacobiSVD<Mat4> svd(outer, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Rotor4 out;
  out.left = svd.matrixU().col(0).normalized();
  out.right = svd.matrixV().col(0).normalized();
  if ((rotor_to_matrix(out) - rotation).cwiseAbs().maxCoeff() >
      (rotor_to_matrix({out.left, -out.right}) - rotation).cwiseAbs().maxCoeff()) {
    out.right = -out.right;
  }
  return out;
}

Mat4 build_covariance(const Scales4& scales, const Rotor4& rotor, CovarianceMode mode) {
  const Mat4 m = rotation_matrix(rotor, mode) * scales.activated().asDiagonal();
  const Mat4 cov = m * m.transpose();
  return 0.5 * (cov + cov.transpose());
}

Mat4 build_covariance(const Gaussian4D& g, CovarianceMode mode) {
  return build_covariance(g.scales, g.rotor, mode);
}

Gaussian3Conditional condition_on_time(const Vec4& mean, const Mat4& cov, double t) {
  const double var_t = cov(3, 3);
  if (!(var_t >= kTimeVarianceFloor)) {
    throw Error(Errc::kDegenerateTimeExtent, "time variance below 1e-14");
  }
  const Vec3 coupling = cov.block<3, 1>(0, 3);
  Gaussian3Conditional out;
  out.mean = mean.head<3>() + coupling * ((t - mean[3]) / var_t);
  const Mat3 schur = cov.topLeftCorner<3, 3>() - coupling * coupling.transpose() / var_t;
  out.cov = 0.5 * (schur + schur.transpose());
  return out;
}

Gaussian3Conditional condition_at_time(const Gaussian4D& g, double t, CovarianceMode mode) {
  return condition_on_time(g.mean, build_covariance(g, mode), t);
}

double marginal_value(double mean_t, double var_t, double t) {
  if (!(var_t >= kTimeVarianceFloor)) {
    throw Error(Errc::kDegenerateTimeExtent, "time variance below 1e-14");
  }
  const double d = t - mean_t;
  return std::exp(-0.5 * d * d / var_t);
}

double marginal_at_time(const Gaussian4D& g, double t, CovarianceMode mode) {
  return marginal_value(g.mean[3], build_covariance(g, mode)(3, 3), t);
}

double eval_density(const Vec4& mean, const Mat4& cov, const Vec4& x) {
  Eigen::LLT<Mat4> llt(cov);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::kDegenerateCovariance, "covariance is not positive definite");
  }
  const Vec4 d = x - mean;
  return std::exp(-0.5 * d.dot(llt.solve(d)));
}

double eval_density(const Gaussian4D& g, const Vec4& x) {
  return eval_density(g.mean, build_covariance(g), x);
}

double eval_density(const Gaussian3Conditional& g, const Vec3& x) {
  Eigen::LLT<Mat3> llt(g.cov);
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::kDegenerateCovariance, "conditional covariance is not positive definite");
  }
  const Vec3 d = x - g.mean;
  return std::exp(-0.5 * d.dot(llt.solve(d)));
}

ScalesRotor decompose_covariance(const Mat4& cov) {
  Eigen::SelfAdjointEigenSolver<Mat4> eig(0.5 * (cov + cov.transpose()));
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw Error(Errc::kDegenerateCovariance, "covariance is not positive definite");
  }
  Mat4 v = eig.eigenvectors();
  if (v.determinant() < 0.0) v.col(0) = -v.col(0);
  ScalesRotor out;
  for (int i = 0; i < 4; ++i) out.scales.log[i] = 0.5 * std::log(eig.eigenvalues()[i]);
  out.rotor = matrix_to_rotor(v);
  return out;
}

}  // namespace splat4d
