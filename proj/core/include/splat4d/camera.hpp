#pragma once

#include <string>

#include "splat4d/common.hpp"

namespace splat4d {

/// Low-pass dilation added to the diagonal of every projected covariance (px^2).
inline constexpr double kCovarianceDilation = 0.3;

/// Pinhole camera. Right-handed, +z forward, pixel origin at the top-left
/// corner; pixel (x, y) is sampled at (x + 0.5, y + 0.5).
struct Camera {
  std::string id;
  double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
  int width = 0, height = 0;
  Mat4 world_to_camera = Mat4::Identity();
  double near = 0.01;

  Mat3 rotation() const { return world_to_camera.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return world_to_camera.block<3, 1>(0, 3); }
  /// Camera center in world coordinates.
  Vec3 center() const { return -rotation().transpose() * translation(); }
  Vec3 to_camera(const Vec3& world) const { return rotation() * world + translation(); }

  /// Throws kInvalidArgument on a non-orthonormal rotation, non-positive
  /// near plane, or empty image size.
  void validate() const;
};

/// Camera at `eye` looking at `target` with the image "down" axis roughly
/// aligned with -`up`.
Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy,
               int width, int height, std::string id = {});

struct ProjectedPoint {
  Vec2 uv = Vec2::Zero();
  double depth = 0.0;
  bool in_front = false;  // depth > near
};

ProjectedPoint project_point(const Camera& cam, const Vec3& world);

/// 2x3 Jacobian of the perspective map at a camera-space point.
Eigen::Matrix<double, 2, 3> perspective_jacobian(const Camera& cam, const Vec3& mean_cam);

/// Linearized 2D covariance J W cov3 W^T J^T before dilation.
Mat2 project_covariance_raw(const Camera& cam, const Vec3& mean_cam, const Mat3& cov3);

/// project_covariance_raw plus kCovarianceDilation on the diagonal.
Mat2 project_covariance(const Camera& cam, const Vec3& mean_cam, const Mat3& cov3);

/// Largest eigenvalue of a symmetric 2x2 matrix.
double max_eigenvalue(const Mat2& m);

}  // namespace splat4d
