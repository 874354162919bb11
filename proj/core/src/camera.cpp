#include "splat4d/camera.hpp"

#include <cassert>
#include <cmath>

#include <Eigen/Geometry>

namespace splat4d {

void Camera::validate() const {
  const Mat3 r = rotation();
  if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    throw Error(Errc::kInvalidArgument, "camera '" + id + "' rotation is not orthonormal");
  }
  if (!(near > 0.0)) throw Error(Errc::kInvalidArgument, "camera '" + id + "' near must be > 0");
  if (width <= 0 || height <= 0) {
    throw Error(Errc::kInvalidArgument, "camera '" + id + "' has empty image size");
  }
}

Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up, double fx, double fy,
               int width, int height, std::string id) {
  const Vec3 forward = (target - eye).normalized();
  const Vec3 right = forward.cross(up).normalized();
  const Vec3 down = forward.cross(right);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  Camera cam;
  cam.id = std::move(id);
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  cam.width = width;
  cam.height = height;
  cam.world_to_camera.setIdentity();
  cam.world_to_camera.topLeftCorner<3, 3>() = r;
  cam.world_to_camera.block<3, 1>(0, 3) = -r * eye;
  return cam;
}

ProjectedPoint project_point(const Camera& cam, const Vec3& world) {
  const Vec3 p = cam.to_camera(world);
  ProjectedPoint out;
  out.depth = p.z();
  out.in_front = p.z() > cam.near;
  if (out.in_front) {
    out.uv = Vec2(cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy);
  }
  return out;
}

Eigen::Matrix<double, 2, 3> perspective_jacobian(const Camera& cam, const Vec3& mean_cam) {
  const double z = mean_cam.z();
  const double inv_z = 1.0 / z;
  Eigen::Matrix<double, 2, 3> j;
  j << cam.fx * inv_z, 0.0, -cam.fx * mean_cam.x() * inv_z * inv_z,
       0.0, cam.fy * inv_z, -cam.fy * mean_cam.y() * inv_z * inv_z;
  return j;
}

Mat2 project_covariance_raw(const Camera& cam, const Vec3& mean_cam, const Mat3& cov3) {
  const Eigen::Matrix<double, 2, 3> t = perspective_jacobian(cam, mean_cam) * cam.rotation();
  const Mat2 cov = t * cov3 * t.transpose();
  return 0.5 * (cov + cov.transpose());
}

Mat2 project_covariance(const Camera& cam, const Vec3& mean_cam, const Mat3& cov3) {
  Mat2 cov = project_covariance_raw(cam, mean_cam, cov3);
  cov.diagonal().array() += kCovarianceDilation;
  assert(cov.determinant() > 0.0);
  return cov;
}

double max_eigenvalue(const Mat2& m) {
  const double mid = 0.5 * (m(0, 0) + m(1, 1));
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return mid + std::sqrt(std::max(mid * mid - det, 0.0));
}

}  // namespace splat4d
