#include <gtest/gtest.h>

#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "splat4d/camera.hpp"

namespace splat4d {
namespace {

Camera axis_camera(double f = 100.0) {
  Camera cam;
  cam.fx = cam.fy = f;
  cam.cx = 50.0;
  cam.cy = 50.0;
  cam.width = cam.height = 100;
  return cam;
}

TEST(Camera, OpticalAxisProjectsToPrincipalPoint) {
  const Camera cam = axis_camera();
  for (double z : {0.02, 1.0, 250.0}) {
    const auto p = project_point(cam, Vec3(0, 0, z));
    EXPECT_EQ(p.uv, Vec2(cam.cx, cam.cy));
    EXPECT_EQ(p.depth, z);
    EXPECT_TRUE(p.in_front);
  }
}

TEST(Camera, PinholeFormula) {
  const auto p = project_point(axis_camera(), Vec3(1, 0, 2));
  EXPECT_DOUBLE_EQ(p.uv.x(), 100.0);
  EXPECT_DOUBLE_EQ(p.uv.y(), 50.0);
}

TEST(Camera, NearPlaneSignal) {
  EXPECT_FALSE(project_point(axis_camera(), Vec3(0, 0, 0.001)).in_front);
  EXPECT_FALSE(project_point(axis_camera(), Vec3(0, 0, -3)).in_front);
}

TEST(Camera, LookAtPlacesTargetAtImageCenter) {
  const Camera cam = look_at(Vec3(2, 1, -3), Vec3(0.1, 0.2, 0.3), Vec3(0, 1, 0), 60, 60, 64, 48);
  EXPECT_NO_THROW(cam.validate());
  const auto p = project_point(cam, Vec3(0.1, 0.2, 0.3));
  EXPECT_NEAR(p.uv.x(), 32.0, 1e-12);
  EXPECT_NEAR(p.uv.y(), 24.0, 1e-12);
  EXPECT_LT((cam.center() - Vec3(2, 1, -3)).norm(), 1e-12);
  // World up lands in the upper half of the image.
  EXPECT_LT(project_point(cam, Vec3(0.1, 1.2, 0.3)).uv.y(), 24.0);
}

TEST(Camera, ValidateRejectsBadInput) {
  Camera cam = axis_camera();
  cam.world_to_camera(0, 0) = 1.1;
  EXPECT_THROW(cam.validate(), Error);
  cam = axis_camera();
  cam.near = 0.0;
  EXPECT_THROW(cam.validate(), Error);
  cam = axis_camera();
  cam.width = 0;
  EXPECT_THROW(cam.validate(), Error);
}

TEST(Projection, OnAxisIdentityCovariance) {
  const double f = 70.0;
  const Camera cam = axis_camera(f);
  const Mat2 c = project_covariance(cam, Vec3(0, 0, 1), Mat3::Identity());
  EXPECT_LT((c - (f * f + 0.3) * Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Projection, ZeroCovarianceIsDilationFloor) {
  const Mat2 c = project_covariance(axis_camera(), Vec3(0.2, -0.1, 3), Mat3::Zero());
  EXPECT_LT((c - 0.3 * Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Projection, DoublingDepthQuartersCovariance) {
  const Camera cam = axis_camera();
  Mat3 cov;
  cov << 0.2, 0.05, 0.0, 0.05, 0.1, 0.02, 0.0, 0.02, 0.3;
  const Mat2 a = project_covariance_raw(cam, Vec3(0, 0, 2), cov);
  const Mat2 b = project_covariance_raw(cam, Vec3(0, 0, 4), cov);
  EXPECT_LT((a - 4.0 * b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Projection, UsesCameraRotation) {
  Camera cam = look_at(Vec3(3, 0, 0), Vec3::Zero(), Vec3(0, 1, 0), 50, 50, 64, 64);
  const Mat3 cov = Vec3(1.0, 0.01, 0.01).asDiagonal();
  // The long axis points at the camera, so it collapses in the image.
  const Mat2 c = project_covariance_raw(cam, cam.to_camera(Vec3::Zero()), cov);
  EXPECT_LT(c.cwiseAbs().maxCoeff(), 0.01 * 50 * 50 / 9.0 * 1.0001);
}

TEST(Projection, MonteCarloAgreesWithLinearization) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  Camera cam = look_at(Vec3(0.5, 0.3, -5), Vec3::Zero(), Vec3(0, 1, 0), 200, 200, 256, 256);
  Mat3 cov;
  cov << 4.0, 1.0, 0.5, 1.0, 2.0, -0.3, 0.5, -0.3, 1.0;
  cov *= 1e-5;  // extent well under 0.01 z
  const Vec3 mean(0.2, -0.1, 0.3);
  const Mat3 l = cov.llt().matrixL();
  const int n = 200000;
  Vec2 sum = Vec2::Zero();
  Mat2 sq = Mat2::Zero();
  std::vector<Vec2> pts(n);
  for (int i = 0; i < n; ++i) {
    const Vec3 x = mean + l * Vec3(n01(rng), n01(rng), n01(rng));
    pts[i] = project_point(cam, x).uv;
    sum += pts[i];
  }
  const Vec2 mu = sum / n;
  for (const auto& p : pts) sq += (p - mu) * (p - mu).transpose();
  sq /= (n - 1);
  const Mat2 lin = project_covariance_raw(cam, cam.to_camera(mean), cov);
  EXPECT_LT((sq - lin).norm() / lin.norm(), 0.05);
}

TEST(Projection, DilatedOutputIsPositiveDefinite) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  const Camera cam = axis_camera();
  for (int i = 0; i < 200; ++i) {
    Mat3 a;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) a(r, c) = n01(rng);
    const Mat2 c2 = project_covariance(cam, Vec3(n01(rng), n01(rng), 2.0 + std::abs(n01(rng))), a * a.transpose());
    EXPECT_EQ(c2(0, 1), c2(1, 0));
    EXPECT_GT(c2.determinant(), 0.0);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Mat2>(c2).eigenvalues().minCoeff(), 0.3 - 1e-9);
  }
}

TEST(Projection, MaxEigenvalue) {
  Mat2 m;
  m << 3.0, 1.0, 1.0, 3.0;
  EXPECT_NEAR(max_eigenvalue(m), 4.0, 1e-12);
}

}  // namespace
}  // namespace splat4d
