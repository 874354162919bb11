#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "splat4d/geom4d.hpp"
#include "test_scenes.hpp"

namespace splat4d {
namespace {

using testing::random_unit4;

// Hamilton product written out by hand, independent of the library's
// isoclinic matrices.
Vec4 qmul(const Vec4& a, const Vec4& b) {
  return Vec4(a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
              a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
              a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
              a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0]);
}

Gaussian4D random_gaussian(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Gaussian4D g;
  g.mean = Vec4(u(rng), u(rng), u(rng), u(rng));
  for (int k = 0; k < 4; ++k) g.scales.log[k] = 1.2 * u(rng);
  g.rotor.left = random_unit4(rng);
  g.rotor.right = random_unit4(rng);
  return g;
}

TEST(Rotor, IdentityPairGivesIdentity) {
  EXPECT_TRUE(rotor_to_matrix(Rotor4{}).isApprox(Mat4::Identity(), 0.0));
}

TEST(Rotor, QuarterTurnPairFlipsXY) {
  Rotor4 r{Vec4(0, 1, 0, 0), Vec4(0, 1, 0, 0)};
  Mat4 expected = Vec4(-1, -1, 1, 1).asDiagonal();
  EXPECT_LT((rotor_to_matrix(r) - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Rotor, MatrixActsAsLeftTimesVectorTimesRight) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    Rotor4 r{random_unit4(rng), random_unit4(rng)};
    const Vec4 v = random_unit4(rng);
    const Vec4 expected = qmul(qmul(r.left, v), r.right);
    EXPECT_LT((rotor_to_matrix(r) * v - expected).norm(), 1e-12);
  }
}

TEST(Rotor, RandomPairsAreProperRotations) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 2000; ++i) {
    const Mat4 r = rotor_to_matrix({random_unit4(rng), random_unit4(rng)});
    EXPECT_LT((r.transpose() * r - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-10);
  }
}

TEST(Rotor, UnnormalizedInputIsNormalized) {
  std::mt19937_64 rng(3);
  const Rotor4 unit{random_unit4(rng), random_unit4(rng)};
  const Rotor4 scaled{3.7 * unit.left, 0.2 * unit.right};
  EXPECT_LT((rotor_to_matrix(unit) - rotor_to_matrix(scaled)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Rotor, SignPairEquivalenceIsExact) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const Rotor4 r{random_unit4(rng), random_unit4(rng)};
    EXPECT_EQ(rotor_to_matrix(r), rotor_to_matrix(Rotor4{-r.left, -r.right}));
  }
}

TEST(Rotor, DegenerateQuaternionThrows) {
  Rotor4 r{Vec4::Zero(), Vec4(1, 0, 0, 0)};
  try {
    rotor_to_matrix(r);
    FAIL() << "expected an exception";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDegenerateRotor);
  }
  EXPECT_THROW(rotor_to_matrix(Rotor4{Vec4(1, 0, 0, 0), Vec4::Constant(1e-14)}), Error);
}

TEST(Rotor, MatrixToRotorRoundTrip) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const Mat4 r = rotor_to_matrix({random_unit4(rng), random_unit4(rng)});
    const Rotor4 back = matrix_to_rotor(r);
    EXPECT_NEAR(back.left.norm(), 1.0, 1e-12);
    EXPECT_NEAR(back.right.norm(), 1.0, 1e-12);
    EXPECT_LT((rotor_to_matrix(back) - r).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Rotor, SpatialOnlyModeIsBlockDiagonal) {
  std::mt19937_64 rng(6);
  const Rotor4 r{random_unit4(rng), random_unit4(rng)};
  const Mat4 m = rotation_matrix(r, CovarianceMode::kSpatialOnly);
  EXPECT_EQ(m(3, 3), 1.0);
  for (int k = 0; k < 3; ++k) {
    EXPECT_EQ(m(3, k), 0.0);
    EXPECT_EQ(m(k, 3), 0.0);
  }
  const Mat4 changed = rotation_matrix(Rotor4{r.left, random_unit4(rng)}, CovarianceMode::kSpatialOnly);
  EXPECT_EQ(m, changed);
  EXPECT_NEAR(m.determinant(), 1.0, 1e-12);
}

TEST(Covariance, IdentityRotorGivesSquaredScales) {
  Scales4 s;
  s.log = Vec4(0.0, std::log(2.0), std::log(3.0), std::log(4.0));
  const Mat4 cov = build_covariance(s, Rotor4{});
  EXPECT_LT((cov - Mat4(Vec4(1, 4, 9, 16).asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Covariance, FlipRotorSignsSquareAway) {
  Scales4 s;
  s.log = Vec4(0.0, std::log(2.0), 0.0, 0.0);
  const Mat4 cov = build_covariance(s, Rotor4{Vec4(0, 1, 0, 0), Vec4(0, 1, 0, 0)});
  EXPECT_LT((cov - Mat4(Vec4(1, 4, 1, 1).asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Covariance, SymmetricPositiveDefiniteWithScaleDeterminant) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 500; ++i) {
    const Gaussian4D g = random_gaussian(rng);
    const Mat4 cov = build_covariance(g);
    EXPECT_EQ(cov, cov.transpose());
    Eigen::SelfAdjointEigenSolver<Mat4> es(cov);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
    const double expected = std::pow(g.scales.activated().prod(), 2);
    EXPECT_NEAR(cov.determinant() / expected, 1.0, 1e-9);
  }
}

TEST(Covariance, ScaleFloorKeepsCovarianceInvertible) {
  Scales4 s;
  s.log = Vec4::Constant(-100.0);
  EXPECT_DOUBLE_EQ(s.activated()[0], kScaleFloor);
  const Mat4 cov = build_covariance(s, Rotor4{});
  EXPECT_GT(cov.determinant(), 0.0);
}

TEST(Covariance, DecomposeReproducesCovariance) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const Gaussian4D g = random_gaussian(rng);
    const Mat4 cov = build_covariance(g);
    const ScalesRotor sr = decompose_covariance(cov);
    EXPECT_LT((build_covariance(sr.scales, sr.rotor) - cov).cwiseAbs().maxCoeff(), 1e-9 * cov.norm());
  }
}

TEST(Conditioning, BlockDiagonalIsIdentityOnSpatialBlock) {
  Mat4 cov = Mat4::Zero();
  cov.topLeftCorner<3, 3>() << 2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5;
  cov(3, 3) = 0.7;
  const Vec4 mean(0.1, 0.2, 0.3, 0.4);
  for (double t : {-1.0, 0.4, 3.0}) {
    const auto c = condition_on_time(mean, cov, t);
    EXPECT_EQ(c.mean, Vec3(mean.head<3>()));
    EXPECT_EQ(c.cov, Mat3(cov.topLeftCorner<3, 3>()));
  }
}

TEST(Conditioning, CoupledExampleShiftsMeanAndShrinksCovariance) {
  Mat4 cov = Mat4::Identity();
  cov(0, 3) = cov(3, 0) = 0.5;
  const auto c = condition_on_time(Vec4::Zero(), cov, 2.0);
  EXPECT_NEAR((c.mean - Vec3(1.0, 0.0, 0.0)).norm(), 0.0, 1e-15);
  Mat3 expected = Mat3::Identity();
  expected(0, 0) -= 0.25;
  EXPECT_LT((c.cov - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Conditioning, AtMeanTimeReturnsSpatialMean) {
  std::mt19937_64 rng(9);
  const Gaussian4D g = random_gaussian(rng);
  const auto c = condition_at_time(g, g.mean[3]);
  EXPECT_LT((c.mean - g.mean.head<3>()).norm(), 1e-15);
  EXPECT_EQ(c.cov, c.cov.transpose());
}

TEST(Conditioning, TimeVarianceBelowFloorThrows) {
  Mat4 cov = Mat4::Identity();
  cov(3, 3) = 1e-15;
  try {
    condition_on_time(Vec4::Zero(), cov, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDegenerateTimeExtent);
  }
  EXPECT_THROW(marginal_value(0.0, 1e-15, 0.0), Error);
}

TEST(Conditioning, DeterminantFactorizes) {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 200; ++i) {
    const Gaussian4D g = random_gaussian(rng);
    const Mat4 cov = build_covariance(g);
    const auto c = condition_on_time(g.mean, cov, 0.3);
    EXPECT_NEAR(cov(3, 3) * c.cov.determinant() / cov.determinant(), 1.0, 1e-9);
  }
}

TEST(Marginal, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(marginal_value(0.3, 0.04, 0.3), 1.0);
  EXPECT_NEAR(marginal_value(0.3, 0.04, 0.5), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(marginal_value(0.0, 1.0, 2.4477), 0.05, 1e-4);
  EXPECT_NEAR(marginal_value(0.0, 1.0, -2.4477), 0.05, 1e-4);
}

TEST(Density, ClosedFormValues) {
  EXPECT_DOUBLE_EQ(eval_density(Vec4(1, 2, 3, 4), Mat4::Identity(), Vec4(1, 2, 3, 4)), 1.0);
  EXPECT_NEAR(eval_density(Vec4::Zero(), Mat4::Identity(), Vec4(1, 0, 0, 0)), std::exp(-0.5), 1e-15);
  EXPECT_THROW(eval_density(Vec4::Zero(), Mat4::Zero(), Vec4::Zero()), Error);
}

TEST(Density, JointEqualsMarginalTimesConditional) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  for (int i = 0; i < 300; ++i) {
    const Gaussian4D g = random_gaussian(rng);
    const Mat4 cov = build_covariance(g);
    for (int k = 0; k < 5; ++k) {
      const Vec4 x = g.mean + 0.5 * Vec4(n01(rng), n01(rng), n01(rng), n01(rng));
      const double joint = eval_density(g, x);
      const double factored = marginal_value(g.mean[3], cov(3, 3), x[3]) *
                              eval_density(condition_on_time(g.mean, cov, x[3]), Vec3(x.head<3>()));
      EXPECT_NEAR(factored / joint, 1.0, 1e-9);
    }
  }
}

TEST(Activation, SigmoidAndLogitInvert) {
  for (double p : {0.005, 0.1, 0.5, 0.99}) EXPECT_NEAR(sigmoid(logit(p)), p, 1e-14);
  EXPECT_GT(sigmoid(-800.0), -1.0);
  EXPECT_LE(sigmoid(800.0), 1.0);
}

}  // namespace
}  // namespace splat4d
