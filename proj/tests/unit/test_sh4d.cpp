#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "splat4d/sh4d.hpp"
#include "sphere_quadrature.hpp"

namespace splat4d {
namespace {

TEST(Sh, ConstantBasisEverywhere) {
  ShConfig cfg;
  for (const Vec3& d : {Vec3(1, 0, 0), Vec3(0, -1, 0), Vec3(0.3, 0.4, 0.5).normalized()}) {
    for (double t : {0.0, 0.3, 0.77}) EXPECT_NEAR(eval_basis(cfg, d, t).values[0], 0.2820948, 1e-7);
  }
}

TEST(Sh, FirstFourierOrderMatchesStaticAtZeroTime) {
  ShConfig cfg;
  const auto b = eval_basis(cfg, Vec3(0.2, -0.5, 0.7).normalized(), 0.0);
  for (int k = 0; k < cfg.sh_count(); ++k) EXPECT_DOUBLE_EQ(b.values[k + cfg.sh_count()], b.values[k]);
}

TEST(Sh, QuarterPeriodZeroesFirstOrder) {
  ShConfig cfg;
  cfg.period = 2.0;
  const auto b = eval_basis(cfg, Vec3(0.2, -0.5, 0.7).normalized(), 0.5);
  for (int k = 0; k < cfg.sh_count(); ++k) EXPECT_NEAR(b.values[k + cfg.sh_count()], 0.0, 1e-7);
}

TEST(Sh, NonUnitDirectionIsNormalizedAndFlagged) {
  ShConfig cfg;
  const auto a = eval_basis(cfg, Vec3(0, 0, 3), 0.1);
  const auto b = eval_basis(cfg, Vec3(0, 0, 1), 0.1);
  EXPECT_TRUE(a.renormalized);
  EXPECT_FALSE(b.renormalized);
  for (std::size_t k = 0; k < a.values.size(); ++k) EXPECT_NEAR(a.values[k], b.values[k], 1e-15);
  EXPECT_THROW(eval_basis(cfg, Vec3::Zero(), 0.0), Error);
}

// Closed forms of the degree 1 and 2 real harmonics in the graphics sign
// convention, written independently of the library tables.
TEST(Sh, MatchesClosedFormHarmonics) {
  const Vec3 d = Vec3(0.3, -0.6, 0.74).normalized();
  const double x = d.x(), y = d.y(), z = d.z();
  const double pi = std::numbers::pi;
  const double c1 = std::sqrt(3.0 / (4.0 * pi));
  const double c2 = 0.5 * std::sqrt(15.0 / pi);
  const double c20 = 0.25 * std::sqrt(5.0 / pi);
  const std::vector<double> expected = {0.5 / std::sqrt(pi), -c1 * y, c1 * z, -c1 * x,
                                        c2 * x * y, -c2 * y * z, c20 * (3 * z * z - 1), -c2 * x * z,
                                        0.5 * c2 * (x * x - y * y)};
  std::vector<double> out(9);
  eval_sh(2, d, out);
  for (int k = 0; k < 9; ++k) EXPECT_NEAR(out[k], expected[k], 1e-12) << "k=" << k;
}

TEST(Sh, GradientMatchesFiniteDifferences) {
  const Vec3 d = Vec3(0.5, 0.1, -0.3);
  std::vector<Vec3> grad(16);
  eval_sh_gradient(3, d, grad);
  for (int axis = 0; axis < 3; ++axis) {
    Vec3 hi = d, lo = d;
    hi[axis] += 1e-6;
    lo[axis] -= 1e-6;
    std::vector<double> a(16), b(16);
    eval_sh(3, hi, a);
    eval_sh(3, lo, b);
    for (int k = 0; k < 16; ++k) EXPECT_NEAR(grad[k][axis], (a[k] - b[k]) / 2e-6, 1e-7);
  }
}

TEST(Color, ZeroCoefficientsGiveGray) {
  ShConfig cfg;
  std::vector<double> c(cfg.coeff_count(), 0.0);
  const Vec3 rgb = eval_color(c, cfg, Vec3(0, 0, 1), 0.3);
  EXPECT_EQ(rgb, Vec3::Constant(0.5));
}

TEST(Color, DcOnlyIsAffine) {
  ShConfig cfg;
  std::vector<double> c(cfg.coeff_count(), 0.0);
  for (int ch = 0; ch < 3; ++ch) c[ch * cfg.basis_size()] = 0.7 + ch;
  const Vec3 rgb = eval_color(c, cfg, Vec3(1, 0, 0), 0.0);
  for (int ch = 0; ch < 3; ++ch) EXPECT_NEAR(rgb[ch], 0.2820948 * (0.7 + ch) + 0.5, 1e-7);
  EXPECT_NEAR(dc_to_rgb(rgb_to_dc(0.8)), 0.8, 1e-15);
}

TEST(Color, NegativeValuesClampToZero) {
  ShConfig cfg;
  std::vector<double> c(cfg.coeff_count(), 0.0);
  c[0] = -1.5 / kShC0;
  EXPECT_EQ(eval_color(c, cfg, Vec3(0, 1, 0), 0.0)[0], 0.0);
}

TEST(Color, LinearBeforeClamp) {
  ShConfig cfg;
  std::vector<double> c(cfg.coeff_count());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.01 * std::sin(1.0 + 3.0 * i);
  std::vector<double> scaled = c;
  for (double& v : scaled) v *= 2.5;
  const Vec3 d = Vec3(1, 2, 3).normalized();
  const Vec3 a = eval_color(c, cfg, d, 0.2) - Vec3::Constant(0.5);
  const Vec3 b = eval_color(scaled, cfg, d, 0.2) - Vec3::Constant(0.5);
  EXPECT_LT((b - 2.5 * a).norm(), 1e-14);
}

TEST(Color, WrongCoefficientCountThrows) {
  ShConfig cfg;
  std::vector<double> c(cfg.coeff_count() - 1, 0.0);
  try {
    eval_color(c, cfg, Vec3(1, 0, 0), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kShapeMismatch);
  }
}

TEST(Config, ValidatesDegrees) {
  ShConfig cfg;
  cfg.l_max = 4;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.l_max = 2;
  cfg.period = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  EXPECT_EQ(ShConfig{}.coeff_count(), 54);
}

TEST(Orthonormality, GramMatrixIsIdentityUpToDegreeThree) {
  for (int l_max : {1, 3}) {
    for (int n_max : {0, 2}) {
      ShConfig cfg;
      cfg.l_max = l_max;
      cfg.n_max = n_max;
      cfg.period = 1.5;
      const Eigen::MatrixXd gram = testing::spherindrical_gram(cfg, 64, 128, 256);
      const double err = (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
      EXPECT_LT(err, 1e-3) << "l_max " << l_max << " n_max " << n_max;
    }
  }
}

}  // namespace
}  // namespace splat4d
