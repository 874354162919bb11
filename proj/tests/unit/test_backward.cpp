#include <gtest/gtest.h>

#include <random>

#include "grad_check.hpp"
#include "splat4d/metrics.hpp"
#include "splat4d/optim.hpp"
#include "test_scenes.hpp"

namespace splat4d {
namespace {

Image random_image(int w, int h, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image img(w, h, 3);
  for (double& v : img.data) v = u(rng);
  return img;
}

BackwardOptions exact_options() {
  BackwardOptions o;
  o.render.truncate = false;
  return o;
}

TEST(Backward, ConstantOffsetLossHasClosedForm) {
  Image a(16, 16, 3, 0.5), b(16, 16, 3, 0.6);
  const double lambda = 0.2;
  const auto l = loss(b, a, lambda);
  EXPECT_NEAR(l.l1, 0.1, 1e-12);
  EXPECT_NEAR(l.total, (1.0 - lambda) * 0.1 + lambda * (1.0 - ssim(b, a)), 1e-12);
}

TEST(Backward, LossGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  Image r = random_image(14, 13, rng);
  const Image t = random_image(14, 13, rng);
  Image grad;
  loss_with_gradient(r, t, 0.2, grad);
  for (std::size_t i = 0; i < r.data.size(); i += 17) {
    const double orig = r.data[i];
    r.data[i] = orig + 1e-6;
    const double hi = loss(r, t, 0.2).total;
    r.data[i] = orig - 1e-6;
    const double lo = loss(r, t, 0.2).total;
    r.data[i] = orig;
    EXPECT_NEAR(grad.data[i], (hi - lo) / 2e-6, 1e-6);
  }
}

TEST(Backward, AnalyticMatchesFiniteDifferencesPerGroup) {
  std::mt19937_64 rng(17);
  const Scene scene = testing::random_scene(6, rng);
  const Camera cam = testing::front_camera(24, 24);
  const Image target = random_image(24, 24, rng);
  const auto rep = testing::grad_check(scene, cam, 0.5, target, Vec3(0.1, 0.2, 0.3), exact_options());
  EXPECT_LT(rep.max_rel_error, 1e-3) << "worst: gaussian " << rep.worst.gaussian << " slot "
                                     << rep.worst.slot << " (" << testing::slot_group(rep.worst.slot)
                                     << ") analytic " << rep.worst.analytic << " numeric "
                                     << rep.worst.numeric;
}

TEST(Backward, NoRotAblationGradientsMatch) {
  std::mt19937_64 rng(23);
  const Scene scene = testing::random_scene(5, rng);
  const Camera cam = testing::front_camera(20, 20);
  const Image target = random_image(20, 20, rng);
  BackwardOptions o = exact_options();
  o.render.covariance = CovarianceMode::kSpatialOnly;
  const auto rep = testing::grad_check(scene, cam, 0.5, target, Vec3::Zero(), o);
  EXPECT_LT(rep.max_rel_error, 1e-3) << "worst slot " << rep.worst.slot << " analytic "
                                     << rep.worst.analytic << " numeric " << rep.worst.numeric;
  const auto grads = backward(scene, cam, 0.5, target, Vec3::Zero(), o).grads;
  for (std::size_t i = 0; i < scene.size(); ++i)
    for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(grads[i * scene.stride() + Scene::kRotorRight + k], 0.0);
}

TEST(Backward, GradStatsAccumulateVisibleGaussians) {
  std::mt19937_64 rng(4);
  const Scene scene = testing::random_scene(10, rng);
  const Camera cam = testing::front_camera(24, 24);
  const Image target = random_image(24, 24, rng);
  GradStats stats;
  stats.reset(scene.size());
  std::vector<double> grads(scene.params().size(), 0.0);
  backward(scene, cam, 0.5, target, Vec3::Zero(), BackwardOptions{}, grads, 1.0, &stats);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    if (stats.count[i] > 0) {
      ++seen;
      EXPECT_GE(stats.view_grad_sum[i], 0.0);
      EXPECT_GT(stats.max_radius[i], 0.0);
    }
  }
  EXPECT_GT(seen, 0u);
}

}  // namespace
}  // namespace splat4d
