#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numeric>
#include <random>

#include "splat4d/init.hpp"
#include "splat4d/optim.hpp"
#include "splat4d/synthetic.hpp"
#include "test_scenes.hpp"

namespace splat4d {
namespace {

TEST(Adam, ZeroGradientLeavesParametersAndDecaysMoments) {
  std::vector<float> p = {1.0f, -2.0f};
  AdamState st;
  st.m = {0.5, -0.5};
  st.v = {0.25, 0.25};
  st.step = 3;
  adam_step(p, std::vector<double>{0.0, 0.0}, st, 0.1);
  EXPECT_EQ(p[0], 1.0f - static_cast<float>(0.1 * (0.45 / (1 - std::pow(0.9, 4))) /
                                             (std::sqrt(0.24975 / (1 - std::pow(0.999, 4))) + 1e-15)));
  EXPECT_NEAR(st.m[0], 0.45, 1e-15);
  EXPECT_NEAR(st.v[0], 0.24975, 1e-15);
  std::vector<float> q = {1.0f};
  AdamState fresh;
  adam_step(q, std::vector<double>{0.0}, fresh, 0.1);
  EXPECT_EQ(q[0], 1.0f);
}

TEST(Adam, FirstStepIsSignTimesLearningRate) {
  std::vector<float> p = {0.0f, 0.0f, 0.0f};
  AdamState st;
  adam_step(p, std::vector<double>{0.3, -2.0, 6.0}, st, 0.01);
  EXPECT_NEAR(p[0], -0.01, 1e-9);
  EXPECT_NEAR(p[1], 0.01, 1e-9);
  EXPECT_NEAR(p[2], -0.01, 1e-9);
  EXPECT_EQ(st.step, 1);
}

TEST(Adam, ScaleInvariantOnFirstStep) {
  std::vector<float> p = {1.0f, 1.0f};
  AdamState st;
  adam_step(p, std::vector<double>{0.4, 0.8}, st, 0.05);
  EXPECT_NEAR(p[0], p[1], 1e-7);
}

TEST(SampleBatch, UniformWithReplacement) {
  std::vector<std::size_t> frames(300);
  std::iota(frames.begin(), frames.end(), 1000);
  std::mt19937_64 rng(1);
  std::vector<int> hits(300, 0);
  const int draws = 100000;
  for (int i = 0; i < draws / 10; ++i)
    for (std::size_t f : sample_batch(frames, 10, rng)) ++hits[f - 1000];
  const double expected = static_cast<double>(draws) / 300;
  double chi2 = 0.0;
  for (int h : hits) chi2 += (h - expected) * (h - expected) / expected;
  // 299 degrees of freedom: mean 299, sd ~24.5; allow 3 sd.
  EXPECT_LT(chi2, 299 + 3 * std::sqrt(2.0 * 299));
  EXPECT_EQ(sample_batch(frames, 1, rng).size(), 1u);
}

TEST(SampleBatch, DeterministicForSeed) {
  std::vector<std::size_t> frames = {3, 5, 8, 13};
  std::mt19937_64 a(9), b(9);
  for (int i = 0; i < 20; ++i) EXPECT_EQ(sample_batch(frames, 8, a), sample_batch(frames, 8, b));
}

TEST(Loss, IdentityAndPureL1) {
  Image a(16, 16, 3, 0.2);
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] = 0.1 + 0.001 * (i % 97);
  EXPECT_NEAR(loss(a, a, 0.2).total, 0.0, 1e-12);
  Image b = a;
  for (double& v : b.data) v += 0.05;
  EXPECT_NEAR(loss(b, a, 0.0).total, 0.05, 1e-12);
  EXPECT_THROW(loss(a, Image(16, 15, 3), 0.2), Error);
}

TEST(Backward, SelfTargetGivesZeroGradient) {
  std::mt19937_64 rng(2);
  const Scene scene = testing::random_scene(15, rng);
  const Camera cam = testing::front_camera(24, 24);
  const Image target = render(scene, cam, 0.5, Vec3::Zero()).color;
  const auto res = backward(scene, cam, 0.5, target, Vec3::Zero(), BackwardOptions{});
  EXPECT_NEAR(res.loss.total, 0.0, 1e-12);
  for (double g : res.grads) EXPECT_NEAR(g, 0.0, 1e-7);
}

TEST(Backward, BatchOrderDoesNotMatter) {
  std::mt19937_64 rng(3);
  const Scene scene = testing::random_scene(15, rng);
  const Camera a = testing::front_camera(24, 24, 4.0), b = testing::front_camera(24, 24, 5.0);
  std::uniform_real_distribution<double> u;
  Image ta(24, 24, 3), tb(24, 24, 3);
  for (double& v : ta.data) v = u(rng);
  for (double& v : tb.data) v = u(rng);
  std::vector<double> g1(scene.params().size(), 0.0), g2(g1.size(), 0.0);
  backward(scene, a, 0.4, ta, Vec3::Zero(), BackwardOptions{}, g1, 0.5);
  backward(scene, b, 0.6, tb, Vec3::Zero(), BackwardOptions{}, g1, 0.5);
  backward(scene, b, 0.6, tb, Vec3::Zero(), BackwardOptions{}, g2, 0.5);
  backward(scene, a, 0.4, ta, Vec3::Zero(), BackwardOptions{}, g2, 0.5);
  for (std::size_t i = 0; i < g1.size(); ++i) EXPECT_NEAR(g1[i], g2[i], 1e-12);
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.densify_until_fraction = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.lr.opacity = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = TrainConfig{};
  cfg.batch_size = 0;
  EXPECT_THROW(cfg.validate(), Error);
}

SyntheticScene tiny_dataset() {
  SyntheticSpec spec = three_blobs_preset();
  spec.ring_cameras = 4;
  spec.test_camera = 3;
  spec.timesteps = 5;
  spec.width = spec.height = 24;
  std::mt19937_64 rng(5);
  return make_synthetic_scene(spec, rng);
}

TEST(Train, ZeroIterationsReturnsSceneUnchanged) {
  const auto syn = tiny_dataset();
  std::mt19937_64 rng(6);
  const Scene init = init_random_cube(30, 1.0, 1.0, InitConfig{}, rng);
  TrainConfig cfg;
  cfg.iterations = 0;
  const auto res = train(syn.dataset, init, cfg, rng);
  ASSERT_EQ(res.scene.params().size(), init.params().size());
  EXPECT_EQ(std::memcmp(res.scene.params().data(), init.params().data(), init.params().size() * sizeof(float)), 0);
  EXPECT_TRUE(res.metrics.empty());
}

TEST(Train, SameSeedGivesIdenticalMetrics) {
  const auto syn = tiny_dataset();
  TrainConfig cfg;
  cfg.iterations = 40;
  cfg.batch_size = 2;
  cfg.densify_from = 10;
  cfg.densify_interval = 10;
  cfg.log_interval = 5;
  cfg.eval_interval = 20;
  auto run = [&]() {
    std::mt19937_64 rng(7);
    const Scene init = init_random_cube(60, 1.0, 1.0, InitConfig{}, rng);
    return train(syn.dataset, init, cfg, rng);
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.metrics.size(), b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    EXPECT_EQ(a.metrics[i].iteration, b.metrics[i].iteration);
    EXPECT_EQ(a.metrics[i].loss, b.metrics[i].loss);
    EXPECT_EQ(a.metrics[i].l1, b.metrics[i].l1);
    EXPECT_EQ(a.metrics[i].ssim, b.metrics[i].ssim);
    EXPECT_EQ(a.metrics[i].num_gaussians, b.metrics[i].num_gaussians);
    EXPECT_EQ(a.metrics[i].psnr_holdout, b.metrics[i].psnr_holdout);
  }
  EXPECT_EQ(std::vector<float>(a.scene.params().begin(), a.scene.params().end()),
            std::vector<float>(b.scene.params().begin(), b.scene.params().end()));
}

TEST(Train, LossTrendsDownOverFiveHundredIterationWindows) {
  SyntheticSpec spec = three_blobs_preset();
  spec.ring_cameras = 4;
  spec.test_camera = 3;
  spec.timesteps = 6;
  spec.width = spec.height = 16;
  std::mt19937_64 rng(11);
  const auto syn = make_synthetic_scene(spec, rng);
  TrainConfig cfg;
  cfg.iterations = 1500;
  cfg.batch_size = 2;
  cfg.log_interval = 1;
  cfg.eval_interval = 0;
  const Scene init = init_random_cube(150, 1.0, 1.0, InitConfig{}, rng);
  const auto res = train(syn.dataset, init, cfg, rng);
  ASSERT_EQ(res.metrics.size(), 1500u);
  auto window_mean = [&](int start) {
    double sum = 0.0;
    for (int i = start; i < start + 500; ++i) sum += res.metrics[static_cast<std::size_t>(i)].loss;
    return sum / 500.0;
  };
  // Mini-batch noise is absorbed by a 10% allowance.
  for (int s = 0; s + 1000 <= 1500; s += 100)
    EXPECT_LE(window_mean(s + 500), 1.1 * window_mean(s)) << "windows starting at " << s;
  EXPECT_LT(window_mean(1000), window_mean(0));
}

TEST(Train, DensificationStopsAtMidpoint) {
  const auto syn = tiny_dataset();
  TrainConfig cfg;
  cfg.iterations = 60;
  cfg.batch_size = 1;
  cfg.densify_from = 5;
  cfg.densify_interval = 5;
  cfg.eval_interval = 0;
  std::mt19937_64 rng(8);
  const Scene init = init_random_cube(40, 1.0, 1.0, InitConfig{}, rng);
  const auto res = train(syn.dataset, init, cfg, rng);
  ASSERT_FALSE(res.densify.empty());
  for (const auto& d : res.densify) EXPECT_LT(d.iteration, 30);
  EXPECT_EQ(res.densify.back().iteration, 25);
}

TEST(Train, NoRotAblationKeepsConditionalMeansStatic) {
  const auto syn = tiny_dataset();
  TrainConfig cfg;
  cfg.iterations = 20;
  cfg.batch_size = 2;
  cfg.ablation_no_4drot = true;
  cfg.eval_interval = 0;
  std::mt19937_64 rng(9);
  const Scene init = init_random_cube(30, 1.0, 1.0, InitConfig{}, rng);
  const auto res = train(syn.dataset, init, cfg, rng);
  for (std::size_t i = 0; i < res.scene.size(); ++i) {
    const Gaussian4D g = res.scene.gaussian(i);
    const Vec3 a = condition_at_time(g, 0.0, CovarianceMode::kSpatialOnly).mean;
    const Vec3 b = condition_at_time(g, 1.0, CovarianceMode::kSpatialOnly).mean;
    EXPECT_EQ(a, b);
    EXPECT_EQ(g.rotor.right, init.gaussian(i).rotor.right);
  }
}

TEST(Train, NoShAblationDropsFourierTerms) {
  const auto syn = tiny_dataset();
  TrainConfig cfg;
  cfg.iterations = 2;
  cfg.batch_size = 1;
  cfg.ablation_no_4dsh = true;
  std::mt19937_64 rng(10);
  const Scene init = init_random_cube(10, 1.0, 1.0, InitConfig{}, rng);
  const auto res = train(syn.dataset, init, cfg, rng);
  EXPECT_EQ(res.scene.sh_config().n_max, 0);
  EXPECT_EQ(res.scene.sh_config().l_max, init.sh_config().l_max);
}

}  // namespace
}  // namespace splat4d
