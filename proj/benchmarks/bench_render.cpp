#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "splat4d/geom4d.hpp"
#include "splat4d/optim.hpp"
#include "splat4d/raster.hpp"

using namespace splat4d;

namespace {

Vec4 random_unit4(std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  Vec4 q(n01(rng), n01(rng), n01(rng), n01(rng));
  return q.normalized();
}

Scene random_scene(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::normal_distribution<double> n01;
  ShConfig sh;
  Scene scene(sh, 1.0f);
  for (std::size_t i = 0; i < n; ++i) {
    Gaussian4D g;
    g.mean = Vec4(0.8 * u(rng), 0.8 * u(rng), 0.8 * u(rng), 0.5 + 0.2 * u(rng));
    for (int k = 0; k < 3; ++k) g.scales.log[k] = -2.2 + 0.8 * u(rng);
    g.scales.log[3] = -0.5 + 0.5 * u(rng);
    g.rotor.left = random_unit4(rng);
    g.rotor.right = random_unit4(rng);
    g.opacity_logit = logit(0.45 + 0.35 * u(rng));
    g.sh.resize(static_cast<std::size_t>(sh.coeff_count()));
    for (double& c : g.sh) c = 0.3 * n01(rng);
    scene.push_back(g);
  }
  return scene;
}

Camera bench_camera(int side) {
  const double f = 0.5 * side / std::tan(20.0 * 3.14159265358979 / 180.0);
  return look_at(Vec3(0.3, 0.4, -4.0), Vec3::Zero(), Vec3(0, 1, 0), f, f, side, side);
}

void BM_Render(benchmark::State& state) {
  const Scene scene = random_scene(static_cast<std::size_t>(state.range(0)), 1);
  const Camera cam = bench_camera(static_cast<int>(state.range(1)));
  RenderOptions opts;
  opts.threads = static_cast<int>(state.range(2));
  for (auto _ : state) benchmark::DoNotOptimize(render(scene, cam, 0.5, Vec3::Zero(), opts));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Render)
    ->ArgNames({"gaussians", "side", "threads"})
    ->Args({1000, 64, 1})
    ->Args({10000, 64, 1})
    ->Args({10000, 256, 1})
    ->Args({10000, 256, 4})
    ->Unit(benchmark::kMillisecond);

void BM_RenderFlow(benchmark::State& state) {
  const Scene scene = random_scene(static_cast<std::size_t>(state.range(0)), 2);
  const Camera cam = bench_camera(64);
  for (auto _ : state) benchmark::DoNotOptimize(render_flow(scene, cam, 0.5, 1.0 / 60.0));
}
BENCHMARK(BM_RenderFlow)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Backward(benchmark::State& state) {
  const Scene scene = random_scene(static_cast<std::size_t>(state.range(0)), 3);
  const Camera cam = bench_camera(static_cast<int>(state.range(1)));
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image target(cam.width, cam.height, 3);
  for (double& v : target.data) v = u(rng);
  BackwardOptions opts;
  opts.render.threads = static_cast<int>(state.range(2));
  std::vector<double> grads(scene.params().size());
  for (auto _ : state) {
    std::fill(grads.begin(), grads.end(), 0.0);
    benchmark::DoNotOptimize(backward(scene, cam, 0.5, target, Vec3::Zero(), opts, grads));
  }
}
BENCHMARK(BM_Backward)
    ->ArgNames({"gaussians", "side", "threads"})
    ->Args({500, 64, 1})
    ->Args({5000, 64, 1})
    ->Args({5000, 64, 4})
    ->Unit(benchmark::kMillisecond);

void BM_Covariance(benchmark::State& state) {
  const Scene scene = random_scene(1024, 5);
  std::size_t i = 0;
  for (auto _ : state) {
    const Gaussian4D g = scene.gaussian(i++ & 1023);
    benchmark::DoNotOptimize(condition_at_time(g, 0.4));
  }
}
BENCHMARK(BM_Covariance);

}  // namespace

BENCHMARK_MAIN();
