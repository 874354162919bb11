#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "splat4d/dataset.hpp"
#include "splat4d/raster.hpp"
#include "splat4d/scene.hpp"

namespace splat4d {

struct LearningRates {
  double position_spatial = 1.6e-4;        // x scene extent
  double position_spatial_final = 1.6e-6;  // x scene extent, exponential decay target
  double position_temporal = 1.6e-4;       // x duration
  double sh = 2.5e-3;
  double dc_sh = 2.5e-3;
  double opacity = 0.05;
  double scales = 5e-3;
  double rotor = 1e-3;
};

struct TrainConfig {
  int iterations = 30000;
  int batch_size = 8;
  double loss_lambda = 0.2;
  LearningRates lr;

  double densify_until_fraction = 0.5;
  int densify_from = 500;
  int densify_interval = 100;
  int opacity_reset_interval = 3000;
  double grad_threshold_spatial = 2e-4;   // pixels
  double grad_threshold_temporal = 2e-4;  // x duration
  double opacity_prune_threshold = 0.005;
  double percent_dense = 0.01;
  double split_scale_factor = 1.6;
  double max_screen_fraction = 0.8;
  double max_scale_fraction = 0.25;

  bool ablation_no_4drot = false;
  bool ablation_no_4dsh = false;
  bool ablation_no_time_split = false;

  /// Apply the temporal marginal cull while training as well as rendering.
  bool cull_in_training = true;
  int threads = 1;
  int log_interval = 10;
  int eval_interval = 500;  // 0 disables held-out PSNR

  /// Throws kInvalidArgument on out-of-range values.
  void validate() const;

  RenderOptions render_options() const;
};

/// Per-Gaussian densification statistics, accumulated per observed view.
struct GradStats {
  std::vector<double> view_grad_sum;  // |dL/dmean2d| in pixels
  std::vector<double> time_grad_sum;  // |dL/dmu_t|
  std::vector<double> max_radius;     // screen radius in pixels
  std::vector<std::uint32_t> count;

  void reset(std::size_t n);
  std::size_t size() const { return count.size(); }
};

struct LossValue {
  double total = 0.0;
  double l1 = 0.0;
  double ssim = 1.0;
};

/// (1 - lambda) * L1 + lambda * (1 - SSIM).
LossValue loss(const Image& rendered, const Image& target, double lambda);

/// loss() plus dL/d rendered written into `grad`.
LossValue loss_with_gradient(const Image& rendered, const Image& target, double lambda,
                             Image& grad);

struct BackwardOptions {
  double loss_lambda = 0.2;
  RenderOptions render;
};

/// Renders (scene, cam, t), evaluates the loss against `target`, and adds
/// `scale` times the gradient of every stored parameter into `grads`
/// (layout of Scene::params()). Updates `stats` when non-null.
LossValue backward(const Scene& scene, const Camera& cam, double t, const Image& target,
                   const Vec3& background, const BackwardOptions& opts, std::span<double> grads,
                   double scale = 1.0, GradStats* stats = nullptr);

struct BackwardResult {
  LossValue loss;
  std::vector<double> grads;
};

BackwardResult backward(const Scene& scene, const Camera& cam, double t, const Image& target,
                        const Vec3& background, const BackwardOptions& opts);

/// `batch_size` frame indices drawn uniformly with replacement from `frames`.
std::vector<std::size_t> sample_batch(std::span<const std::size_t> frames, int batch_size,
                                      std::mt19937_64& rng);

struct AdamHyper {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-15;
};

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
};

/// One bias-corrected Adam update with a single learning rate.
void adam_step(std::span<float> params, std::span<const double> grads, AdamState& state,
               double lr, const AdamHyper& hyper = {});

/// Adam over a Scene: per-record-slot learning rates and moment bookkeeping
/// across densification.
class SceneOptimizer {
 public:
  SceneOptimizer(const Scene& scene, const TrainConfig& cfg, double spatial_extent);

  /// Learning rates at `iteration` (position decays exponentially).
  void set_iteration(int iteration);
  void step(Scene& scene, std::span<const double> grads);

  /// `origin[i]` is the old index of surviving Gaussian i, or -1 for new ones
  /// (zeroed moments).
  void remap(const std::vector<std::int64_t>& origin);
  void reset_opacity_moments();

  double spatial_position_lr() const { return slot_lr_[Scene::kMean]; }
  double temporal_position_lr() const { return slot_lr_[Scene::kMean + 3]; }

 private:
  std::size_t stride_;
  std::size_t dc_slots_;
  TrainConfig cfg_;
  double extent_;
  double duration_;
  std::vector<double> slot_lr_;
  AdamState state_;
};

struct MetricsRow {
  int iteration = 0;
  double wall_ms = 0.0;
  double loss = 0.0;
  double l1 = 0.0;
  double ssim = 0.0;
  std::size_t num_gaussians = 0;
  double psnr_holdout = -1.0;  // < 0 means not evaluated
};

struct DensifyRow {
  int iteration = 0;
  std::size_t cloned = 0, split = 0, pruned = 0, total = 0;
};

struct TrainResult {
  Scene scene;
  std::vector<MetricsRow> metrics;
  std::vector<DensifyRow> densify;
};

/// Optional per-iteration hook (iteration, current scene); used by the CLI
/// for checkpoint cadence.
using TrainCallback = std::function<void(int, const Scene&)>;

TrainResult train(const Dataset& dataset, Scene scene, const TrainConfig& cfg,
                  std::mt19937_64& rng, const TrainCallback& callback = {});

/// Mean held-out PSNR over the test frames (train frames if none).
double holdout_psnr(const Scene& scene, const Dataset& dataset, const RenderOptions& opts);

}  // namespace splat4d
