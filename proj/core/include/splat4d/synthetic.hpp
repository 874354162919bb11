#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "splat4d/dataset.hpp"
#include "splat4d/raster.hpp"
#include "splat4d/scene.hpp"

namespace splat4d {

enum class Motion { kStatic, kTranslate, kOrbit, kAppear };

struct BlobSpec {
  Motion motion = Motion::kStatic;
  Vec3 position = Vec3::Zero();  // center at t = 0.5 (orbit: orbit center)
  Vec3 color = Vec3::Constant(0.8);
  double radius = 0.2;           // spatial standard deviation
  double opacity = 0.95;
  Vec3 velocity = Vec3::Zero();  // translate: displacement per unit time
  double omega = 0.0;            // orbit: radians per unit time around +y
  double orbit_radius = 0.5;
  int orbit_segments = 12;
  double t0 = 0.5;               // appear: time of peak visibility
  double time_scale = 0.12;      // appear: temporal standard deviation
};

struct SyntheticSpec {
  std::vector<BlobSpec> blobs;
  int ring_cameras = 8;
  double ring_radius = 3.0;
  double ring_height = 0.6;
  int timesteps = 20;
  int width = 64;
  int height = 64;
  double fov_deg = 50.0;
  /// Camera index reserved for testing; negative means no held-out view.
  int test_camera = 7;
  Vec3 background = Vec3::Zero();

  void validate() const;
};

/// Static, translating, and appearing blob.
SyntheticSpec three_blobs_preset();
/// A single translating blob next to a static one.
SyntheticSpec translating_preset();
/// Looks up a preset by name ("three-blobs", "translating"); throws on unknown.
SyntheticSpec synthetic_preset(const std::string& name);

struct SyntheticScene {
  Scene scene;
  Dataset dataset;
  /// Per blob, the Gaussian indices that represent it.
  std::vector<std::vector<std::size_t>> blob_gaussians;
  SyntheticSpec spec;

  /// Scene restricted to the Gaussians of blobs with the given motion.
  Scene subset(Motion motion) const;
};

/// Builds the analytic scene, renders every (camera, timestep) frame with
/// oracle_render, and holds out every frame of `test_camera`. The rng draws
/// each blob's anisotropy and orientation, so a fixed seed gives a fixed
/// dataset.
SyntheticScene make_synthetic_scene(const SyntheticSpec& spec, std::mt19937_64& rng);

struct FlowField {
  Image flow;   // H x W x 2, pixels
  Image alpha;  // H x W x 1
};

/// Ground-truth flow of the translating blobs only, between t and t + dt.
FlowField ground_truth_flow(const SyntheticScene& synth, const Camera& cam, double t, double dt);

struct FlowMetrics {
  double epe = 0.0;               // mean endpoint error in pixels
  double angular_accuracy = 0.0;  // fraction with angle below the threshold
  std::size_t covered = 0;
};

/// Compares flow fields over pixels where coverage > 0.5. A rendered vector of
/// zero length next to a non-zero ground truth counts as inaccurate.
FlowMetrics eval_flow(const Image& rendered, const Image& gt, const Image& coverage,
                      double max_angle_deg = 30.0);

/// Middlebury .flo file.
void write_flo(const Image& flow, const std::filesystem::path& path);
Image read_flo(const std::filesystem::path& path);

/// HSV visualization: hue = direction, value = magnitude / max_magnitude
/// (default: the 99th percentile of magnitudes), full saturation.
Image flow_to_color(const Image& flow, double max_magnitude = 0.0);

}  // namespace splat4d
