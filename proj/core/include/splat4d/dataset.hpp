#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "splat4d/camera.hpp"

namespace splat4d {

struct DatasetFrame {
  std::string camera;
  double time = 0.0;  // normalized to [0, 1]
  std::string image_path;  // relative to the dataset root
  Image image;             // linear RGB
};

/// Posed, timestamped images. Multi-view datasets share cameras across
/// frames; monocular datasets carry one camera per frame.
struct Dataset {
  std::vector<DatasetFrame> frames;
  std::map<std::string, Camera> cameras;
  double duration = 1.0;
  double raw_time_min = 0.0;  // original time range before normalization
  double raw_time_max = 1.0;
  Vec3 background = Vec3::Zero();
  std::vector<std::size_t> train_frames;
  std::vector<std::size_t> test_frames;

  const Camera& camera(const std::string& id) const;
  const Camera& camera_of(std::size_t frame) const { return camera(frames[frame].camera); }

  /// 1.1 x the largest distance of a camera center from the centroid of all
  /// camera centers (at least 1).
  double camera_extent() const;
};

/// Parses `root/manifest.json`, loads every image, normalizes timestamps to
/// [0, 1], and validates frame/camera consistency. Schema violations throw
/// kSchema with a JSON path such as "cameras[0].fx"; unreadable images throw
/// kIo naming the frame.
Dataset load_dataset(const std::filesystem::path& root);

/// Writes manifest.json and one PNG per frame (paths taken from image_path).
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

/// Reads one camera in the manifest's camera schema from a JSON file.
Camera load_camera_json(const std::filesystem::path& path);

/// Fills train_frames with every frame not listed in test_frames.
void assign_train_split(Dataset& dataset);

}  // namespace splat4d
