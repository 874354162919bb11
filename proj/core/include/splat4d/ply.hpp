#pragma once

#include <filesystem>
#include <vector>

#include "splat4d/common.hpp"

namespace splat4d {

struct ColoredPoint {
  Vec3 position = Vec3::Zero();
  Vec3 color = Vec3::Constant(0.5);  // [0, 1]
};

/// Binary little-endian PLY with vertex properties x, y, z, red, green, blue
/// (colors as uchar or float). Other vertex properties are skipped.
std::vector<ColoredPoint> read_ply(const std::filesystem::path& path);

void write_ply(const std::vector<ColoredPoint>& points, const std::filesystem::path& path);

}  // namespace splat4d
