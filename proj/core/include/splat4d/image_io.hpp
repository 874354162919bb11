#pragma once

#include <filesystem>

#include "splat4d/common.hpp"

namespace splat4d {

double srgb_to_linear(double v);
double linear_to_srgb(double v);

/// Reads an 8-bit PNG (gray, RGB, or RGBA; alpha dropped) and decodes sRGB
/// to linear RGB.
Image read_png(const std::filesystem::path& path);

/// Encodes a 1- or 3-channel linear image to 8-bit sRGB PNG. With
/// `encode_srgb` false the values are written as-is (clamped to [0, 1]).
void write_png(const Image& image, const std::filesystem::path& path, bool encode_srgb = true);

}  // namespace splat4d
