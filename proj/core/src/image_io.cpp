#include "splat4d/image_io.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#include <png.h>

namespace splat4d {

double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double v) {
  v = std::clamp(v, 0.0, 1.0);
  return v <= 0.0031308 ? 12.92 * v : 1.055 * std::pow(v, 1.0 / 2.4) - 0.055;
}

Image read_png(const std::filesystem::path& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.string().c_str())) {
    throw Error(Errc::kIo, "cannot read PNG '" + path.string() + "': " + png.message);
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    png_image_free(&png);
    throw Error(Errc::kIo, "cannot decode PNG '" + path.string() + "': " + png.message);
  }
  static const std::vector<double> lut = [] {
    std::vector<double> t(256);
    for (int i = 0; i < 256; ++i) t[i] = srgb_to_linear(i / 255.0);
    return t;
  }();
  Image img(static_cast<int>(png.width), static_cast<int>(png.height), 3);
  for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = lut[buffer[i]];
  return img;
}

void write_png(const Image& image, const std::filesystem::path& path, bool encode_srgb) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(Errc::kInvalidArgument, "PNG export needs 1 or 3 channels");
  }
  std::vector<png_byte> buffer(image.data.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    const double v = encode_srgb ? linear_to_srgb(image.data[i]) : std::clamp(image.data[i], 0.0, 1.0);
    buffer[i] = static_cast<png_byte>(std::lround(v * 255.0));
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&png, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
    throw Error(Errc::kIo, "cannot write PNG '" + path.string() + "': " + png.message);
  }
}

}  // namespace splat4d
