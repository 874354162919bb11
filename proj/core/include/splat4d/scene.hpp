#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "splat4d/geom4d.hpp"
#include "splat4d/sh4d.hpp"

namespace splat4d {

/// The optimizable state: a flat array of fixed-size float records, one per
/// Gaussian, laid out exactly as in the checkpoint file:
///   mean[4] log_scales[4] q_left[4] q_right[4] opacity_logit sh[3 * basis]
class Scene {
 public:
  static constexpr std::size_t kMean = 0;
  static constexpr std::size_t kLogScales = 4;
  static constexpr std::size_t kRotorLeft = 8;
  static constexpr std::size_t kRotorRight = 12;
  static constexpr std::size_t kOpacity = 16;
  static constexpr std::size_t kSh = 17;

  Scene() = default;
  /// SH period defaults to `duration` when `sh.period` is not positive.
  Scene(ShConfig sh, float duration);

  const ShConfig& sh_config() const { return sh_; }
  float duration() const { return duration_; }

  std::size_t stride() const { return kSh + static_cast<std::size_t>(sh_.coeff_count()); }
  std::size_t size() const { return stride() == 0 ? 0 : params_.size() / stride(); }
  bool empty() const { return params_.empty(); }

  std::span<float> record(std::size_t i) { return {params_.data() + i * stride(), stride()}; }
  std::span<const float> record(std::size_t i) const {
    return {params_.data() + i * stride(), stride()};
  }
  std::span<float> params() { return params_; }
  std::span<const float> params() const { return params_; }

  Gaussian4D gaussian(std::size_t i) const;
  void set(std::size_t i, const Gaussian4D& g);
  void push_back(const Gaussian4D& g);
  void append_record(std::span<const float> record);
  void reserve(std::size_t n) { params_.reserve(n * stride()); }

  /// Keeps records whose mask entry is true, preserving order.
  void keep(const std::vector<bool>& mask);

  /// Same Gaussians re-expressed with a different SH degree set. Shared
  /// (n, k) coefficients are copied; new ones are zero.
  Scene with_sh_config(const ShConfig& sh) const;

 private:
  ShConfig sh_;
  float duration_ = 1.0f;
  std::vector<float> params_;
};

}  // namespace splat4d
