#pragma once

#include "splat4d/common.hpp"

namespace splat4d {

inline constexpr double kPsnrCap = 99.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// -10 log10(MSE / peak^2); identical images return kPsnrCap.
double psnr(const Image& a, const Image& b, double peak = 1.0);

/// Single-scale SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
/// K2 = 0.03, dynamic range 1, averaged over valid window positions and
/// channels. Throws kShapeMismatch on mismatched or too-small images.
double ssim(const Image& a, const Image& b);

/// Same as ssim(), and writes d ssim / d a into `grad_a` (shape of `a`).
double ssim_with_gradient(const Image& a, const Image& b, Image& grad_a);

inline double dssim(double ssim_value) { return 0.5 * (1.0 - ssim_value); }

}  // namespace splat4d
