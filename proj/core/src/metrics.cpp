#include "splat4d/metrics.hpp"

#include <array>
#include <cmath>
#include <string>

namespace splat4d {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const std::array<double, kSsimWindow>& window() {
  static const std::array<double, kSsimWindow> w = [] {
    std::array<double, kSsimWindow> out{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
      const double d = i - kSsimWindow / 2;
      out[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
      sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
  }();
  return w;
}

void check_shapes(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw Error(Errc::kShapeMismatch, "image dimensions differ");
  if (a.width < kSsimWindow || a.height < kSsimWindow) {
    throw Error(Errc::kShapeMismatch, "image smaller than the 11x11 SSIM window");
  }
}

// Valid-mode separable correlation of one channel; output is (w-10) x (h-10).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h) {
  const auto& g = window();
  const int ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) acc += g[k] * src[y * w + x + k];
      tmp[y * ow + x] = acc;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) acc += g[k] * tmp[(y + k) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

// Adjoint of filter_valid: scatters an (w-10) x (h-10) map back to w x h.
std::vector<double> filter_adjoint(const std::vector<double>& src, int w, int h) {
  const auto& g = window();
  const int ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h, 0.0);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x)
      for (int k = 0; k < kSsimWindow; ++k) tmp[(y + k) * ow + x] += g[k] * src[y * ow + x];
  std::vector<double> out(static_cast<std::size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x)
      for (int k = 0; k < kSsimWindow; ++k) out[y * w + x + k] += g[k] * tmp[y * ow + x];
  return out;
}

double ssim_impl(const Image& a, const Image& b, Image* grad_a) {
  check_shapes(a, b);
  const int w = a.width, h = a.height, ch = a.channels;
  const int ow = w - kSsimWindow + 1, oh = h - kSsimWindow + 1;
  const std::size_t npix = static_cast<std::size_t>(w) * h;
  const std::size_t nout = static_cast<std::size_t>(ow) * oh;
  const double norm = 1.0 / (static_cast<double>(nout) * ch);
  if (grad_a) *grad_a = Image(w, h, ch);

  double total = 0.0;
  std::vector<double> x(npix), y(npix), xx(npix), yy(npix), xy(npix);
  for (int c = 0; c < ch; ++c) {
    for (std::size_t p = 0; p < npix; ++p) {
      x[p] = a.data[p * ch + c];
      y[p] = b.data[p * ch + c];
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    const auto mx = filter_valid(x, w, h), my = filter_valid(y, w, h);
    const auto sxx = filter_valid(xx, w, h), syy = filter_valid(yy, w, h),
               sxy = filter_valid(xy, w, h);
    std::vector<double> da, db, dc;
    if (grad_a) {
      da.resize(nout);
      db.resize(nout);
      dc.resize(nout);
    }
    for (std::size_t p = 0; p < nout; ++p) {
      const double vx = sxx[p] - mx[p] * mx[p];
      const double vy = syy[p] - my[p] * my[p];
      const double cxy = sxy[p] - mx[p] * my[p];
      const double n1 = 2.0 * mx[p] * my[p] + kC1, n2 = 2.0 * cxy + kC2;
      const double d1 = mx[p] * mx[p] + my[p] * my[p] + kC1, d2 = vx + vy + kC2;
      const double s = n1 * n2 / (d1 * d2);
      total += s;
      if (grad_a) {
        const double ds_dmu = 2.0 * my[p] * n2 / (d1 * d2) - s * 2.0 * mx[p] / d1;
        const double ds_dvar = -s / d2;
        const double ds_dcov = 2.0 * n1 / (d1 * d2);
        da[p] = norm * (ds_dmu - 2.0 * mx[p] * ds_dvar - my[p] * ds_dcov);
        db[p] = norm * 2.0 * ds_dvar;
        dc[p] = norm * ds_dcov;
      }
    }
    if (grad_a) {
      const auto ga = filter_adjoint(da, w, h), gb = filter_adjoint(db, w, h),
                 gc = filter_adjoint(dc, w, h);
      for (std::size_t p = 0; p < npix; ++p) {
        grad_a->data[p * ch + c] = ga[p] + x[p] * gb[p] + y[p] * gc[p];
      }
    }
  }
  return total * norm;
}

}  // namespace

double psnr(const Image& a, const Image& b, double peak) {
  if (!a.same_shape(b)) throw Error(Errc::kShapeMismatch, "image dimensions differ");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  if (a.data.empty()) return kPsnrCap;
  mse /= static_cast<double>(a.data.size());
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(mse / (peak * peak)));
}

double ssim(const Image& a, const Image& b) { return ssim_impl(a, b, nullptr); }

double ssim_with_gradient(const Image& a, const Image& b, Image& grad_a) {
  return ssim_impl(a, b, &grad_a);
}

}  // namespace splat4d
