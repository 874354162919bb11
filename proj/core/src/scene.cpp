#include "splat4d/scene.hpp"

#include <algorithm>
#include <string>

namespace splat4d {

Scene::Scene(ShConfig sh, float duration) : sh_(sh), duration_(duration) {
  if (!(sh_.period > 0.0)) sh_.period = duration;
  sh_.validate();
  if (!(duration > 0.0f)) throw Error(Errc::kInvalidArgument, "scene duration must be > 0");
}

Gaussian4D Scene::gaussian(std::size_t i) const {
  const auto r = record(i);
  Gaussian4D g;
  for (int k = 0; k < 4; ++k) {
    g.mean[k] = r[kMean + k];
    g.scales.log[k] = r[kLogScales + k];
    g.rotor.left[k] = r[kRotorLeft + k];
    g.rotor.right[k] = r[kRotorRight + k];
  }
  g.opacity_logit = r[kOpacity];
  g.sh.assign(r.begin() + kSh, r.end());
  return g;
}

void Scene::set(std::size_t i, const Gaussian4D& g) {
  if (g.sh.size() != static_cast<std::size_t>(sh_.coeff_count())) {
    throw Error(Errc::kShapeMismatch, "Gaussian has " + std::to_string(g.sh.size()) +
                                          " SH coefficients, scene expects " +
                                          std::to_string(sh_.coeff_count()));
  }
  auto r = record(i);
  for (int k = 0; k < 4; ++k) {
    r[kMean + k] = static_cast<float>(g.mean[k]);
    r[kLogScales + k] = static_cast<float>(g.scales.log[k]);
    r[kRotorLeft + k] = static_cast<float>(g.rotor.left[k]);
    r[kRotorRight + k] = static_cast<float>(g.rotor.right[k]);
  }
  r[kOpacity] = static_cast<float>(g.opacity_logit);
  std::transform(g.sh.begin(), g.sh.end(), r.begin() + kSh,
                 [](double v) { return static_cast<float>(v); });
}

void Scene::push_back(const Gaussian4D& g) {
  params_.resize(params_.size() + stride());
  set(size() - 1, g);
}

void Scene::append_record(std::span<const float> rec) {
  if (rec.size() != stride()) throw Error(Errc::kShapeMismatch, "record length mismatch");
  params_.insert(params_.end(), rec.begin(), rec.end());
}

void Scene::keep(const std::vector<bool>& mask) {
  const std::size_t n = size();
  const std::size_t s = stride();
  std::size_t out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    if (out != i) {
      std::copy_n(params_.begin() + i * s, s, params_.begin() + out * s);
    }
    ++out;
  }
  params_.resize(out * s);
}

Scene Scene::with_sh_config(const ShConfig& sh) const {
  ShConfig target = sh;
  target.period = sh.period > 0.0 ? sh.period : sh_.period;
  Scene out(target, duration_);
  out.reserve(size());
  const int src_k = sh_.sh_count(), dst_k = target.sh_count();
  const int src_b = sh_.basis_size(), dst_b = target.basis_size();
  for (std::size_t i = 0; i < size(); ++i) {
    Gaussian4D g = gaussian(i);
    std::vector<double> coeffs(target.coeff_count(), 0.0);
    for (int c = 0; c < 3; ++c)
      for (int n = 0; n <= std::min(sh_.n_max, target.n_max); ++n)
        for (int k = 0; k < std::min(src_k, dst_k); ++k)
          coeffs[c * dst_b + n * dst_k + k] = g.sh[c * src_b + n * src_k + k];
    g.sh = std::move(coeffs);
    out.push_back(g);
  }
  return out;
}

}  // namespace splat4d
