#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "splat4d/optim.hpp"

namespace splat4d::testing {

struct GradCheckEntry {
  std::size_t gaussian = 0;
  std::size_t slot = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  std::size_t clamped_skipped = 0;
  double max_rel_error = 0.0;
  GradCheckEntry worst;
};

inline const char* slot_group(std::size_t slot) {
  if (slot < Scene::kLogScales) return "mean";
  if (slot < Scene::kRotorLeft) return "log_scale";
  if (slot < Scene::kRotorRight) return "q_left";
  if (slot < Scene::kOpacity) return "q_right";
  if (slot == Scene::kOpacity) return "opacity";
  return "sh";
}

/// Gaussians whose compositing weight reaches the clamp at some pixel.
inline std::vector<bool> clamped_gaussians(const Scene& scene, const Camera& cam, double t,
                                           const RenderOptions& opts) {
  std::vector<bool> out(scene.size(), false);
  for (const auto& s : project_splats(scene, cam, t, opts)) {
    // Peak weight is attained at the splat center.
    if (s.alpha * s.marginal_w >= opts.max_weight * 0.999) out[s.index] = true;
  }
  return out;
}

/// Central finite differences of the loss over every stored parameter.
/// Steps are taken on the float storage; the realized step is the denominator.
/// `h` is the initial relative step.
inline GradCheckReport grad_check(const Scene& scene, const Camera& cam, double t, const Image& target,
                                  const Vec3& bg, const BackwardOptions& bopts, double h = 1e-3) {
  GradCheckReport rep;
  const auto analytic = backward(scene, cam, t, target, bg, bopts).grads;
  const auto clamped = clamped_gaussians(scene, cam, t, bopts.render);
  Scene work = scene;
  auto eval = [&]() {
    return loss(render(work, cam, t, bg, bopts.render).color, target, bopts.loss_lambda).total;
  };
  for (std::size_t i = 0; i < scene.size(); ++i) {
    for (std::size_t s = 0; s < scene.stride(); ++s) {
      if (clamped[i]) {
        ++rep.clamped_skipped;
        continue;
      }
      float& p = work.record(i)[s];
      const float orig = p;
      auto central = [&](double step) {
        p = static_cast<float>(orig + step);
        const double hi_val = p;
        const double f_hi = eval();
        p = static_cast<float>(orig - step);
        const double lo_val = p;
        const double f_lo = eval();
        p = orig;
        return (f_hi - f_lo) / (hi_val - lo_val);
      };
      // Shrink the step until two successive estimates agree; keep the
      // estimate from the most stable pair.
      double step = h * std::max(1.0, std::abs(static_cast<double>(orig)));
      double prev = central(step);
      double numeric = prev;
      double best_gap = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 4; ++k) {
        step *= 0.25;
        const double cur = central(step);
        const double gap = std::abs(cur - prev);
        if (gap < best_gap) {
          best_gap = gap;
          numeric = cur;
        }
        if (gap <= 1e-5 * std::max(std::abs(cur), 1e-7)) break;
        prev = cur;
      }
      GradCheckEntry e;
      e.gaussian = i;
      e.slot = s;
      e.analytic = analytic[i * scene.stride() + s];
      e.numeric = numeric;
      const double denom = std::max({std::abs(e.analytic), std::abs(e.numeric), 1e-7});
      e.rel_error = std::abs(e.analytic - e.numeric) / denom;
      if (e.rel_error > rep.max_rel_error) {
        rep.max_rel_error = e.rel_error;
        rep.worst = e;
      }
      rep.entries.push_back(e);
    }
  }
  return rep;
}

}  // namespace splat4d::testing
