#include "splat4d/init.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <unordered_map>

namespace splat4d {

namespace {

struct CellKey {
  long long x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    return static_cast<std::size_t>(k.x * 73856093LL ^ k.y * 19349663LL ^ k.z * 83492791LL);
  }
};

class Grid {
 public:
  Grid(const std::vector<Vec3>& points, double cell, long long span)
      : points_(points), cell_(cell), span_(span) {
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(points[i])].push_back(i);
  }

  CellKey key(const Vec3& p) const {
    return {static_cast<long long>(std::floor(p.x() / cell_)),
            static_cast<long long>(std::floor(p.y() / cell_)),
            static_cast<long long>(std::floor(p.z() / cell_))};
  }

  // Distances to the k nearest other points, searching shells of cells
  // until no unvisited cell can hold anything closer.
  std::vector<double> nearest(std::size_t self, std::size_t k) const {
    const Vec3& p = points_[self];
    const CellKey c = key(p);
    std::priority_queue<double> best;
    for (long long ring = 0;; ++ring) {
      for (long long dx = -ring; dx <= ring; ++dx)
        for (long long dy = -ring; dy <= ring; ++dy)
          for (long long dz = -ring; dz <= ring; ++dz) {
            if (std::max({std::llabs(dx), std::llabs(dy), std::llabs(dz)}) != ring) continue;
            const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
            if (it == cells_.end()) continue;
            for (std::size_t j : it->second) {
              if (j == self) continue;
              const double d = (points_[j] - p).norm();
              if (best.size() < k) {
                best.push(d);
              } else if (d < best.top()) {
                best.pop();
                best.push(d);
              }
            }
          }
      const double reach = static_cast<double>(ring) * cell_;
      if (best.size() == k && best.top() <= reach) break;
      if (ring > span_) break;
    }
    std::vector<double> out;
    while (!best.empty()) {
      out.push_back(best.top());
      best.pop();
    }
    return out;
  }

 private:
  const std::vector<Vec3>& points_;
  double cell_;
  long long span_;
  std::unordered_map<CellKey, std::vector<std::size_t>, CellHash> cells_;
};

ShConfig resolved(const InitConfig& cfg, double duration) {
  ShConfig sh = cfg.sh;
  if (!(sh.period > 0.0)) sh.period = duration;
  return sh;
}

Gaussian4D make_gaussian(const Vec3& pos, const Vec3& rgb, double spatial_scale, double duration,
                         const ShConfig& sh, const InitConfig& cfg, std::mt19937_64& rng) {
  Gaussian4D g;
  double t = 0.5 * duration;
  if (cfg.time_mode == TimeInitMode::kUniform) {
    t = std::uniform_real_distribution<double>(0.0, duration)(rng);
  }
  g.mean = Vec4(pos.x(), pos.y(), pos.z(), t);
  const double s = spatial_scale > 0.0 ? spatial_scale : cfg.fallback_scale;
  const double ls = std::log(std::max(s, kScaleFloor));
  g.scales.log = Vec4(ls, ls, ls, std::log(0.5 * duration));
  g.opacity_logit = logit(cfg.opacity);
  g.sh.assign(static_cast<std::size_t>(sh.coeff_count()), 0.0);
  for (int c = 0; c < 3; ++c) g.sh[static_cast<std::size_t>(c * sh.basis_size())] = rgb_to_dc(rgb[c]);
  return g;
}

}  // namespace

std::vector<double> knn_mean_distance(const std::vector<Vec3>& points, int k) {
  if (k <= 0) throw Error(Errc::kInvalidArgument, "knn k must be positive");
  const std::size_t n = points.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;

  Vec3 lo = points[0], hi = points[0];
  for (const auto& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 extent = (hi - lo).cwiseMax(1e-9);
  // Roughly two points per occupied cell for a uniform cloud.
  double cell = std::cbrt(extent.prod() * 2.0 / static_cast<double>(n));
  cell = std::max(cell, extent.maxCoeff() / 64.0);
  const auto span = static_cast<long long>(std::ceil(extent.maxCoeff() / cell)) + 1;

  const Grid grid(points, cell, span);
  const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto d = grid.nearest(i, want);
    out[i] = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  }
  return out;
}

Scene init_from_points(const std::vector<ColoredPoint>& points, double duration,
                       std::size_t count_target, const InitConfig& cfg, std::mt19937_64& rng) {
  if (points.empty()) throw Error(Errc::kInvalidArgument, "init_from_points: empty point cloud");
  if (!(duration > 0.0)) throw Error(Errc::kInvalidArgument, "duration must be > 0");

  std::vector<std::size_t> chosen(points.size());
  std::iota(chosen.begin(), chosen.end(), 0);
  if (count_target > 0 && count_target < points.size()) {
    std::shuffle(chosen.begin(), chosen.end(), rng);
    chosen.resize(count_target);
    std::sort(chosen.begin(), chosen.end());
  }
  std::vector<Vec3> pos;
  pos.reserve(chosen.size());
  for (std::size_t i : chosen) pos.push_back(points[i].position);
  const auto dist = knn_mean_distance(pos, cfg.knn);

  const ShConfig sh = resolved(cfg, duration);
  Scene scene(sh, static_cast<float>(duration));
  scene.reserve(chosen.size());
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    scene.push_back(make_gaussian(pos[j], points[chosen[j]].color, dist[j], duration, sh, cfg, rng));
  }
  return scene;
}

Scene init_random_cube(std::size_t count, double half_extent, double duration, const InitConfig& cfg,
                       std::mt19937_64& rng) {
  if (count == 0) throw Error(Errc::kInvalidArgument, "init_random_cube: count must be > 0");
  std::uniform_real_distribution<double> u(-half_extent, half_extent);
  std::vector<ColoredPoint> pts(count);
  for (auto& p : pts) {
    p.position = Vec3(u(rng), u(rng), u(rng));
    p.color = Vec3::Constant(0.5);
  }
  return init_from_points(pts, duration, 0, cfg, rng);
}

void init_sphere_shell(Scene& scene, std::size_t count, double radius, const InitConfig& cfg,
                       std::mt19937_64& rng) {
  if (count == 0) return;
  if (!(radius > 0.0)) throw Error(Errc::kInvalidArgument, "sphere radius must be > 0");
  std::normal_distribution<double> n01;
  std::vector<Vec3> pos(count);
  for (auto& p : pos) {
    Vec3 v;
    do {
      v = Vec3(n01(rng), n01(rng), n01(rng));
    } while (v.norm() < 1e-12);
    p = radius * v.normalized();
  }
  const auto dist = knn_mean_distance(pos, cfg.knn);
  const double duration = scene.duration();
  scene.reserve(scene.size() + count);
  for (std::size_t i = 0; i < count; ++i) {
    scene.push_back(make_gaussian(pos[i], Vec3::Constant(0.5), dist[i], duration, scene.sh_config(), cfg, rng));
  }
}

}  // namespace splat4d
