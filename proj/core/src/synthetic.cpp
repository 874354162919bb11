#include "splat4d/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <bit>
#include <numbers>

#include <Eigen/Geometry>

namespace splat4d {

namespace {

constexpr float kFloMagic = 202021.25f;
constexpr double kStaticTimeScale = 1e3;

Mat3 random_spatial_covariance(double radius, std::mt19937_64& rng) {
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> jitter(0.8, 1.2);
  Eigen::Quaterniond q(n01(rng), n01(rng), n01(rng), n01(rng));
  q.normalize();
  const Mat3 r = q.toRotationMatrix();
  Vec3 s;
  for (int i = 0; i < 3; ++i) s[i] = radius * jitter(rng);
  return r * s.array().square().matrix().asDiagonal() * r.transpose();
}

// Space-time covariance whose conditional mean moves with `velocity` and whose
// conditional covariance is `spatial`.
Mat4 moving_covariance(const Mat3& spatial, const Vec3& velocity, double time_sigma) {
  const double var_t = time_sigma * time_sigma;
  Mat4 cov = Mat4::Zero();
  cov.topLeftCorner<3, 3>() = spatial + var_t * velocity * velocity.transpose();
  cov.topRightCorner<3, 1>() = var_t * velocity;
  cov.bottomLeftCorner<1, 3>() = var_t * velocity.transpose();
  cov(3, 3) = var_t;
  return cov;
}

Gaussian4D blob_gaussian(const Vec3& center, double t, const Mat4& cov, const Vec3& color,
                         double opacity, const ShConfig& sh) {
  Gaussian4D g;
  g.mean = Vec4(center.x(), center.y(), center.z(), t);
  const ScalesRotor sr = decompose_covariance(cov);
  g.scales = sr.scales;
  g.rotor = sr.rotor;
  g.opacity_logit = logit(opacity);
  g.sh.assign(static_cast<std::size_t>(sh.coeff_count()), 0.0);
  for (int c = 0; c < 3; ++c) g.sh[static_cast<std::size_t>(c * sh.basis_size())] = rgb_to_dc(color[c]);
  return g;
}

}  // namespace

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw Error(Errc::kInvalidArgument, "synthetic spec: " + what); };
  if (blobs.empty()) fail("needs at least one blob");
  if (ring_cameras < 1) fail("ring_cameras must be >= 1");
  if (timesteps < 2) fail("timesteps must be >= 2");
  if (width < 1 || height < 1) fail("resolution must be positive");
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) fail("fov_deg must be in (0, 180)");
  if (!(ring_radius > 0.0)) fail("ring_radius must be > 0");
  if (test_camera >= ring_cameras) fail("test_camera out of range");
  for (const auto& b : blobs) {
    if (!(b.radius > 0.0)) fail("blob radius must be > 0");
    if (!(b.opacity > 0.0 && b.opacity < 1.0)) fail("blob opacity must be in (0, 1)");
    if (b.motion == Motion::kAppear && !(b.time_scale > 0.0)) fail("appear time_scale must be > 0");
    if (b.motion == Motion::kOrbit && b.orbit_segments < 1) fail("orbit_segments must be >= 1");
  }
}

SyntheticSpec three_blobs_preset() {
  SyntheticSpec s;
  BlobSpec fixed;
  fixed.motion = Motion::kStatic;
  fixed.position = Vec3(-0.55, -0.1, 0.0);
  fixed.color = Vec3(0.85, 0.3, 0.2);
  fixed.radius = 0.22;

  BlobSpec moving;
  moving.motion = Motion::kTranslate;
  moving.position = Vec3(0.35, 0.25, 0.1);
  moving.velocity = Vec3(0.0, -0.5, 0.5);
  moving.color = Vec3(0.2, 0.8, 0.3);
  moving.radius = 0.18;

  BlobSpec appearing;
  appearing.motion = Motion::kAppear;
  appearing.position = Vec3(0.2, -0.45, -0.45);
  appearing.color = Vec3(0.25, 0.35, 0.9);
  appearing.radius = 0.17;
  appearing.t0 = 0.5;
  appearing.time_scale = 0.12;

  s.blobs = {fixed, moving, appearing};
  return s;
}

SyntheticSpec translating_preset() {
  SyntheticSpec s = three_blobs_preset();
  s.blobs.pop_back();
  return s;
}

SyntheticSpec synthetic_preset(const std::string& name) {
  if (name == "three-blobs") return three_blobs_preset();
  if (name == "translating") return translating_preset();
  throw Error(Errc::kInvalidArgument, "unknown synthetic preset '" + name + "'");
}

Scene SyntheticScene::subset(Motion motion) const {
  Scene out(scene.sh_config(), scene.duration());
  for (std::size_t b = 0; b < spec.blobs.size(); ++b) {
    if (spec.blobs[b].motion != motion) continue;
    for (std::size_t i : blob_gaussians[b]) out.append_record(scene.record(i));
  }
  return out;
}

SyntheticScene make_synthetic_scene(const SyntheticSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  SyntheticScene out;
  out.spec = spec;
  ShConfig sh;
  sh.period = 1.0;
  out.scene = Scene(sh, 1.0f);

  for (const auto& b : spec.blobs) {
    const Mat3 spatial = random_spatial_covariance(b.radius, rng);
    std::vector<std::size_t> ids;
    auto add = [&](const Gaussian4D& g) {
      ids.push_back(out.scene.size());
      out.scene.push_back(g);
    };
    switch (b.motion) {
      case Motion::kStatic:
        add(blob_gaussian(b.position, 0.5, moving_covariance(spatial, Vec3::Zero(), kStaticTimeScale),
                          b.color, b.opacity, sh));
        break;
      case Motion::kTranslate:
        add(blob_gaussian(b.position, 0.5, moving_covariance(spatial, b.velocity, 1.0), b.color,
                          b.opacity, sh));
        break;
      case Motion::kAppear:
        add(blob_gaussian(b.position, b.t0, moving_covariance(spatial, Vec3::Zero(), b.time_scale),
                          b.color, b.opacity, sh));
        break;
      case Motion::kOrbit: {
        const int k = b.orbit_segments;
        const double sigma = 0.5 / k;
        for (int i = 0; i < k; ++i) {
          const double tm = (i + 0.5) / k;
          const double a = b.omega * tm;
          const Vec3 offset(std::cos(a), 0.0, std::sin(a));
          const Vec3 vel = b.omega * b.orbit_radius * Vec3(-std::sin(a), 0.0, std::cos(a));
          add(blob_gaussian(b.position + b.orbit_radius * offset, tm, moving_covariance(spatial, vel, sigma),
                            b.color, b.opacity, sh));
        }
        break;
      }
    }
    out.blob_gaussians.push_back(std::move(ids));
  }

  Dataset& ds = out.dataset;
  ds.duration = 1.0;
  ds.raw_time_min = 0.0;
  ds.raw_time_max = 1.0;
  ds.background = spec.background;
  const double fx = 0.5 * spec.width / std::tan(0.5 * spec.fov_deg * std::numbers::pi / 180.0);
  const double fy = fx;
  std::vector<std::string> ids;
  for (int c = 0; c < spec.ring_cameras; ++c) {
    const double a = 2.0 * std::numbers::pi * c / spec.ring_cameras;
    const Vec3 eye(spec.ring_radius * std::cos(a), spec.ring_height, spec.ring_radius * std::sin(a));
    const std::string id = "cam" + std::to_string(c);
    ds.cameras.emplace(id, look_at(eye, Vec3::Zero(), Vec3(0.0, 1.0, 0.0), fx, fy, spec.width,
                                   spec.height, id));
    ids.push_back(id);
  }
  for (int c = 0; c < spec.ring_cameras; ++c) {
    const Camera& cam = ds.camera(ids[c]);
    for (int k = 0; k < spec.timesteps; ++k) {
      DatasetFrame f;
      f.camera = ids[c];
      f.time = spec.timesteps > 1 ? static_cast<double>(k) / (spec.timesteps - 1) : 0.0;
      char name[64];
      std::snprintf(name, sizeof(name), "images/%s_%03d.png", ids[c].c_str(), k);
      f.image_path = name;
      f.image = oracle_render(out.scene, cam, f.time, spec.background).color;
      if (c == spec.test_camera) ds.test_frames.push_back(ds.frames.size());
      ds.frames.push_back(std::move(f));
    }
  }
  assign_train_split(ds);
  return out;
}

FlowField ground_truth_flow(const SyntheticScene& synth, const Camera& cam, double t, double dt) {
  const RenderOutput full = render_flow(synth.scene, cam, t, dt);
  const RenderOutput moving = render_flow(synth.subset(Motion::kTranslate), cam, t, dt);
  FlowField out{full.flow, moving.alpha};
  // Drop pixels where other blobs occlude the moving one.
  for (int y = 0; y < cam.height; ++y)
    for (int x = 0; x < cam.width; ++x) {
      const Vec2 f(full.flow.at(x, y, 0), full.flow.at(x, y, 1));
      const Vec2 m(moving.flow.at(x, y, 0), moving.flow.at(x, y, 1));
      if ((f - m).norm() > 0.25 * m.norm()) out.alpha.at(x, y) = 0.0;
    }
  return out;
}

FlowMetrics eval_flow(const Image& rendered, const Image& gt, const Image& coverage,
                      double max_angle_deg) {
  if (!rendered.same_shape(gt) || rendered.channels != 2 || coverage.width != gt.width ||
      coverage.height != gt.height || coverage.channels != 1) {
    throw Error(Errc::kShapeMismatch, "eval_flow: flow fields and coverage must share dimensions");
  }
  FlowMetrics m;
  std::size_t accurate = 0;
  double epe = 0.0;
  const double cos_limit = std::cos(max_angle_deg * std::numbers::pi / 180.0);
  for (int y = 0; y < gt.height; ++y)
    for (int x = 0; x < gt.width; ++x) {
      if (!(coverage.at(x, y) > 0.5)) continue;
      const Vec2 r(rendered.at(x, y, 0), rendered.at(x, y, 1));
      const Vec2 g(gt.at(x, y, 0), gt.at(x, y, 1));
      ++m.covered;
      epe += (r - g).norm();
      const double nr = r.norm(), ng = g.norm();
      if (nr == 0.0 && ng == 0.0) {
        ++accurate;
      } else if (nr > 0.0 && ng > 0.0 && r.dot(g) / (nr * ng) > cos_limit) {
        ++accurate;
      }
    }
  if (m.covered > 0) {
    m.epe = epe / static_cast<double>(m.covered);
    m.angular_accuracy = static_cast<double>(accurate) / static_cast<double>(m.covered);
  }
  return m;
}

void write_flo(const Image& flow, const std::filesystem::path& path) {
  if (flow.channels != 2) throw Error(Errc::kShapeMismatch, "write_flo expects a 2-channel image");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot write '" + path.string() + "'");
  auto put = [&](const auto v) {
    unsigned char b[4];
    std::memcpy(b, &v, 4);
    if constexpr (std::endian::native == std::endian::big) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  out.write("PIEH", 4);
  put(static_cast<std::int32_t>(flow.width));
  put(static_cast<std::int32_t>(flow.height));
  for (double v : flow.data) put(static_cast<float>(v));
  if (!out) throw Error(Errc::kIo, "short write to '" + path.string() + "'");
}

Image read_flo(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open '" + path.string() + "'");
  auto get = [&](auto& v) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(Errc::kFormat, "truncated .flo file");
    if constexpr (std::endian::native == std::endian::big) std::swap(b[0], b[3]), std::swap(b[1], b[2]);
    std::memcpy(&v, b, 4);
  };
  float magic = 0.0f;
  get(magic);
  if (magic != kFloMagic) throw Error(Errc::kFormat, "bad .flo magic");
  std::int32_t w = 0, h = 0;
  get(w);
  get(h);
  if (w <= 0 || h <= 0) throw Error(Errc::kFormat, "bad .flo dimensions");
  Image flow(w, h, 2);
  for (double& v : flow.data) {
    float f = 0.0f;
    get(f);
    v = f;
  }
  return flow;
}

Image flow_to_color(const Image& flow, double max_magnitude) {
  if (flow.channels != 2) throw Error(Errc::kShapeMismatch, "flow_to_color expects a 2-channel image");
  if (!(max_magnitude > 0.0)) {
    std::vector<double> mags;
    mags.reserve(static_cast<std::size_t>(flow.width) * flow.height);
    for (int y = 0; y < flow.height; ++y)
      for (int x = 0; x < flow.width; ++x) mags.push_back(std::hypot(flow.at(x, y, 0), flow.at(x, y, 1)));
    const std::size_t k = std::min(mags.size() - 1, static_cast<std::size_t>(0.99 * mags.size()));
    std::nth_element(mags.begin(), mags.begin() + static_cast<std::ptrdiff_t>(k), mags.end());
    max_magnitude = mags[k] > 0.0 ? mags[k] : 1.0;
  }
  Image out(flow.width, flow.height, 3);
  for (int y = 0; y < flow.height; ++y)
    for (int x = 0; x < flow.width; ++x) {
      const double u = flow.at(x, y, 0), v = flow.at(x, y, 1);
      const double hue = (std::atan2(v, u) / std::numbers::pi + 1.0) * 3.0;  // [0, 6]
      const double value = std::min(1.0, std::hypot(u, v) / max_magnitude);
      const int sector = static_cast<int>(std::floor(hue)) % 6;
      const double f = hue - std::floor(hue);
      const double q = value * (1.0 - f), r = value * f;
      Vec3 rgb;
      switch (sector) {
        case 0: rgb = Vec3(value, r, 0.0); break;
        case 1: rgb = Vec3(q, value, 0.0); break;
        case 2: rgb = Vec3(0.0, value, r); break;
        case 3: rgb = Vec3(0.0, q, value); break;
        case 4: rgb = Vec3(r, 0.0, value); break;
        default: rgb = Vec3(value, 0.0, q); break;
      }
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = rgb[c];
    }
  return out;
}

}  // namespace splat4d
