// splat4d: train, render, evaluate, and inspect 4D Gaussian scenes.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "splat4d/checkpoint.hpp"
#include "splat4d/dataset.hpp"
#include "splat4d/image_io.hpp"
#include "splat4d/init.hpp"
#include "splat4d/metrics.hpp"
#include "splat4d/optim.hpp"
#include "splat4d/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace splat4d;

namespace {

// Bad command-line input that CLI11 cannot detect on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int default_threads() {
  if (const char* env = std::getenv("SPLAT_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("SPLAT_THREADS must be a positive integer, got '") + env + "'");
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void write_json(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::kIo, "cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

Vec3 parse_rgb(const std::string& s) {
  Vec3 v;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &v[0], &v[1], &v[2]) != 3)
    throw UsageError("expected r,g,b, got '" + s + "'");
  return v;
}

struct TimeRange {
  double a = 0.0, b = 1.0;
  int n = 1;
};

TimeRange parse_t_range(const std::string& s) {
  TimeRange r;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%lf:%lf:%d%c", &r.a, &r.b, &r.n, &tail) != 3 || r.n < 1)
    throw UsageError("--t-range expects a:b:n with n >= 1, got '" + s + "'");
  return r;
}

// A camera given either as a dataset camera id or as a pose JSON file.
Camera resolve_camera(const std::string& spec, const std::string& data) {
  if (fs::path(spec).extension() == ".json" && fs::exists(spec)) return load_camera_json(spec);
  if (data.empty()) throw UsageError("--camera '" + spec + "' is not a pose file; pass --data to look up camera ids");
  const Dataset ds = load_dataset(data);
  return ds.camera(spec);
}

// ---------------------------------------------------------------- train

// Every tunable of `train`, with its default. Keys double as config-file keys.
json train_defaults() {
  const TrainConfig d;
  const InitConfig ic;
  return {
      {"iters", 2000},
      {"seed", 0},
      {"batch_size", d.batch_size},
      {"loss_lambda", d.loss_lambda},
      {"lr_position", d.lr.position_spatial},
      {"lr_position_final", d.lr.position_spatial_final},
      {"lr_position_time", d.lr.position_temporal},
      {"lr_sh", d.lr.sh},
      {"lr_sh_dc", d.lr.dc_sh},
      {"lr_opacity", d.lr.opacity},
      {"lr_scales", d.lr.scales},
      {"lr_rotor", d.lr.rotor},
      {"densify_until_fraction", d.densify_until_fraction},
      {"densify_from", d.densify_from},
      {"densify_interval", d.densify_interval},
      {"opacity_reset_interval", d.opacity_reset_interval},
      {"grad_threshold_spatial", d.grad_threshold_spatial},
      {"grad_threshold_temporal", d.grad_threshold_temporal},
      {"opacity_prune_threshold", d.opacity_prune_threshold},
      {"percent_dense", d.percent_dense},
      {"ablate", json::array()},
      {"cull_in_training", d.cull_in_training},
      {"log_interval", d.log_interval},
      {"eval_interval", 250},
      {"ckpt_every", 0},
      {"sh_degree", ic.sh.l_max},
      {"time_order", ic.sh.n_max},
      {"init_ply", ""},
      {"init_points", 500},
      {"init_extent", 1.0},
      {"init_opacity", ic.opacity},
      {"init_time", "uniform"},
      {"sphere_points", 0},
      {"sphere_radius", 0.0},
  };
}

TrainConfig to_train_config(const json& c, int threads) {
  TrainConfig cfg;
  cfg.iterations = c.at("iters").get<int>();
  cfg.batch_size = c.at("batch_size").get<int>();
  cfg.loss_lambda = c.at("loss_lambda").get<double>();
  cfg.lr.position_spatial = c.at("lr_position").get<double>();
  cfg.lr.position_spatial_final = c.at("lr_position_final").get<double>();
  cfg.lr.position_temporal = c.at("lr_position_time").get<double>();
  cfg.lr.sh = c.at("lr_sh").get<double>();
  cfg.lr.dc_sh = c.at("lr_sh_dc").get<double>();
  cfg.lr.opacity = c.at("lr_opacity").get<double>();
  cfg.lr.scales = c.at("lr_scales").get<double>();
  cfg.lr.rotor = c.at("lr_rotor").get<double>();
  cfg.densify_until_fraction = c.at("densify_until_fraction").get<double>();
  cfg.densify_from = c.at("densify_from").get<int>();
  cfg.densify_interval = c.at("densify_interval").get<int>();
  cfg.opacity_reset_interval = c.at("opacity_reset_interval").get<int>();
  cfg.grad_threshold_spatial = c.at("grad_threshold_spatial").get<double>();
  cfg.grad_threshold_temporal = c.at("grad_threshold_temporal").get<double>();
  cfg.opacity_prune_threshold = c.at("opacity_prune_threshold").get<double>();
  cfg.percent_dense = c.at("percent_dense").get<double>();
  cfg.cull_in_training = c.at("cull_in_training").get<bool>();
  cfg.log_interval = c.at("log_interval").get<int>();
  cfg.eval_interval = c.at("eval_interval").get<int>();
  for (const auto& a : c.at("ablate")) {
    const std::string name = a.get<std::string>();
    if (name == "no-4drot") cfg.ablation_no_4drot = true;
    else if (name == "no-4dsh") cfg.ablation_no_4dsh = true;
    else if (name == "no-time-split") cfg.ablation_no_time_split = true;
    else throw UsageError("unknown ablation '" + name + "' (expected no-4drot, no-4dsh, no-time-split)");
  }
  cfg.threads = threads;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

Scene initial_scene(const json& c, const Dataset& ds, std::mt19937_64& rng) {
  InitConfig ic;
  ic.sh.l_max = c.at("sh_degree").get<int>();
  ic.sh.n_max = c.at("time_order").get<int>();
  ic.sh.period = ds.duration;
  ic.opacity = c.at("init_opacity").get<double>();
  const std::string mode = c.at("init_time").get<std::string>();
  if (mode == "uniform") ic.time_mode = TimeInitMode::kUniform;
  else if (mode == "midpoint") ic.time_mode = TimeInitMode::kMidpoint;
  else throw UsageError("init_time must be uniform or midpoint, got '" + mode + "'");
  const std::string ply = c.at("init_ply").get<std::string>();
  const auto count = c.at("init_points").get<std::size_t>();
  Scene scene = ply.empty() ? init_random_cube(count, c.at("init_extent").get<double>(), ds.duration, ic, rng)
                            : init_from_points(read_ply(ply), ds.duration, count, ic, rng);
  const auto sphere = c.at("sphere_points").get<std::size_t>();
  if (sphere > 0) {
    double radius = c.at("sphere_radius").get<double>();
    if (radius <= 0.0) radius = 2.0 * ds.camera_extent();
    init_sphere_shell(scene, sphere, radius, ic, rng);
  }
  return scene;
}

int cmd_train(const std::string& data, const std::string& out, const std::string& config_path,
              const json& cli_overrides, int threads) {
  json cfg = train_defaults();
  if (!config_path.empty()) {
    const json file = read_json(config_path);
    if (!file.is_object()) throw UsageError("config must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (key == "data" || key == "threads") continue;
      if (!cfg.contains(key)) throw UsageError("unknown config key '" + key + "'");
      cfg[key] = value;
    }
  }
  for (const auto& [key, value] : cli_overrides.items()) cfg[key] = value;

  TrainConfig tc;
  try {
    tc = to_train_config(cfg, threads);
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  }
  const Dataset ds = load_dataset(data);
  fs::create_directories(out);
  json resolved = cfg;
  resolved["data"] = fs::absolute(data).string();
  resolved["threads"] = threads;
  write_json(resolved, fs::path(out) / "config.json");

  std::mt19937_64 rng(cfg.at("seed").get<std::uint64_t>());
  const Scene init = initial_scene(cfg, ds, rng);
  std::cout << "training " << init.size() << " Gaussians on " << ds.train_frames.size() << " frames for "
            << tc.iterations << " iterations\n";

  const int ckpt_every = cfg.at("ckpt_every").get<int>();
  const TrainCallback cb = [&](int it, const Scene& scene) {
    if (ckpt_every > 0 && it % ckpt_every == 0) {
      char name[32];
      std::snprintf(name, sizeof(name), "ckpt_%06d.g4ds", it);
      save_checkpoint(scene, fs::path(out) / name);
    }
  };
  const TrainResult res = train(ds, init, tc, rng, cb);
  save_checkpoint(res.scene, fs::path(out) / "ckpt_final.g4ds");

  std::ofstream metrics(fs::path(out) / "metrics.csv");
  metrics << "iteration,wall_ms,loss,l1,ssim_11x11,num_gaussians,psnr_holdout\n";
  metrics.precision(17);
  for (const auto& m : res.metrics) {
    metrics << m.iteration << ',' << m.wall_ms << ',' << m.loss << ',' << m.l1 << ',' << m.ssim << ','
            << m.num_gaussians << ',';
    if (m.psnr_holdout >= 0.0) metrics << m.psnr_holdout;
    metrics << '\n';
  }
  std::ofstream dens(fs::path(out) / "densify.csv");
  dens << "iteration,cloned,split,pruned,total\n";
  for (const auto& d : res.densify)
    dens << d.iteration << ',' << d.cloned << ',' << d.split << ',' << d.pruned << ',' << d.total << '\n';

  RenderOptions ro = tc.render_options();
  ro.threads = threads;
  std::printf("final held-out PSNR %.3f dB with %zu Gaussians\n", holdout_psnr(res.scene, ds, ro),
              res.scene.size());
  return 0;
}

// ---------------------------------------------------------------- render

int cmd_render(const std::string& ckpt, const std::string& camera, const std::string& data, double t,
               const std::string& t_range, const std::string& out, const std::string& bg, int fps_bench,
               int threads) {
  const TimeRange r = t_range.empty() ? TimeRange{} : parse_t_range(t_range);
  const Vec3 background = parse_rgb(bg);
  const Scene scene = load_checkpoint(ckpt);
  const Camera cam = resolve_camera(camera, data);
  RenderOptions opts;
  opts.threads = threads;

  if (fps_bench > 0) {
    RenderStats total;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < fps_bench; ++i) {
      const RenderStats s = render(scene, cam, t, background, opts).stats;
      total.cull_ms += s.cull_ms;
      total.sort_ms += s.sort_ms;
      total.bin_ms += s.bin_ms;
      total.blend_ms += s.blend_ms;
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d frames %dx%d, %zu Gaussians, %d threads: %.2f fps\n", fps_bench, cam.width, cam.height,
                scene.size(), threads, fps_bench / sec);
    std::printf("mean ms/frame  cull %.3f  sort %.3f  bin %.3f  blend %.3f\n", total.cull_ms / fps_bench,
                total.sort_ms / fps_bench, total.bin_ms / fps_bench, total.blend_ms / fps_bench);
    return 0;
  }

  const fs::path base(out);
  if (base.has_parent_path()) fs::create_directories(base.parent_path());
  if (t_range.empty()) {
    write_png(render(scene, cam, t, background, opts).color, out);
    return 0;
  }
  for (int i = 0; i < r.n; ++i) {
    const double ti = r.n == 1 ? r.a : r.a + (r.b - r.a) * i / (r.n - 1);
    char suffix[16];
    std::snprintf(suffix, sizeof(suffix), "_%03d", i);
    const fs::path p = base.parent_path() / (base.stem().string() + suffix + base.extension().string());
    write_png(render(scene, cam, ti, background, opts).color, p);
  }
  std::printf("wrote %d frames\n", r.n);
  return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const std::string& ckpt, const std::string& data, const std::string& out, int threads) {
  const Scene scene = load_checkpoint(ckpt);
  const Dataset ds = load_dataset(data);
  const auto& frames = ds.test_frames.empty() ? ds.train_frames : ds.test_frames;
  RenderOptions opts;
  opts.threads = threads;
  json per = json::array();
  double sum_psnr = 0.0, sum_ssim = 0.0;
  for (std::size_t f : frames) {
    const auto& fr = ds.frames[f];
    const Image img = render(scene, ds.camera(fr.camera), fr.time, ds.background, opts).color;
    const double p = psnr(img, fr.image), s = ssim(img, fr.image);
    sum_psnr += p;
    sum_ssim += s;
    per.push_back({{"frame", f}, {"camera", fr.camera}, {"time", fr.time}, {"psnr", p}, {"ssim", s}});
  }
  const double n = std::max<double>(1.0, static_cast<double>(frames.size()));
  const json result = {{"split", ds.test_frames.empty() ? "train" : "test"},
                       {"ssim_metric", "ssim_11x11"},
                       {"psnr", sum_psnr / n},
                       {"ssim", sum_ssim / n},
                       {"dssim", dssim(sum_ssim / n)},
                       {"frames", per}};
  write_json(result, out);
  std::printf("psnr %.3f  ssim %.4f  dssim %.4f over %zu frames\n", sum_psnr / n, sum_ssim / n,
              dssim(sum_ssim / n), frames.size());
  return 0;
}

// ---------------------------------------------------------------- flow

int cmd_flow(const std::string& ckpt, const std::string& camera, const std::string& data, double t, double dt,
             const std::string& out, int threads) {
  const Scene scene = load_checkpoint(ckpt);
  const Camera cam = resolve_camera(camera, data);
  RenderOptions opts;
  opts.threads = threads;
  const RenderOutput r = render_flow(scene, cam, t, dt, opts);
  fs::create_directories(out);
  write_flo(r.flow, fs::path(out) / "flow.flo");
  write_png(flow_to_color(r.flow), fs::path(out) / "flow.png", false);
  std::printf("wrote %s\n", (fs::path(out) / "flow.flo").string().c_str());

  const fs::path meta = data.empty() ? fs::path() : fs::path(data) / "synthetic.json";
  if (meta.empty() || !fs::exists(meta)) return 0;
  const json m = read_json(meta);
  SyntheticSpec spec = synthetic_preset(m.at("preset").get<std::string>());
  spec.timesteps = m.at("timesteps").get<int>();
  spec.width = m.at("width").get<int>();
  spec.height = m.at("height").get<int>();
  spec.ring_cameras = m.at("cameras").get<int>();
  spec.test_camera = m.at("test_camera").get<int>();
  std::mt19937_64 rng(m.at("seed").get<std::uint64_t>());
  const SyntheticScene synth = make_synthetic_scene(spec, rng);
  const FlowField gt = ground_truth_flow(synth, cam, t, dt);
  const FlowMetrics fm = eval_flow(r.flow, gt.flow, gt.alpha);
  write_flo(gt.flow, fs::path(out) / "flow_gt.flo");
  write_json({{"epe", fm.epe}, {"angular_accuracy", fm.angular_accuracy}, {"covered", fm.covered},
              {"max_angle_deg", 30.0}},
             fs::path(out) / "flow_eval.json");
  std::printf("flow vs ground truth: EPE %.3f px, angular accuracy %.3f over %zu pixels\n", fm.epe,
              fm.angular_accuracy, fm.covered);
  return 0;
}

// ---------------------------------------------------------------- synth

int cmd_synth(const std::string& preset, const std::string& out, std::uint64_t seed, int timesteps, int res,
              int cameras) {
  SyntheticSpec spec = synthetic_preset(preset);
  spec.timesteps = timesteps;
  spec.width = spec.height = res;
  spec.ring_cameras = cameras;
  spec.test_camera = cameras - 1;
  try {
    spec.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::mt19937_64 rng(seed);
  const SyntheticScene synth = make_synthetic_scene(spec, rng);
  save_dataset(synth.dataset, out);
  save_checkpoint(synth.scene, fs::path(out) / "scene_gt.g4ds");
  write_json({{"preset", preset},
              {"seed", seed},
              {"timesteps", timesteps},
              {"width", res},
              {"height", res},
              {"cameras", cameras},
              {"test_camera", spec.test_camera}},
             fs::path(out) / "synthetic.json");
  std::printf("wrote %zu frames from %d cameras to %s\n", synth.dataset.frames.size(), cameras, out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"4D Gaussian splatting for dynamic scenes"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (default: SPLAT_THREADS, else all cores)")
      ->check(CLI::PositiveNumber);

  // train
  auto* train_cmd = app.add_subcommand("train", "optimize a scene against a dataset");
  std::string data, out, config;
  json overrides = json::object();
  train_cmd->add_option("--data", data, "dataset root")->required();
  train_cmd->add_option("--out", out, "run directory")->required();
  train_cmd->add_option("--config", config, "JSON config; flags override its values");
  int iters = 0, batch = 0, log_interval = 0, eval_interval = 0, ckpt_every = 0, init_points = 0,
      sphere_points = 0, sh_degree = 0, time_order = 0;
  std::uint64_t seed = 0;
  double lambda = 0.0, init_extent = 0.0, sphere_radius = 0.0;
  std::vector<std::string> ablate;
  std::string init_ply, init_time;
  auto* o_iters = train_cmd->add_option("--iters", iters, "iterations")->check(CLI::NonNegativeNumber);
  auto* o_seed = train_cmd->add_option("--seed", seed, "RNG seed");
  auto* o_batch = train_cmd->add_option("--batch", batch, "views per iteration")->check(CLI::PositiveNumber);
  auto* o_lambda = train_cmd->add_option("--lambda", lambda, "SSIM weight in the loss");
  auto* o_ablate = train_cmd->add_option("--ablate", ablate, "no-4drot | no-4dsh | no-time-split")
                       ->check(CLI::IsMember({"no-4drot", "no-4dsh", "no-time-split"}));
  auto* o_log = train_cmd->add_option("--log-interval", log_interval, "metrics.csv row every N iterations");
  auto* o_eval = train_cmd->add_option("--eval-interval", eval_interval, "held-out PSNR every N (0: off)");
  auto* o_ckpt = train_cmd->add_option("--ckpt-every", ckpt_every, "checkpoint every N iterations (0: final only)");
  auto* o_ply = train_cmd->add_option("--init-ply", init_ply, "initialize from a PLY point cloud");
  auto* o_points = train_cmd->add_option("--init-points", init_points, "initial Gaussian count");
  auto* o_extent = train_cmd->add_option("--init-extent", init_extent, "half side of the random init cube");
  auto* o_time = train_cmd->add_option("--init-time", init_time, "uniform | midpoint")
                     ->check(CLI::IsMember({"uniform", "midpoint"}));
  auto* o_sphere = train_cmd->add_option("--sphere-points", sphere_points, "background sphere Gaussians");
  auto* o_radius = train_cmd->add_option("--sphere-radius", sphere_radius,
                                         "background sphere radius (0: twice the camera extent)");
  auto* o_sh = train_cmd->add_option("--sh-degree", sh_degree, "spherical harmonic degree")->check(CLI::Range(0, 3));
  auto* o_order = train_cmd->add_option("--time-order", time_order, "Fourier time order")->check(CLI::Range(0, 8));

  // render
  auto* render_cmd = app.add_subcommand("render", "render frames from a checkpoint");
  std::string ckpt, camera, t_range, bg = "0,0,0";
  double t = 0.5, dt = 1.0 / 60.0;
  int fps_bench = 0;
  render_cmd->add_option("--ckpt", ckpt, "checkpoint")->required();
  render_cmd->add_option("--camera", camera, "dataset camera id or pose JSON")->required();
  render_cmd->add_option("--data", data, "dataset root (for camera ids)");
  render_cmd->add_option("--t", t, "normalized time");
  render_cmd->add_option("--t-range", t_range, "a:b:n, n evenly spaced frames");
  render_cmd->add_option("--out", out, "output PNG (frame index appended for --t-range)");
  render_cmd->add_option("--background", bg, "r,g,b");
  render_cmd->add_option("--fps-bench", fps_bench, "render N times and report timing")->check(CLI::PositiveNumber);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "PSNR / SSIM over the test split");
  eval_cmd->add_option("--ckpt", ckpt, "checkpoint")->required();
  eval_cmd->add_option("--data", data, "dataset root")->required();
  std::string eval_out = "metrics.json";
  eval_cmd->add_option("--out", eval_out, "metrics JSON path");

  // flow
  auto* flow_cmd = app.add_subcommand("flow", "render optical flow between t and t + dt");
  flow_cmd->add_option("--ckpt", ckpt, "checkpoint")->required();
  flow_cmd->add_option("--camera", camera, "dataset camera id or pose JSON")->required();
  flow_cmd->add_option("--data", data, "dataset root (ground truth is used if it is synthetic)");
  flow_cmd->add_option("--t", t, "normalized time");
  flow_cmd->add_option("--dt", dt, "time step");
  std::string flow_out = "flow";
  flow_cmd->add_option("--out", flow_out, "output directory");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dynamic dataset");
  std::string preset = "three-blobs";
  int timesteps = 20, res = 64, cameras = 8;
  std::uint64_t synth_seed = 1;
  synth_cmd->add_option("--preset", preset, "three-blobs | translating")
      ->check(CLI::IsMember({"three-blobs", "translating"}));
  synth_cmd->add_option("--out", out, "dataset root")->required();
  synth_cmd->add_option("--seed", synth_seed, "RNG seed");
  synth_cmd->add_option("--timesteps", timesteps, "frames per camera")->check(CLI::Range(2, 10000));
  synth_cmd->add_option("--res", res, "image side in pixels")->check(CLI::Range(8, 4096));
  synth_cmd->add_option("--cameras", cameras, "ring cameras")->check(CLI::Range(2, 1000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (threads == 0) threads = default_threads();
    if (*train_cmd) {
      auto set = [&](CLI::Option* o, const char* key, const json& v) {
        if (o->count() > 0) overrides[key] = v;
      };
      set(o_iters, "iters", iters);
      set(o_seed, "seed", seed);
      set(o_batch, "batch_size", batch);
      set(o_lambda, "loss_lambda", lambda);
      set(o_ablate, "ablate", ablate);
      set(o_log, "log_interval", log_interval);
      set(o_eval, "eval_interval", eval_interval);
      set(o_ckpt, "ckpt_every", ckpt_every);
      set(o_ply, "init_ply", init_ply);
      set(o_points, "init_points", init_points);
      set(o_extent, "init_extent", init_extent);
      set(o_time, "init_time", init_time);
      set(o_sphere, "sphere_points", sphere_points);
      set(o_radius, "sphere_radius", sphere_radius);
      set(o_sh, "sh_degree", sh_degree);
      set(o_order, "time_order", time_order);
      return cmd_train(data, out, config, overrides, threads);
    }
    if (*render_cmd) {
      if (fps_bench == 0 && out.empty()) throw UsageError("render needs --out (or --fps-bench)");
      return cmd_render(ckpt, camera, data, t, t_range, out, bg, fps_bench, threads);
    }
    if (*eval_cmd) return cmd_eval(ckpt, data, eval_out, threads);
    if (*flow_cmd) {
      if (!(dt > 0.0)) throw UsageError("--dt must be > 0");
      return cmd_flow(ckpt, camera, data, t, dt, flow_out, threads);
    }
    if (*synth_cmd) return cmd_synth(preset, out, synth_seed, timesteps, res, cameras);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
