#include "splat4d/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "splat4d/image_io.hpp"

namespace splat4d {

namespace {

using nlohmann::json;

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(Errc::kSchema, "missing field at " + path + (path.empty() ? "" : ".") + key);
  }
  return obj.at(key);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

double number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number()) throw Error(Errc::kSchema, "expected number at " + join(path, key));
  return v.get<double>();
}

int integer(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_number_integer()) throw Error(Errc::kSchema, "expected integer at " + join(path, key));
  return v.get<int>();
}

std::string string_field(const json& obj, const std::string& key, const std::string& path) {
  const json& v = field(obj, key, path);
  if (!v.is_string()) throw Error(Errc::kSchema, "expected string at " + join(path, key));
  return v.get<std::string>();
}

std::vector<double> numbers(const json& v, std::size_t n, const std::string& path) {
  if (!v.is_array() || v.size() != n) {
    throw Error(Errc::kSchema, "expected array of " + std::to_string(n) + " numbers at " + path);
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!v[i].is_number()) throw Error(Errc::kSchema, "expected number at " + path + "[" + std::to_string(i) + "]");
    out.push_back(v[i].get<double>());
  }
  return out;
}

Camera parse_camera(const json& j, const std::string& path) {
  Camera cam;
  cam.id = string_field(j, "id", path);
  cam.fx = number(j, "fx", path);
  cam.fy = number(j, "fy", path);
  cam.cx = number(j, "cx", path);
  cam.cy = number(j, "cy", path);
  cam.width = integer(j, "width", path);
  cam.height = integer(j, "height", path);
  const auto m = numbers(field(j, "world_to_camera", path), 16, join(path, "world_to_camera"));
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) cam.world_to_camera(r, c) = m[r * 4 + c];
  cam.near = j.contains("near") ? number(j, "near", path) : 0.01;
  try {
    cam.validate();
  } catch (const Error& e) {
    throw Error(Errc::kSchema, std::string(e.what()) + " at " + path);
  }
  return cam;
}

json camera_json(const Camera& cam) {
  json m = json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m.push_back(cam.world_to_camera(r, c));
  return {{"id", cam.id},         {"fx", cam.fx},       {"fy", cam.fy},
          {"cx", cam.cx},         {"cy", cam.cy},       {"width", cam.width},
          {"height", cam.height}, {"world_to_camera", m}, {"near", cam.near}};
}

}  // namespace

const Camera& Dataset::camera(const std::string& id) const {
  const auto it = cameras.find(id);
  if (it == cameras.end()) throw Error(Errc::kInvalidArgument, "unknown camera '" + id + "'");
  return it->second;
}

double Dataset::camera_extent() const {
  if (cameras.empty()) return 1.0;
  Vec3 centroid = Vec3::Zero();
  for (const auto& [id, cam] : cameras) centroid += cam.center();
  centroid /= static_cast<double>(cameras.size());
  double radius = 0.0;
  for (const auto& [id, cam] : cameras) radius = std::max(radius, (cam.center() - centroid).norm());
  return std::max(1.1 * radius, 1.0);
}

Camera load_camera_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::kSchema, path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.contains("id")) j["id"] = path.stem().string();
  return parse_camera(j, "");
}

void assign_train_split(Dataset& dataset) {
  const std::set<std::size_t> test(dataset.test_frames.begin(), dataset.test_frames.end());
  dataset.train_frames.clear();
  for (std::size_t i = 0; i < dataset.frames.size(); ++i)
    if (!test.count(i)) dataset.train_frames.push_back(i);
}

Dataset load_dataset(const std::filesystem::path& root) {
  const auto manifest_path = root / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw Error(Errc::kIo, "cannot open '" + manifest_path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw Error(Errc::kSchema, "manifest.json is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw Error(Errc::kSchema, "manifest root must be an object");

  Dataset ds;
  const double raw_duration = number(j, "duration", "");
  if (!(raw_duration > 0.0)) throw Error(Errc::kSchema, "duration must be > 0 at duration");
  if (j.contains("background")) {
    const auto bg = numbers(j.at("background"), 3, "background");
    ds.background = Vec3(bg[0], bg[1], bg[2]);
  }

  const json& cams = field(j, "cameras", "");
  if (!cams.is_array() || cams.empty()) throw Error(Errc::kSchema, "expected non-empty array at cameras");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    Camera cam = parse_camera(cams[i], "cameras[" + std::to_string(i) + "]");
    if (ds.cameras.count(cam.id)) {
      throw Error(Errc::kSchema, "duplicate camera id '" + cam.id + "' at cameras[" + std::to_string(i) + "]");
    }
    ds.cameras.emplace(cam.id, cam);
  }

  const json& frames = field(j, "frames", "");
  if (!frames.is_array() || frames.empty()) throw Error(Errc::kSchema, "expected non-empty array at frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::string path = "frames[" + std::to_string(i) + "]";
    DatasetFrame f;
    f.camera = string_field(frames[i], "camera", path);
    f.time = number(frames[i], "time", path);
    f.image_path = string_field(frames[i], "image", path);
    if (!ds.cameras.count(f.camera)) {
      throw Error(Errc::kSchema, "unknown camera '" + f.camera + "' at " + path + ".camera");
    }
    ds.frames.push_back(std::move(f));
  }
  if (j.contains("test_frames")) {
    const json& tf = j.at("test_frames");
    if (!tf.is_array()) throw Error(Errc::kSchema, "expected array at test_frames");
    for (std::size_t i = 0; i < tf.size(); ++i) {
      if (!tf[i].is_number_integer() || tf[i].get<long long>() < 0 ||
          tf[i].get<std::size_t>() >= ds.frames.size()) {
        throw Error(Errc::kSchema, "invalid frame index at test_frames[" + std::to_string(i) + "]");
      }
      ds.test_frames.push_back(tf[i].get<std::size_t>());
    }
  }
  assign_train_split(ds);

  const auto [lo, hi] = std::minmax_element(ds.frames.begin(), ds.frames.end(),
                                            [](const auto& a, const auto& b) { return a.time < b.time; });
  ds.raw_time_min = lo->time;
  ds.raw_time_max = hi->time;
  const double span = ds.raw_time_max - ds.raw_time_min;
  for (auto& f : ds.frames) f.time = span > 0.0 ? (f.time - ds.raw_time_min) / span : 0.0;
  ds.duration = 1.0;

  for (std::size_t i = 0; i < ds.frames.size(); ++i) {
    DatasetFrame& f = ds.frames[i];
    try {
      f.image = read_png(root / f.image_path);
    } catch (const Error& e) {
      throw Error(Errc::kIo, "frame " + std::to_string(i) + " ('" + f.image_path + "'): " + e.what());
    }
    const Camera& cam = ds.camera(f.camera);
    if (f.image.width != cam.width || f.image.height != cam.height) {
      throw Error(Errc::kSchema, "frame " + std::to_string(i) + " image is " +
                                     std::to_string(f.image.width) + "x" + std::to_string(f.image.height) +
                                     ", camera '" + cam.id + "' expects " + std::to_string(cam.width) + "x" +
                                     std::to_string(cam.height));
    }
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& root) {
  std::filesystem::create_directories(root);
  json j;
  j["duration"] = dataset.duration;
  j["background"] = {dataset.background[0], dataset.background[1], dataset.background[2]};
  j["cameras"] = json::array();
  for (const auto& [id, cam] : dataset.cameras) j["cameras"].push_back(camera_json(cam));
  j["frames"] = json::array();
  for (const auto& f : dataset.frames) {
    j["frames"].push_back({{"camera", f.camera}, {"time", f.time}, {"image", f.image_path}});
    const auto image_path = root / f.image_path;
    std::filesystem::create_directories(image_path.parent_path());
    write_png(f.image, image_path);
  }
  j["test_frames"] = dataset.test_frames;
  std::ofstream out(root / "manifest.json");
  if (!out) throw Error(Errc::kIo, "cannot write manifest in '" + root.string() + "'");
  out << j.dump(2) << "\n";
}

}  // namespace splat4d
