#include "splat4d/ply.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

namespace splat4d {

namespace {

struct Property {
  std::string name;
  std::string type;
  std::size_t size = 0;
  std::size_t offset = 0;
};

std::size_t type_size(const std::string& type) {
  if (type == "char" || type == "uchar" || type == "int8" || type == "uint8") return 1;
  if (type == "short" || type == "ushort" || type == "int16" || type == "uint16") return 2;
  if (type == "int" || type == "uint" || type == "float" || type == "int32" || type == "uint32" ||
      type == "float32")
    return 4;
  if (type == "double" || type == "float64") return 8;
  throw Error(Errc::kFormat, "unsupported PLY property type '" + type + "'");
}

double read_value(const std::uint8_t* p, const std::string& type) {
  auto le = [p](int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
  };
  if (type == "uchar" || type == "uint8") return p[0];
  if (type == "char" || type == "int8") return static_cast<std::int8_t>(p[0]);
  if (type == "ushort" || type == "uint16") return static_cast<std::uint16_t>(le(2));
  if (type == "short" || type == "int16") return static_cast<std::int16_t>(le(2));
  if (type == "uint" || type == "uint32") return static_cast<std::uint32_t>(le(4));
  if (type == "int" || type == "int32") return static_cast<std::int32_t>(le(4));
  if (type == "float" || type == "float32") return std::bit_cast<float>(static_cast<std::uint32_t>(le(4)));
  return std::bit_cast<double>(le(8));
}

}  // namespace

std::vector<ColoredPoint> read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open PLY '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("ply", 0) != 0) throw Error(Errc::kFormat, "missing 'ply' magic");

  std::size_t vertex_count = 0;
  bool in_vertex = false, seen_vertex = false;
  std::vector<Property> props;
  std::size_t stride = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt != "binary_little_endian") {
        throw Error(Errc::kFormat, "only binary_little_endian PLY is supported, got " + fmt);
      }
    } else if (word == "element") {
      std::string name;
      std::size_t count = 0;
      ss >> name >> count;
      in_vertex = name == "vertex";
      if (in_vertex) {
        vertex_count = count;
        seen_vertex = true;
      } else if (!seen_vertex) {
        throw Error(Errc::kFormat, "vertex element must come first");
      }
    } else if (word == "property" && in_vertex) {
      Property p;
      ss >> p.type;
      if (p.type == "list") throw Error(Errc::kFormat, "list properties on vertices unsupported");
      ss >> p.name;
      p.size = type_size(p.type);
      p.offset = stride;
      stride += p.size;
      props.push_back(p);
    } else if (word == "end_header") {
      break;
    }
  }
  auto find = [&](const std::string& name) -> const Property& {
    for (const auto& p : props)
      if (p.name == name) return p;
    throw Error(Errc::kFormat, "PLY vertex property '" + name + "' missing");
  };
  const Property* pos[3] = {&find("x"), &find("y"), &find("z")};
  const Property* col[3] = {&find("red"), &find("green"), &find("blue")};

  std::vector<std::uint8_t> row(stride);
  std::vector<ColoredPoint> points(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(stride))) {
      throw Error(Errc::kFormat, "PLY truncated at vertex " + std::to_string(i));
    }
    for (int k = 0; k < 3; ++k) {
      points[i].position[k] = read_value(row.data() + pos[k]->offset, pos[k]->type);
      const double c = read_value(row.data() + col[k]->offset, col[k]->type);
      const bool integral = col[k]->type != "float" && col[k]->type != "float32" &&
                            col[k]->type != "double" && col[k]->type != "float64";
      points[i].color[k] = integral ? c / 255.0 : c;
    }
  }
  return points;
}

void write_ply(const std::vector<ColoredPoint>& points, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot open '" + path.string() + "' for writing");
  out << "ply\nformat binary_little_endian 1.0\nelement vertex " << points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n";
  for (const ColoredPoint& p : points) {
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(static_cast<float>(p.position[k]));
      for (int b = 0; b < 4; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
    for (int k = 0; k < 3; ++k) {
      out.put(static_cast<char>(std::lround(std::clamp(p.color[k], 0.0, 1.0) * 255.0)));
    }
  }
}

}  // namespace splat4d
