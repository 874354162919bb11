#include "splat4d/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace splat4d {

namespace {

constexpr char kMagic[4] = {'G', '4', 'D', 'S'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (pos_ + n > bytes_.size()) {
      throw Error(Errc::kFormat, std::string("truncated checkpoint: ") + what + " at byte offset " +
                                     std::to_string(pos_) + " needs " + std::to_string(n) +
                                     " bytes, " + std::to_string(bytes_.size() - pos_) + " left");
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return bytes_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
  std::size_t pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Scene& scene) {
  const ShConfig& sh = scene.sh_config();
  std::vector<std::uint8_t> out;
  out.reserve(kCheckpointHeaderSize + scene.params().size() * 4);
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(scene.size()));
  out.push_back(static_cast<std::uint8_t>(sh.l_max));
  out.push_back(static_cast<std::uint8_t>(sh.n_max));
  out.push_back(0);
  out.push_back(0);
  put_f32(out, scene.duration());
  for (float v : scene.params()) put_f32(out, v);
  return out;
}

Scene decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  in.need(4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(Errc::kFormat, "not a G4DS checkpoint (bad magic)");
  }
  for (int i = 0; i < 4; ++i) in.u8("magic");
  const std::uint32_t version = in.u32("version");
  if (version != kCheckpointVersion) {
    throw Error(Errc::kFormat, "unsupported checkpoint version " + std::to_string(version));
  }
  const std::uint32_t count = in.u32("gaussian count");
  ShConfig sh;
  sh.l_max = in.u8("l_max");
  sh.n_max = in.u8("n_max");
  in.u8("reserved");
  in.u8("reserved");
  const float duration = in.f32("duration");
  if (sh.l_max > kMaxShDegree) {
    throw Error(Errc::kFormat, "checkpoint l_max " + std::to_string(sh.l_max) + " exceeds 3");
  }
  if (!(duration > 0.0f)) throw Error(Errc::kFormat, "checkpoint duration must be > 0");
  sh.period = duration;
  Scene scene(sh, duration);
  const std::size_t floats = static_cast<std::size_t>(count) * scene.stride();
  in.need(floats * 4, "gaussian records");
  scene.reserve(count);
  std::vector<float> record(scene.stride());
  for (std::uint32_t i = 0; i < count; ++i) {
    for (float& v : record) v = in.f32("gaussian record");
    scene.append_record(record);
  }
  return scene;
}

void save_checkpoint(const Scene& scene, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(scene);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::kIo, "failed writing '" + path.string() + "'");
}

Scene load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::kIo, "cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace splat4d
