#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "splat4d/scene.hpp"

namespace splat4d {

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::size_t kCheckpointHeaderSize = 20;

/// G4DS v1, little-endian:
///   "G4DS" | version u32 | count u32 | l_max u8 | n_max u8 | 2 reserved |
///   duration f32 | count x record f32[17 + 3 (n_max+1)(l_max+1)^2]
std::vector<std::uint8_t> encode_checkpoint(const Scene& scene);

/// Throws kFormat on bad magic, unsupported version, or truncation (the
/// message carries the byte offset where data ran out).
Scene decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const Scene& scene, const std::filesystem::path& path);
Scene load_checkpoint(const std::filesystem::path& path);

}  // namespace splat4d
