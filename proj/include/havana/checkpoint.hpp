#pragma once

#include <cstdint>
#include <string>

#include "havana/encoder.hpp"

namespace havana {

/// Serialized parameter set plus a JSON echo of the configuration that
/// produced it (encoder settings, training settings, RNG seed summary).
struct Checkpoint {
  std::uint32_t version = 1;
  std::string config_json;
  Parameters params;
};

/// Binary layout: magic "HVNA", u32 version, u32-length-prefixed UTF-8
/// config text, tensor records (u16 name length, name, u8 rank, u32 dims,
/// row-major f64 values), and a trailing CRC-32 of all prior bytes. All
/// integers and floats little-endian.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace havana
