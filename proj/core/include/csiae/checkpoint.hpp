#pragma once

// "CSAE" checkpoint:
//   magic "CSAE" | u16 version | u32 metadata length | metadata JSON |
//   u32 model count | shape table | f64 parameters
// Shape table entry: u8 role (0 encoder, 1 fcb, 2 decoder), u32 index,
// u32 layer count, then per layer u32 in, u32 out, u8 activation.
// Parameters follow in table order: weights row-major, then biases.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "csiae/models.hpp"
#include "csiae/training.hpp"

namespace csiae {

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct LoadedCheckpoint {
  AeBundle bundle;
  std::string metadata_json;
};

/// `extra_json` must be a JSON object; it is stored under "extra".
void save_checkpoint(const std::filesystem::path& path, const AeBundle& bundle,
                     const TrainConfig* cfg = nullptr, const History& history = {},
                     std::string_view extra_json = "{}");

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace csiae
