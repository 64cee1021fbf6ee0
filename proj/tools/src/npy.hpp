#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace csiae::cli {

/// NumPy .npy (format 1.0), little-endian float64, C order.
void write_npy(const std::filesystem::path& path, std::span<const std::uint64_t> shape,
               std::span<const double> values);

}  // namespace csiae::cli
