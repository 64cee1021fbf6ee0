#pragma once

// "CSIT" dataset container:
//   magic "CSIT" | u16 version | u32 ndim | u32 dims[ndim] | f32 values (row-major)
// all little-endian. A JSON manifest sits next to it as <file>.json.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "csiae/channelgen.hpp"
#include "csiae/pipeline.hpp"
#include "csiae/tensor.hpp"

namespace csiae {

inline constexpr std::uint16_t kContainerVersion = 1;

struct Container {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t element_count() const;
};

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

/// dims [n, 2, K, N_BS, N_UE]; all tensors must share one shape.
Container tensors_to_container(std::span<const CsiTensor> tensors);
std::vector<CsiTensor> container_to_tensors(const Container& c, double subcarrier_spacing_hz = 15e3);

/// dims [n, 2 * ifft_size]; stores denormalized delay-domain values.
Container delay_to_container(std::span<const DelaySample> samples);
/// Sample i gets origin.tensor_id = i. Normalizes when requested.
std::vector<DelaySample> container_to_delay(const Container& c, bool normalized = true);

/// "frequency" for [n,2,K,N_BS,N_UE] containers, "delay" for [n, 2N].
std::string_view container_domain(const Container& c);

/// Sidecar manifest text listing every generation setting.
std::string dataset_manifest_json(std::span<const GenSetting> settings, std::string_view domain,
                                  const Container& c);

/// Settings listed in a manifest produced by dataset_manifest_json().
std::vector<GenSetting> read_manifest_settings(const std::filesystem::path& manifest);

}  // namespace csiae
