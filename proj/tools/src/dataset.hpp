#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "csiae/pipeline.hpp"
#include "csiae/tensor.hpp"

namespace csiae::cli {

enum class Split { train, test, all };

Split parse_split(const std::string& name);

/// Held-out membership from a seed-stable hash of the tensor id (10% test).
bool is_test_id(std::uint64_t tensor_id, std::uint64_t split_seed);

struct Dataset {
  std::string domain;               // "frequency" or "delay"
  std::vector<CsiTensor> tensors;   // frequency containers only
  std::vector<DelaySample> samples; // normalized, origin.tensor_id set
  InputCategory category;
};

/// Loads a CSIT container. Delay rows are grouped into tensors using the
/// antenna counts in the sidecar manifest when present.
Dataset load_dataset(const std::filesystem::path& path);

Dataset select_split(const Dataset& d, Split split, std::uint64_t split_seed);

std::vector<int> parse_int_list(const std::vector<std::string>& items);
std::vector<double> parse_double_list(const std::vector<std::string>& items);

}  // namespace csiae::cli
