#pragma once

// Input-space generalization: split a CSI tensor into per-antenna-pair
// slices, zero-pad each slice to its category's IFFT size and move it to the
// delay domain. Every step has an exact inverse used on the decoder side.

#include <complex>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "csiae/tensor.hpp"

namespace csiae {

inline constexpr int kMaxSupportedRb = 256;

struct InputCategory {
  int index = 0;      // 1..5
  int ifft_size = 0;  // 2^(index+3)
  int rb_min = 0;
  int rb_max = 0;

  int input_size() const { return 2 * ifft_size; }
  friend bool operator==(const InputCategory&, const InputCategory&) = default;
};

/// The five categories, ordered by index. Category 5 stops at 256 RBs.
std::span<const InputCategory> input_categories();

/// Unique category with rb_min <= k <= rb_max. Throws RangeError otherwise.
InputCategory categorize(int k);

InputCategory category_by_index(int index);

/// One antenna pair's frequency response: real plane [0, k) then imaginary plane.
struct AntennaSlice {
  int k = 0;
  std::vector<double> data;

  std::complex<double> at(int kk) const { return {data[kk], data[k + kk]}; }
  friend bool operator==(const AntennaSlice&, const AntennaSlice&) = default;
};

struct SampleOrigin {
  std::uint64_t tensor_id = 0;
  int bs_index = 0;
  int ue_index = 0;
  int k = 0;
};

/// Delay-domain encoder input of length 2 * ifft_size (real plane, then
/// imaginary plane). `scale` is the per-sample RMS factor removed by
/// normalize() and reapplied by denormalize().
struct DelaySample {
  std::vector<double> data;
  InputCategory category;
  SampleOrigin origin;
  double scale = 1.0;
};

/// N_BS * N_UE slices in (bs major, ue minor) order.
std::vector<AntennaSlice> partition(const CsiTensor& h);

/// Inverse of partition().
CsiTensor reconstruct_concat(std::span<const AntennaSlice> parts, int n_bs, int n_ue,
                             double subcarrier_spacing_hz = 15e3);

enum class PartitionDim { frequency, bs_antenna, ue_antenna };

std::string_view to_string(PartitionDim dim);

/// `parts` contiguous equal blocks along `dim`. Throws ArgumentError when the
/// dimension is not divisible.
std::vector<CsiTensor> partition_along(const CsiTensor& h, PartitionDim dim, int parts);

/// Inverse of partition_along().
CsiTensor concat_along(std::span<const CsiTensor> blocks, PartitionDim dim);

/// Zero-pad to cat.ifft_size and apply the unitary inverse DFT.
DelaySample to_delay(const AntennaSlice& slice, const InputCategory& cat);

/// Unitary forward DFT, cropped to the first k bins. Applies sample.scale.
AntennaSlice from_delay(const DelaySample& sample, int k);

/// Scales data to unit RMS and records the factor. All-zero samples keep scale 1.
void normalize(DelaySample& sample);
void denormalize(DelaySample& sample);

/// partition + categorize + to_delay (+ normalize when requested) for every slice.
std::vector<DelaySample> to_delay_samples(const CsiTensor& h, std::uint64_t tensor_id,
                                          bool normalized = true);

}  // namespace csiae
