#include "csiae/pipeline.hpp"

#include <array>
#include <cmath>
#include <string>

#include "csiae/errors.hpp"
#include "csiae/fft.hpp"

namespace csiae {

namespace {

constexpr std::array<InputCategory, 5> kCategories{{
    {1, 16, 1, 16},
    {2, 32, 17, 32},
    {3, 64, 33, 64},
    {4, 128, 65, 128},
    {5, 256, 129, kMaxSupportedRb},
}};

int dim_size(const CsiTensor& h, PartitionDim dim) {
  switch (dim) {
    case PartitionDim::frequency: return h.k;
    case PartitionDim::bs_antenna: return h.n_bs;
    case PartitionDim::ue_antenna: return h.n_ue;
  }
  return 0;
}

}  // namespace

std::span<const InputCategory> input_categories() { return kCategories; }

InputCategory categorize(int k) {
  for (const auto& c : kCategories) {
    if (k >= c.rb_min && k <= c.rb_max) return c;
  }
  throw RangeError("K out of supported range [1, " + std::to_string(kMaxSupportedRb) +
                   "]: " + std::to_string(k));
}

InputCategory category_by_index(int index) {
  if (index < 1 || index > static_cast<int>(kCategories.size())) {
    throw RangeError("input category index must be in [1, 5]");
  }
  return kCategories[index - 1];
}

std::string_view to_string(PartitionDim dim) {
  switch (dim) {
    case PartitionDim::frequency: return "frequency";
    case PartitionDim::bs_antenna: return "bs_antenna";
    case PartitionDim::ue_antenna: return "ue_antenna";
  }
  return "?";
}

std::vector<AntennaSlice> partition(const CsiTensor& h) {
  std::vector<AntennaSlice> out;
  out.reserve(static_cast<std::size_t>(h.n_bs) * h.n_ue);
  for (int bs = 0; bs < h.n_bs; ++bs) {
    for (int ue = 0; ue < h.n_ue; ++ue) {
      AntennaSlice s{h.k, std::vector<double>(2 * static_cast<std::size_t>(h.k))};
      for (int kk = 0; kk < h.k; ++kk) {
        s.data[kk] = h.at(0, kk, bs, ue);
        s.data[h.k + kk] = h.at(1, kk, bs, ue);
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

CsiTensor reconstruct_concat(std::span<const AntennaSlice> parts, int n_bs, int n_ue,
                             double subcarrier_spacing_hz) {
  if (n_bs < 1 || n_ue < 1 ||
      parts.size() != static_cast<std::size_t>(n_bs) * static_cast<std::size_t>(n_ue)) {
    throw ArgumentError("reconstruct_concat: expected N_BS*N_UE slices");
  }
  const int k = parts.front().k;
  CsiTensor h = CsiTensor::zeros(k, n_bs, n_ue, subcarrier_spacing_hz);
  std::size_t i = 0;
  for (int bs = 0; bs < n_bs; ++bs) {
    for (int ue = 0; ue < n_ue; ++ue, ++i) {
      const auto& s = parts[i];
      if (s.k != k || s.data.size() != 2 * static_cast<std::size_t>(k)) {
        throw ArgumentError("reconstruct_concat: inconsistent slice shapes");
      }
      for (int kk = 0; kk < k; ++kk) {
        h.at(0, kk, bs, ue) = s.data[kk];
        h.at(1, kk, bs, ue) = s.data[k + kk];
      }
    }
  }
  return h;
}

std::vector<CsiTensor> partition_along(const CsiTensor& h, PartitionDim dim, int parts) {
  const int size = dim_size(h, dim);
  if (parts < 1 || size % parts != 0) {
    throw ArgumentError("partition_along: " + std::string(to_string(dim)) + " size " +
                        std::to_string(size) + " is not divisible into " +
                        std::to_string(parts) + " parts");
  }
  const int step = size / parts;
  std::vector<CsiTensor> out;
  out.reserve(parts);
  for (int p = 0; p < parts; ++p) {
    const int k = dim == PartitionDim::frequency ? step : h.k;
    const int nb = dim == PartitionDim::bs_antenna ? step : h.n_bs;
    const int nu = dim == PartitionDim::ue_antenna ? step : h.n_ue;
    CsiTensor b = CsiTensor::zeros(k, nb, nu, h.subcarrier_spacing_hz);
    for (int plane = 0; plane < 2; ++plane) {
      for (int kk = 0; kk < k; ++kk) {
        for (int bs = 0; bs < nb; ++bs) {
          for (int ue = 0; ue < nu; ++ue) {
            const int sk = kk + (dim == PartitionDim::frequency ? p * step : 0);
            const int sb = bs + (dim == PartitionDim::bs_antenna ? p * step : 0);
            const int su = ue + (dim == PartitionDim::ue_antenna ? p * step : 0);
            b.at(plane, kk, bs, ue) = h.at(plane, sk, sb, su);
          }
        }
      }
    }
    out.push_back(std::move(b));
  }
  return out;
}

CsiTensor concat_along(std::span<const CsiTensor> blocks, PartitionDim dim) {
  if (blocks.empty()) throw ArgumentError("concat_along: no blocks");
  const auto& first = blocks.front();
  int total = 0;
  for (const auto& b : blocks) {
    const bool same_other =
        (dim == PartitionDim::frequency || b.k == first.k) &&
        (dim == PartitionDim::bs_antenna || b.n_bs == first.n_bs) &&
        (dim == PartitionDim::ue_antenna || b.n_ue == first.n_ue);
    if (!same_other) throw ArgumentError("concat_along: inconsistent block shapes");
    total += dim_size(b, dim);
  }
  CsiTensor h = CsiTensor::zeros(dim == PartitionDim::frequency ? total : first.k,
                                 dim == PartitionDim::bs_antenna ? total : first.n_bs,
                                 dim == PartitionDim::ue_antenna ? total : first.n_ue,
                                 first.subcarrier_spacing_hz);
  int offset = 0;
  for (const auto& b : blocks) {
    for (int plane = 0; plane < 2; ++plane) {
      for (int kk = 0; kk < b.k; ++kk) {
        for (int bs = 0; bs < b.n_bs; ++bs) {
          for (int ue = 0; ue < b.n_ue; ++ue) {
            const int dk = kk + (dim == PartitionDim::frequency ? offset : 0);
            const int db = bs + (dim == PartitionDim::bs_antenna ? offset : 0);
            const int du = ue + (dim == PartitionDim::ue_antenna ? offset : 0);
            h.at(plane, dk, db, du) = b.at(plane, kk, bs, ue);
          }
        }
      }
    }
    offset += dim_size(b, dim);
  }
  return h;
}

DelaySample to_delay(const AntennaSlice& slice, const InputCategory& cat) {
  if (slice.k < 1 || slice.k > cat.ifft_size) {
    throw ArgumentError("to_delay: slice has more bins than the category's IFFT size");
  }
  const int n = cat.ifft_size;
  std::vector<std::complex<double>> buf(n, {0.0, 0.0});
  for (int kk = 0; kk < slice.k; ++kk) buf[kk] = slice.at(kk);
  unitary_ifft(buf);

  DelaySample out;
  out.category = cat;
  out.origin.k = slice.k;
  out.data.resize(2 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out.data[i] = buf[i].real();
    out.data[n + i] = buf[i].imag();
  }
  return out;
}

AntennaSlice from_delay(const DelaySample& sample, int k) {
  const int n = sample.category.ifft_size;
  if (k < 1 || k > n) throw ArgumentError("from_delay: K exceeds the category's IFFT size");
  if (sample.data.size() != 2 * static_cast<std::size_t>(n)) {
    throw ArgumentError("from_delay: sample length does not match its category");
  }
  std::vector<std::complex<double>> buf(n);
  for (int i = 0; i < n; ++i) buf[i] = {sample.data[i], sample.data[n + i]};
  unitary_fft(buf);

  AntennaSlice s{k, std::vector<double>(2 * static_cast<std::size_t>(k))};
  for (int kk = 0; kk < k; ++kk) {
    s.data[kk] = buf[kk].real() * sample.scale;
    s.data[k + kk] = buf[kk].imag() * sample.scale;
  }
  return s;
}

void normalize(DelaySample& sample) {
  double energy = 0.0;
  for (double v : sample.data) energy += v * v;
  const double rms = std::sqrt(energy / static_cast<double>(sample.data.size()));
  if (rms == 0.0) {
    sample.scale = 1.0;
    return;
  }
  for (double& v : sample.data) v /= rms;
  sample.scale = rms;
}

void denormalize(DelaySample& sample) {
  for (double& v : sample.data) v *= sample.scale;
  sample.scale = 1.0;
}

std::vector<DelaySample> to_delay_samples(const CsiTensor& h, std::uint64_t tensor_id,
                                          bool normalized) {
  const InputCategory cat = categorize(h.k);
  auto slices = partition(h);
  std::vector<DelaySample> out;
  out.reserve(slices.size());
  for (std::size_t i = 0; i < slices.size(); ++i) {
    DelaySample d = to_delay(slices[i], cat);
    d.origin = {tensor_id, static_cast<int>(i) / h.n_ue, static_cast<int>(i) % h.n_ue, h.k};
    if (normalized) normalize(d);
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace csiae
