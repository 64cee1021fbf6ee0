#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace csiae {

/// Stacked real/imaginary channel response, shape [2, K, N_BS, N_UE],
/// row-major. Plane 0 holds the real part, plane 1 the imaginary part.
struct CsiTensor {
  int k = 0;
  int n_bs = 0;
  int n_ue = 0;
  double subcarrier_spacing_hz = 15e3;
  std::vector<double> data;

  static CsiTensor zeros(int k, int n_bs, int n_ue, double subcarrier_spacing_hz = 15e3);

  std::size_t plane_size() const {
    return static_cast<std::size_t>(k) * n_bs * n_ue;
  }
  std::size_t size() const { return 2 * plane_size(); }

  std::size_t index(int plane, int kk, int bs, int ue) const {
    return ((static_cast<std::size_t>(plane) * k + kk) * n_bs + bs) * n_ue + ue;
  }

  double& at(int plane, int kk, int bs, int ue) { return data[index(plane, kk, bs, ue)]; }
  double at(int plane, int kk, int bs, int ue) const { return data[index(plane, kk, bs, ue)]; }

  std::complex<double> value(int kk, int bs, int ue) const {
    return {at(0, kk, bs, ue), at(1, kk, bs, ue)};
  }
  void set(int kk, int bs, int ue, std::complex<double> v) {
    at(0, kk, bs, ue) = v.real();
    at(1, kk, bs, ue) = v.imag();
  }

  /// Throws ArgumentError when dimensions, storage or entries are invalid.
  void validate() const;

  friend bool operator==(const CsiTensor&, const CsiTensor&) = default;
};

}  // namespace csiae
