#include "csiae/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "csiae/errors.hpp"

namespace csiae {

namespace {

void radix2(std::span<std::complex<double>> x, double sign) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) throw ArgumentError("FFT length must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = sign * 2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t m = 0; m < len / 2; ++m) {
        // Twiddles evaluated directly rather than by recurrence to keep
        // round-off at machine precision for every length.
        const std::complex<double> w = std::polar(1.0, angle * static_cast<double>(m));
        const std::complex<double> u = x[start + m];
        const std::complex<double> v = x[start + m + len / 2] * w;
        x[start + m] = u + v;
        x[start + m + len / 2] = u - v;
      }
    }
  }

  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : x) v *= scale;
}

}  // namespace

void unitary_fft(std::span<std::complex<double>> x) { radix2(x, -1.0); }

void unitary_ifft(std::span<std::complex<double>> x) { radix2(x, +1.0); }

}  // namespace csiae
