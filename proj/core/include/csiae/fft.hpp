#pragma once

#include <complex>
#include <span>

namespace csiae {

/// In-place unitary DFT (1/sqrt(N) scaling in both directions), radix-2.
/// Forward uses exp(-j 2 pi k n / N). Length must be a power of two.
void unitary_fft(std::span<std::complex<double>> x);
void unitary_ifft(std::span<std::complex<double>> x);

constexpr bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace csiae
