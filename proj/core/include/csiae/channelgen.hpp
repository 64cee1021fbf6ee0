#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "csiae/random.hpp"
#include "csiae/tensor.hpp"

namespace csiae {

inline constexpr std::string_view kGeneratorVersion = "csiae-channelgen/1";

/// Tapped-delay-line power delay profile.
struct ChannelProfile {
  std::string name;
  std::vector<double> tap_delays_ns;
  std::vector<double> tap_powers_db;
  // Rayleigh taps when true; otherwise unit-modulus taps with uniform phase.
  bool rayleigh = true;

  void validate() const;

  /// Linear tap powers scaled to sum to one.
  std::vector<double> normalized_linear_powers() const;
};

/// EPA, EVA and three exponential-PDP TDL profiles (TDL-30, TDL-100, TDL-300).
std::vector<ChannelProfile> builtin_profiles();

/// Exponential power delay profile with `taps` equally spaced taps covering
/// four times the RMS delay spread.
ChannelProfile tdl_exponential(std::string name, int taps, double rms_delay_ns);

/// Case-insensitive lookup among builtin_profiles(). Throws ConfigError.
ChannelProfile profile_by_name(std::string_view name);

/// Reads {"name", "tap_delays_ns", "tap_powers_db", "rayleigh"} from JSON.
ChannelProfile load_profile(const std::filesystem::path& path);

struct GenSetting {
  ChannelProfile profile;
  double snr_db = 20.0;  // +inf disables noise
  int k = 128;
  int n_bs = 32;
  int n_ue = 4;
  std::uint64_t seed = 0;
  int samples = 1;
  double subcarrier_spacing_hz = 15e3;

  void validate() const;
};

/// Draws one set of complex tap gains with variances from the normalized profile.
std::vector<std::complex<double>> draw_tap_gains(const ChannelProfile& profile, Rng& rng);

/// Frequency response sum_l a_l exp(-j 2 pi k df tau_l) at bin k.
std::complex<double> frequency_response(const ChannelProfile& profile,
                                        const std::vector<std::complex<double>>& gains, int k,
                                        double subcarrier_spacing_hz);

/// `setting.samples` tensors; deterministic in the setting. Tap gains and noise
/// come from separate streams, so the clean channel does not depend on snr_db.
std::vector<CsiTensor> generate_csi(const GenSetting& setting);

}  // namespace csiae
