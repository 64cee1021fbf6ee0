#include "csiae/channelgen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "csiae/errors.hpp"
#include "csiae/pipeline.hpp"

namespace csiae {

namespace {

enum Stream : std::uint64_t { kTapStream = 1, kNoiseStream = 2 };

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

CsiTensor CsiTensor::zeros(int k, int n_bs, int n_ue, double subcarrier_spacing_hz) {
  if (k < 1 || n_bs < 1 || n_ue < 1) {
    throw ArgumentError("CsiTensor dimensions must be positive");
  }
  CsiTensor t;
  t.k = k;
  t.n_bs = n_bs;
  t.n_ue = n_ue;
  t.subcarrier_spacing_hz = subcarrier_spacing_hz;
  t.data.assign(t.size(), 0.0);
  return t;
}

void CsiTensor::validate() const {
  if (k < 1 || n_bs < 1 || n_ue < 1) throw ArgumentError("CsiTensor dimensions must be positive");
  if (!(subcarrier_spacing_hz > 0.0) || !std::isfinite(subcarrier_spacing_hz)) {
    throw ArgumentError("subcarrier spacing must be positive");
  }
  if (data.size() != size()) throw ArgumentError("CsiTensor storage does not match its shape");
  for (double v : data) {
    if (!std::isfinite(v)) throw ArgumentError("CsiTensor holds a non-finite entry");
  }
}

void ChannelProfile::validate() const {
  if (tap_delays_ns.empty()) throw ConfigError("profile '" + name + "' has no taps");
  if (tap_delays_ns.size() != tap_powers_db.size()) {
    throw ConfigError("profile '" + name + "': delay and power lists differ in length");
  }
  if (tap_delays_ns.front() != 0.0) {
    throw ConfigError("profile '" + name + "': first tap delay must be 0");
  }
  for (std::size_t i = 0; i < tap_delays_ns.size(); ++i) {
    if (!std::isfinite(tap_delays_ns[i]) || !std::isfinite(tap_powers_db[i])) {
      throw ConfigError("profile '" + name + "': non-finite tap entry");
    }
    if (i > 0 && tap_delays_ns[i] < tap_delays_ns[i - 1]) {
      throw ConfigError("profile '" + name + "': tap delays must be non-decreasing");
    }
  }
}

std::vector<double> ChannelProfile::normalized_linear_powers() const {
  std::vector<double> p(tap_powers_db.size());
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::pow(10.0, tap_powers_db[i] / 10.0);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

ChannelProfile tdl_exponential(std::string name, int taps, double rms_delay_ns) {
  if (taps < 1) throw ConfigError("TDL profile needs at least one tap");
  if (!(rms_delay_ns > 0.0)) throw ConfigError("TDL delay spread must be positive");
  ChannelProfile p;
  p.name = std::move(name);
  const double span = 4.0 * rms_delay_ns;
  for (int i = 0; i < taps; ++i) {
    const double tau = taps == 1 ? 0.0 : span * i / (taps - 1);
    p.tap_delays_ns.push_back(tau);
    // 10*log10(exp(-tau/ds))
    p.tap_powers_db.push_back(-10.0 * std::numbers::log10e * tau / rms_delay_ns);
  }
  return p;
}

std::vector<ChannelProfile> builtin_profiles() {
  std::vector<ChannelProfile> out;
  out.push_back({"EPA",
                 {0, 30, 70, 90, 110, 190, 410},
                 {0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8},
                 true});
  out.push_back({"EVA",
                 {0, 30, 150, 310, 370, 710, 1090, 1730, 2510},
                 {0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9},
                 true});
  out.push_back(tdl_exponential("TDL-30", 8, 30.0));
  out.push_back(tdl_exponential("TDL-100", 8, 100.0));
  out.push_back(tdl_exponential("TDL-300", 8, 300.0));
  return out;
}

ChannelProfile profile_by_name(std::string_view name) {
  const std::string key = lower(name);
  for (auto& p : builtin_profiles()) {
    if (lower(p.name) == key) return p;
  }
  throw ConfigError("unknown channel profile '" + std::string(name) + "'");
}

ChannelProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open profile file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    ChannelProfile p;
    p.name = j.value("name", path.stem().string());
    p.tap_delays_ns = j.at("tap_delays_ns").get<std::vector<double>>();
    p.tap_powers_db = j.at("tap_powers_db").get<std::vector<double>>();
    p.rayleigh = j.value("rayleigh", true);
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("malformed profile file " + path.string() + ": " + e.what());
  }
}

void GenSetting::validate() const {
  profile.validate();
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw ConfigError("snr_db must be finite or +inf");
  }
  if (samples < 1) throw ConfigError("samples must be >= 1");
  if (n_bs < 1 || n_ue < 1) throw ConfigError("antenna counts must be >= 1");
  if (!(subcarrier_spacing_hz > 0.0)) throw ConfigError("subcarrier spacing must be positive");
  categorize(k);  // throws RangeError outside [1, 256]
}

std::vector<std::complex<double>> draw_tap_gains(const ChannelProfile& profile, Rng& rng) {
  const auto powers = profile.normalized_linear_powers();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<std::complex<double>> gains(powers.size());
  for (std::size_t l = 0; l < powers.size(); ++l) {
    if (profile.rayleigh) {
      const double sigma = std::sqrt(powers[l] / 2.0);
      const double re = normal(rng);
      const double im = normal(rng);
      gains[l] = {sigma * re, sigma * im};
    } else {
      gains[l] = std::polar(std::sqrt(powers[l]), phase(rng));
    }
  }
  return gains;
}

std::complex<double> frequency_response(const ChannelProfile& profile,
                                        const std::vector<std::complex<double>>& gains, int k,
                                        double subcarrier_spacing_hz) {
  std::complex<double> h{0.0, 0.0};
  for (std::size_t l = 0; l < gains.size(); ++l) {
    const double angle =
        -2.0 * std::numbers::pi * k * subcarrier_spacing_hz * profile.tap_delays_ns[l] * 1e-9;
    h += gains[l] * std::polar(1.0, angle);
  }
  return h;
}

std::vector<CsiTensor> generate_csi(const GenSetting& setting) {
  setting.validate();
  Rng tap_rng = make_rng(setting.seed, kTapStream);
  Rng noise_rng = make_rng(setting.seed, kNoiseStream);
  const bool noisy = std::isfinite(setting.snr_db);
  // E|H_k|^2 = 1 after power normalization, so the per-entry complex noise
  // variance equals the target noise-to-signal ratio.
  const double noise_sigma = noisy ? std::sqrt(std::pow(10.0, -setting.snr_db / 10.0) / 2.0) : 0.0;
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<CsiTensor> out;
  out.reserve(setting.samples);
  for (int s = 0; s < setting.samples; ++s) {
    CsiTensor t = CsiTensor::zeros(setting.k, setting.n_bs, setting.n_ue,
                                   setting.subcarrier_spacing_hz);
    for (int bs = 0; bs < setting.n_bs; ++bs) {
      for (int ue = 0; ue < setting.n_ue; ++ue) {
        const auto gains = draw_tap_gains(setting.profile, tap_rng);
        for (int kk = 0; kk < setting.k; ++kk) {
          t.set(kk, bs, ue,
                frequency_response(setting.profile, gains, kk, setting.subcarrier_spacing_hz));
        }
      }
    }
    if (noisy) {
      for (double& v : t.data) v += noise_sigma * normal(noise_rng);
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace csiae
