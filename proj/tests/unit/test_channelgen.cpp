#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "csiae/channelgen.hpp"
#include "csiae/errors.hpp"

using namespace csiae;

namespace {

GenSetting single_tap_setting() {
  GenSetting s;
  s.profile = {"flat", {0.0}, {0.0}, true};
  s.snr_db = std::numeric_limits<double>::infinity();
  s.k = 64;
  s.n_bs = 2;
  s.n_ue = 2;
  s.seed = 11;
  s.samples = 3;
  return s;
}

}  // namespace

TEST_CASE("single tap at delay zero has a flat response") {
  for (const auto& t : generate_csi(single_tap_setting())) {
    for (int bs = 0; bs < t.n_bs; ++bs) {
      for (int ue = 0; ue < t.n_ue; ++ue) {
        const double ref = std::abs(t.value(0, bs, ue));
        for (int k = 1; k < t.k; ++k) {
          CHECK(std::abs(std::abs(t.value(k, bs, ue)) - ref) <= 1e-12 * ref);
        }
      }
    }
  }
}

TEST_CASE("generation is deterministic in the seed") {
  auto s = single_tap_setting();
  s.profile = profile_by_name("eva");
  s.snr_db = 15.0;
  const auto a = generate_csi(s);
  const auto b = generate_csi(s);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].data == b[i].data);
  s.seed += 1;
  CHECK(generate_csi(s)[0].data != a[0].data);
}

TEST_CASE("two-tap response matches direct evaluation of the tap sum") {
  GenSetting s;
  s.profile = {"two", {0.0, 800.0}, {0.0, -3.0}, true};
  s.snr_db = std::numeric_limits<double>::infinity();
  s.k = 96;
  s.n_bs = 1;
  s.n_ue = 1;
  s.seed = 5;
  s.samples = 1;
  s.subcarrier_spacing_hz = 30e3;
  const auto t = generate_csi(s).front();

  // Replay the tap stream (stream 1) and evaluate the sum with explicit cos/sin.
  Rng rng = make_rng(s.seed, 1);
  const auto gains = draw_tap_gains(s.profile, rng);
  for (int k = 0; k < s.k; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t l = 0; l < gains.size(); ++l) {
      const double ang = -2.0 * std::numbers::pi * k * s.subcarrier_spacing_hz *
                         s.profile.tap_delays_ns[l] * 1e-9;
      re += gains[l].real() * std::cos(ang) - gains[l].imag() * std::sin(ang);
      im += gains[l].real() * std::sin(ang) + gains[l].imag() * std::cos(ang);
    }
    CHECK(std::abs(t.at(0, k, 0, 0) - re) <= 1e-12);
    CHECK(std::abs(t.at(1, k, 0, 0) - im) <= 1e-12);
  }
}

TEST_CASE("builtin profiles") {
  const auto profiles = builtin_profiles();
  bool has_epa = false;
  bool has_eva = false;
  for (const auto& p : profiles) {
    has_epa |= p.name == "EPA";
    has_eva |= p.name == "EVA";
    CHECK_NOTHROW(p.validate());
    CHECK(p.tap_delays_ns.front() == 0.0);
    double sum = 0.0;
    for (double v : p.normalized_linear_powers()) sum += v;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
  CHECK(has_epa);
  CHECK(has_eva);
  CHECK(profile_by_name("EPA").tap_delays_ns.size() == 7);
  CHECK(profile_by_name("eva").tap_delays_ns.size() == 9);
  CHECK_THROWS_AS(profile_by_name("xyz"), ConfigError);
}

TEST_CASE("TDL family is configurable") {
  const auto p = tdl_exponential("t", 5, 200.0);
  CHECK(p.tap_delays_ns.size() == 5);
  CHECK(p.tap_delays_ns.back() == doctest::Approx(800.0));
  CHECK(p.tap_powers_db.front() == 0.0);
  CHECK(p.tap_powers_db.back() < p.tap_powers_db[1]);
}

TEST_CASE("profile and setting validation") {
  ChannelProfile empty{"none", {}, {}, true};
  CHECK_THROWS_AS(empty.validate(), ConfigError);
  ChannelProfile shifted{"shift", {10.0}, {0.0}, true};
  CHECK_THROWS_AS(shifted.validate(), ConfigError);
  ChannelProfile decreasing{"dec", {0.0, 50.0, 20.0}, {0.0, 0.0, 0.0}, true};
  CHECK_THROWS_AS(decreasing.validate(), ConfigError);

  auto s = single_tap_setting();
  s.profile = empty;
  CHECK_THROWS_AS(generate_csi(s), ConfigError);
  s = single_tap_setting();
  s.k = 300;
  CHECK_THROWS_AS(generate_csi(s), RangeError);
  s = single_tap_setting();
  s.samples = 0;
  CHECK_THROWS_AS(generate_csi(s), ConfigError);
  s = single_tap_setting();
  s.snr_db = std::nan("");
  CHECK_THROWS_AS(generate_csi(s), ConfigError);
}

TEST_CASE("noise power is calibrated to the SNR") {
  GenSetting s;
  s.profile = profile_by_name("EVA");
  s.k = 16;
  s.n_bs = 1;
  s.n_ue = 1;
  s.seed = 99;
  s.samples = 10000;
  for (double snr : {0.0, 10.0, 25.0}) {
    s.snr_db = std::numeric_limits<double>::infinity();
    const auto clean = generate_csi(s);
    s.snr_db = snr;
    const auto noisy = generate_csi(s);
    double noise = 0.0;
    double signal = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
      for (std::size_t j = 0; j < clean[i].data.size(); ++j) {
        const double d = noisy[i].data[j] - clean[i].data[j];
        noise += d * d;
        signal += clean[i].data[j] * clean[i].data[j];
      }
    }
    const double target = std::pow(10.0, -snr / 10.0);
    CHECK(std::abs(noise / signal / target - 1.0) < 0.05);
  }
}

TEST_CASE("normalized tap energy has unit mean") {
  for (const auto& p : builtin_profiles()) {
    Rng rng(1234);
    double total = 0.0;
    const int draws = 20000;
    for (int i = 0; i < draws; ++i) {
      for (const auto& a : draw_tap_gains(p, rng)) total += std::norm(a);
    }
    CHECK(std::abs(total / draws - 1.0) < 0.02);
  }
  ChannelProfile fixed{"fixed", {0.0, 100.0}, {0.0, -6.0}, false};
  Rng rng(3);
  double e = 0.0;
  for (const auto& a : draw_tap_gains(fixed, rng)) e += std::norm(a);
  CHECK(e == doctest::Approx(1.0).epsilon(1e-12));
}
