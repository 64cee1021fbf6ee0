#include "csiae/container.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "binary_io.hpp"
#include "csiae/errors.hpp"

namespace csiae {

using detail::get_le;
using detail::put_le;

std::size_t Container::element_count() const {
  std::size_t n = dims.empty() ? 0 : 1;
  for (auto d : dims) n *= d;
  return n;
}

void write_container(const std::filesystem::path& path, const Container& c) {
  if (c.values.size() != c.element_count()) throw ArgumentError("container values do not match dims");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write("CSIT", 4);
  put_le<std::uint16_t>(out, kContainerVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.dims.size()));
  for (auto d : c.dims) put_le<std::uint32_t>(out, d);
  for (float v : c.values) detail::put_f32(out, v);
  if (!out) throw FormatError("failed writing " + path.string());
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open dataset " + path.string());
  detail::expect_magic(in, "CSIT", path.string());
  const auto version = get_le<std::uint16_t>(in);
  if (version != kContainerVersion) {
    throw FormatError(path.string() + ": unsupported container version " + std::to_string(version));
  }
  Container c;
  const auto ndim = get_le<std::uint32_t>(in);
  if (ndim == 0 || ndim > 8) throw FormatError(path.string() + ": implausible rank");
  for (std::uint32_t i = 0; i < ndim; ++i) c.dims.push_back(get_le<std::uint32_t>(in));
  const std::size_t n = c.element_count();
  c.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.values[i] = detail::get_f32(in);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
  return c;
}

std::string_view container_domain(const Container& c) {
  if (c.dims.size() == 5 && c.dims[1] == 2) return "frequency";
  if (c.dims.size() == 2) return "delay";
  throw FormatError("container shape is neither [n,2,K,N_BS,N_UE] nor [n,2N]");
}

Container tensors_to_container(std::span<const CsiTensor> tensors) {
  if (tensors.empty()) throw ArgumentError("no tensors to store");
  const auto& f = tensors.front();
  Container c;
  c.dims = {static_cast<std::uint32_t>(tensors.size()), 2, static_cast<std::uint32_t>(f.k),
            static_cast<std::uint32_t>(f.n_bs), static_cast<std::uint32_t>(f.n_ue)};
  c.values.reserve(c.element_count());
  for (const auto& t : tensors) {
    if (t.k != f.k || t.n_bs != f.n_bs || t.n_ue != f.n_ue) {
      throw ArgumentError("all tensors in a container must share one shape");
    }
    for (double v : t.data) c.values.push_back(static_cast<float>(v));
  }
  return c;
}

std::vector<CsiTensor> container_to_tensors(const Container& c, double subcarrier_spacing_hz) {
  if (container_domain(c) != "frequency") throw FormatError("container does not hold CSI tensors");
  std::vector<CsiTensor> out;
  const std::size_t per = c.element_count() / c.dims[0];
  for (std::uint32_t i = 0; i < c.dims[0]; ++i) {
    CsiTensor t = CsiTensor::zeros(static_cast<int>(c.dims[2]), static_cast<int>(c.dims[3]),
                                   static_cast<int>(c.dims[4]), subcarrier_spacing_hz);
    for (std::size_t j = 0; j < per; ++j) t.data[j] = c.values[i * per + j];
    out.push_back(std::move(t));
  }
  return out;
}

Container delay_to_container(std::span<const DelaySample> samples) {
  if (samples.empty()) throw ArgumentError("no samples to store");
  const std::size_t len = samples.front().data.size();
  Container c;
  c.dims = {static_cast<std::uint32_t>(samples.size()), static_cast<std::uint32_t>(len)};
  c.values.reserve(c.element_count());
  for (const auto& s : samples) {
    if (s.data.size() != len) throw ArgumentError("delay samples differ in length");
    for (double v : s.data) c.values.push_back(static_cast<float>(v * s.scale));
  }
  return c;
}

std::vector<DelaySample> container_to_delay(const Container& c, bool normalized) {
  if (container_domain(c) != "delay") throw FormatError("container does not hold delay samples");
  const int len = static_cast<int>(c.dims[1]);
  const InputCategory* cat = nullptr;
  for (const auto& k : input_categories()) {
    if (k.input_size() == len) cat = &k;
  }
  if (!cat) throw FormatError("delay sample length matches no input category");
  std::vector<DelaySample> out;
  out.reserve(c.dims[0]);
  for (std::uint32_t i = 0; i < c.dims[0]; ++i) {
    DelaySample s;
    s.category = *cat;
    s.origin.tensor_id = i;
    s.data.assign(c.values.begin() + static_cast<std::ptrdiff_t>(i) * len,
                  c.values.begin() + static_cast<std::ptrdiff_t>(i + 1) * len);
    if (normalized) normalize(s);
    out.push_back(std::move(s));
  }
  return out;
}

std::string dataset_manifest_json(std::span<const GenSetting> settings, std::string_view domain,
                                  const Container& c) {
  nlohmann::json j;
  j["format"] = "CSIT";
  j["container_version"] = kContainerVersion;
  j["generator_version"] = std::string(kGeneratorVersion);
  j["domain"] = std::string(domain);
  j["dims"] = c.dims;
  j["antenna_correlation"] = "independent per (BS, UE) pair";
  j["noise"] = "complex AWGN on the frequency response, E|n|^2 / E|H|^2 = 10^(-snr_db/10)";
  j["dft_convention"] = "unitary";
  j["normalization"] = "per-sample RMS, applied at load time";
  auto& arr = j["settings"] = nlohmann::json::array();
  for (const auto& s : settings) {
    nlohmann::json e;
    e["profile"] = {{"name", s.profile.name},
                    {"tap_delays_ns", s.profile.tap_delays_ns},
                    {"tap_powers_db", s.profile.tap_powers_db},
                    {"rayleigh", s.profile.rayleigh}};
    if (std::isfinite(s.snr_db)) {
      e["snr_db"] = s.snr_db;
    } else {
      e["snr_db"] = "inf";
    }
    e["k"] = s.k;
    e["n_bs"] = s.n_bs;
    e["n_ue"] = s.n_ue;
    e["seed"] = s.seed;
    e["samples"] = s.samples;
    e["subcarrier_spacing_hz"] = s.subcarrier_spacing_hz;
    arr.push_back(std::move(e));
  }
  return j.dump(2);
}

std::vector<GenSetting> read_manifest_settings(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw FormatError("cannot open manifest " + manifest.string());
  try {
    nlohmann::json j;
    in >> j;
    std::vector<GenSetting> out;
    for (const auto& e : j.at("settings")) {
      GenSetting s;
      const auto& p = e.at("profile");
      s.profile.name = p.at("name").get<std::string>();
      s.profile.tap_delays_ns = p.at("tap_delays_ns").get<std::vector<double>>();
      s.profile.tap_powers_db = p.at("tap_powers_db").get<std::vector<double>>();
      s.profile.rayleigh = p.value("rayleigh", true);
      s.snr_db = e.at("snr_db").is_string() ? std::numeric_limits<double>::infinity()
                                            : e.at("snr_db").get<double>();
      s.k = e.at("k").get<int>();
      s.n_bs = e.at("n_bs").get<int>();
      s.n_ue = e.at("n_ue").get<int>();
      s.seed = e.at("seed").get<std::uint64_t>();
      s.samples = e.at("samples").get<int>();
      s.subcarrier_spacing_hz = e.at("subcarrier_spacing_hz").get<double>();
      out.push_back(std::move(s));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed manifest " + manifest.string() + ": " + e.what());
  }
}

}  // namespace csiae
