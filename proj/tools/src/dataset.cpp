#include "dataset.hpp"

#include <charconv>
#include <cmath>
#include <limits>

#include "csiae/container.hpp"
#include "csiae/errors.hpp"
#include "csiae/random.hpp"

namespace csiae::cli {

namespace {

constexpr std::uint64_t kSplitStream = 0x5e11;

std::vector<std::string> flatten(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& s : items) {
    std::size_t start = 0;
    while (start <= s.size()) {
      const std::size_t end = s.find(',', start);
      const std::string tok = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
      if (!tok.empty()) out.push_back(tok);
      if (end == std::string::npos) break;
      start = end + 1;
    }
  }
  return out;
}

std::vector<std::string> split_range(const std::string& tok) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = tok.find(':', start);
    parts.push_back(tok.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  if (parts.size() > 3) throw ConfigError("bad range '" + tok + "' (expected first:last[:step])");
  return parts;
}

int to_int(const std::string& tok) {
  int v = 0;
  const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size() || tok.empty()) {
    throw ConfigError("not an integer: '" + tok + "'");
  }
  return v;
}

double to_double(const std::string& tok) {
  if (tok == "inf" || tok == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != tok.size() || tok.empty()) throw ConfigError("not a number: '" + tok + "'");
  return v;
}

}  // namespace

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "test") return Split::test;
  if (name == "all") return Split::all;
  throw ConfigError("unknown split '" + name + "' (expected train, test or all)");
}

bool is_test_id(std::uint64_t tensor_id, std::uint64_t split_seed) {
  return derive_seed(derive_seed(split_seed, kSplitStream), tensor_id) % 10 == 0;
}

Dataset load_dataset(const std::filesystem::path& path) {
  const Container c = read_container(path);
  Dataset d;
  d.domain = std::string(container_domain(c));
  if (d.domain == "frequency") {
    d.tensors = container_to_tensors(c);
    for (std::size_t i = 0; i < d.tensors.size(); ++i) {
      for (auto& s : to_delay_samples(d.tensors[i], i)) d.samples.push_back(std::move(s));
    }
  } else {
    d.samples = container_to_delay(c, true);
    std::uint64_t per_tensor = 1;
    const std::filesystem::path sidecar = path.string() + ".json";
    if (std::filesystem::exists(sidecar)) {
      const auto settings = read_manifest_settings(sidecar);
      if (!settings.empty()) per_tensor = static_cast<std::uint64_t>(settings[0].n_bs) * settings[0].n_ue;
    }
    for (std::size_t i = 0; i < d.samples.size(); ++i) d.samples[i].origin.tensor_id = i / per_tensor;
  }
  if (d.samples.empty()) throw ConfigError(path.string() + " holds no samples");
  d.category = d.samples.front().category;
  for (const auto& s : d.samples) {
    if (!(s.category == d.category)) {
      throw ConfigError("dataset mixes input categories; generate one category per file");
    }
  }
  return d;
}

Dataset select_split(const Dataset& d, Split split, std::uint64_t split_seed) {
  if (split == Split::all) return d;
  const bool want_test = split == Split::test;
  Dataset out;
  out.domain = d.domain;
  out.category = d.category;
  for (std::size_t i = 0; i < d.tensors.size(); ++i) {
    if (is_test_id(i, split_seed) == want_test) out.tensors.push_back(d.tensors[i]);
  }
  for (const auto& s : d.samples) {
    if (is_test_id(s.origin.tensor_id, split_seed) == want_test) out.samples.push_back(s);
  }
  if (out.samples.empty()) {
    throw ConfigError(std::string("the ") + (want_test ? "test" : "train") +
                      " split is empty; generate more samples or use --split all");
  }
  return out;
}

std::vector<int> parse_int_list(const std::vector<std::string>& items) {
  std::vector<int> out;
  for (const auto& tok : flatten(items)) {
    const auto r = split_range(tok);
    if (r.size() == 1) {
      out.push_back(to_int(r[0]));
      continue;
    }
    const int first = to_int(r[0]), last = to_int(r[1]), step = r.size() == 3 ? to_int(r[2]) : 1;
    if (step <= 0 || last < first) throw ConfigError("bad range '" + tok + "'");
    for (int v = first; v <= last; v += step) out.push_back(v);
  }
  return out;
}

std::vector<double> parse_double_list(const std::vector<std::string>& items) {
  std::vector<double> out;
  for (const auto& tok : flatten(items)) {
    const auto r = split_range(tok);
    if (r.size() == 1) {
      out.push_back(to_double(r[0]));
      continue;
    }
    const double first = to_double(r[0]), last = to_double(r[1]), step = r.size() == 3 ? to_double(r[2]) : 1.0;
    if (!(step > 0.0) || !(last >= first) || !std::isfinite(last)) throw ConfigError("bad range '" + tok + "'");
    const auto n = static_cast<long>(std::floor((last - first) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(first + static_cast<double>(i) * step);
  }
  return out;
}

}  // namespace csiae::cli
