#include "manifest.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "csiae/channelgen.hpp"
#include "csiae/errors.hpp"

namespace csiae::cli {

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string() + " for hashing");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw FormatError("sha256 initialization failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[md[i] >> 4]);
    hex.push_back(kHex[md[i] & 15]);
  }
  return hex;
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("CSIAE_OUT_DIR"); env && *env) return env;
  return "csiae_out";
}

fs::path prepare_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  return path;
}

RunManifest::RunManifest(std::string command, const CLI::App& sub) : command_(std::move(command)) {
  config_ = nlohmann::json::object();
  for (const CLI::Option* opt : sub.get_options({})) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (name == "help" || name == "config") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      if (opt->get_type_size() == 0) {
        config_[name] = true;
      } else {
        config_[name] = r.size() == 1 ? nlohmann::json(r.front()) : nlohmann::json(r);
      }
    } else if (!opt->get_default_str().empty()) {
      config_[name] = opt->get_default_str();
    }
  }
}

void RunManifest::add_input(const fs::path& path) {
  inputs_.emplace_back(path.string(), sha256_file(path));
}

void RunManifest::add_output(const fs::path& path) {
  outputs_.emplace_back(path.string(), sha256_file(path));
}

void RunManifest::set_seed(const std::string& name, std::uint64_t value) { seeds_[name] = value; }

void RunManifest::note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }

nlohmann::json RunManifest::to_json() const {
  nlohmann::json j;
  j["tool"] = "csiae";
  j["tool_version"] = CSIAE_VERSION;
  j["generator_version"] = std::string(kGeneratorVersion);
  j["command"] = command_;
  j["config"] = config_;
  j["seeds"] = seeds_;
  auto files = [](const auto& v) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& [p, d] : v) a.push_back({{"path", p}, {"sha256", d}});
    return a;
  };
  j["inputs"] = files(inputs_);
  j["outputs"] = files(outputs_);
  if (!notes_.empty()) j["notes"] = notes_;
  return j;
}

fs::path RunManifest::write(const fs::path& path) const {
  std::ofstream out(prepare_output(path));
  if (!out) throw FormatError("cannot write manifest " + path.string());
  out << to_json().dump(2) << '\n';
  if (!out) throw FormatError("failed writing manifest " + path.string());
  return path;
}

fs::path manifest_path_for(const fs::path& artifact) {
  return fs::path(artifact.string() + ".manifest.json");
}

}  // namespace csiae::cli
