#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace csiae::cli {

namespace fs = std::filesystem;

std::string sha256_file(const fs::path& path);

/// Default output directory: $CSIAE_OUT_DIR, else ./csiae_out.
fs::path default_out_dir();

/// Parent directories are created; returns `path` unchanged.
fs::path prepare_output(const fs::path& path);

/// Sidecar describing one command invocation: configuration, seeds, tool
/// version and digests of every input and output file.
class RunManifest {
 public:
  RunManifest(std::string command, const CLI::App& sub);

  void add_input(const fs::path& path);
  void add_output(const fs::path& path);
  void set_seed(const std::string& name, std::uint64_t value);
  void note(const std::string& key, nlohmann::json value);

  nlohmann::json to_json() const;
  /// Writes the manifest and returns its path.
  fs::path write(const fs::path& path) const;

 private:
  std::string command_;
  nlohmann::json config_;
  nlohmann::json seeds_ = nlohmann::json::object();
  nlohmann::json notes_ = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs_, outputs_;
};

/// "<path>.manifest.json"
fs::path manifest_path_for(const fs::path& artifact);

}  // namespace csiae::cli
