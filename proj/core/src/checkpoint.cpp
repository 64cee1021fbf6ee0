#include "csiae/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "csiae/errors.hpp"

namespace csiae {

using detail::get_le;
using detail::put_le;

namespace {

enum class Role : std::uint8_t { encoder = 0, fcb = 1, decoder = 2 };

struct Entry {
  Role role;
  std::uint32_t index;
  const ModelParams* model;
};

std::vector<Entry> entries(const AeBundle& b) {
  std::vector<Entry> out;
  for (std::size_t i = 0; i < b.encoders.size(); ++i) out.push_back({Role::encoder, static_cast<std::uint32_t>(i), &b.encoders[i]});
  for (std::size_t i = 0; i < b.fcb_chain.size(); ++i) out.push_back({Role::fcb, static_cast<std::uint32_t>(i), &b.fcb_chain[i]});
  for (std::size_t i = 0; i < b.decoders.size(); ++i) out.push_back({Role::decoder, static_cast<std::uint32_t>(i), &b.decoders[i]});
  return out;
}

nlohmann::json history_json(const History& h) {
  auto arr = nlohmann::json::array();
  for (const auto& e : h) {
    arr.push_back({{"epoch", e.epoch},
                   {"phase", e.phase},
                   {"target_lambda", e.target_lambda},
                   {"lambdas", e.report.lambdas},
                   {"D", e.report.per_lambda},
                   {"total", e.report.total}});
  }
  return arr;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const AeBundle& bundle,
                     const TrainConfig* cfg, const History& history, std::string_view extra_json) {
  bundle.validate();
  nlohmann::json meta;
  meta["approach"] = std::string(to_string(bundle.approach));
  meta["category"] = {{"index", bundle.category.index},
                      {"ifft_size", bundle.category.ifft_size},
                      {"rb_min", bundle.category.rb_min},
                      {"rb_max", bundle.category.rb_max}};
  meta["lambdas"] = bundle.lambda_set.lambdas;
  meta["weights"] = bundle.lambda_set.weights;
  meta["encoder_params"] = bundle.encoder_param_count();
  meta["decoder_params"] = bundle.decoder_param_count();
  auto& arch = meta["architecture"] = nlohmann::json::array();
  for (const auto& e : entries(bundle)) {
    auto layers = nlohmann::json::array();
    for (const auto& l : e.model->layers) {
      layers.push_back({l.in_size(), l.out_size(), std::string(to_string(l.activation))});
    }
    static constexpr const char* kRoles[] = {"encoder", "fcb", "decoder"};
    arch.push_back({{"role", kRoles[static_cast<int>(e.role)]}, {"index", e.index}, {"layers", layers}});
  }
  if (cfg) {
    meta["seeds"] = {{"train", cfg->seed}};
    meta["train_config"] = {{"epochs_joint", cfg->epochs_joint},
                            {"epochs_per_substep", cfg->epochs_per_substep},
                            {"batch_size", cfg->batch_size},
                            {"learning_rate", cfg->learning_rate},
                            {"fine_tune", cfg->fine_tune},
                            {"probe_size", cfg->probe_size},
                            {"loss_weights", cfg->lambda_set.weights}};
  }
  meta["history"] = history_json(history);
  try {
    meta["extra"] = nlohmann::json::parse(extra_json);
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("save_checkpoint: extra metadata is not JSON: ") + e.what());
  }
  if (!meta["extra"].is_object()) throw ArgumentError("save_checkpoint: extra metadata must be an object");
  const std::string text = meta.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write("CSAE", 4);
  put_le<std::uint16_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto table = entries(bundle);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(table.size()));
  for (const auto& e : table) {
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(e.role));
    put_le<std::uint32_t>(out, e.index);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.model->layers.size()));
    for (const auto& l : e.model->layers) {
      put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_size()));
      put_le<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_size()));
      put_le<std::uint8_t>(out, static_cast<std::uint8_t>(l.activation));
    }
  }
  for (const auto& e : table) {
    for (const auto& l : e.model->layers) {
      for (int r = 0; r < l.out_size(); ++r) {
        for (int c = 0; c < l.in_size(); ++c) detail::put_f64(out, l.weights(r, c));
      }
      for (int r = 0; r < l.out_size(); ++r) detail::put_f64(out, l.biases(r));
    }
  }
  if (!out) throw FormatError("failed writing " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path.string());
  detail::expect_magic(in, "CSAE", path.string());
  const auto version = get_le<std::uint16_t>(in);
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto meta_len = get_le<std::uint32_t>(in);
  std::string text(meta_len, '\0');
  if (!in.read(text.data(), meta_len)) throw FormatError(path.string() + ": truncated metadata");

  LoadedCheckpoint out;
  out.metadata_json = text;
  AeBundle& b = out.bundle;
  try {
    const auto meta = nlohmann::json::parse(text);
    b.approach = parse_approach(meta.at("approach").get<std::string>());
    b.category = category_by_index(meta.at("category").at("index").get<int>());
    b.lambda_set = LambdaSet::weighted(meta.at("lambdas").get<std::vector<int>>(),
                                       meta.at("weights").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": malformed metadata: " + e.what());
  }

  struct Shape {
    Role role;
    std::uint32_t index;
    std::vector<std::tuple<int, int, Activation>> layers;
  };
  std::vector<Shape> shapes(get_le<std::uint32_t>(in));
  for (auto& s : shapes) {
    const auto role = get_le<std::uint8_t>(in);
    if (role > 2) throw FormatError(path.string() + ": unknown model role");
    s.role = static_cast<Role>(role);
    s.index = get_le<std::uint32_t>(in);
    const auto n = get_le<std::uint32_t>(in);
    for (std::uint32_t i = 0; i < n; ++i) {
      const int rows_in = static_cast<int>(get_le<std::uint32_t>(in));
      const int rows_out = static_cast<int>(get_le<std::uint32_t>(in));
      const auto act = get_le<std::uint8_t>(in);
      if (act > 2) throw FormatError(path.string() + ": unknown activation code");
      s.layers.emplace_back(rows_in, rows_out, static_cast<Activation>(act));
    }
  }
  for (const auto& s : shapes) {
    ModelParams m;
    for (const auto& [ni, no, act] : s.layers) {
      DenseLayer l(ni, no, act);
      for (int r = 0; r < no; ++r) {
        for (int c = 0; c < ni; ++c) l.weights(r, c) = detail::get_f64(in);
      }
      for (int r = 0; r < no; ++r) l.biases(r) = detail::get_f64(in);
      m.layers.push_back(std::move(l));
    }
    auto& dest = s.role == Role::encoder ? b.encoders : s.role == Role::fcb ? b.fcb_chain : b.decoders;
    if (s.index != dest.size()) throw FormatError(path.string() + ": models out of order");
    dest.push_back(std::move(m));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
  try {
    b.validate();
  } catch (const ConfigError& e) {
    throw FormatError(path.string() + ": inconsistent bundle: " + e.what());
  }
  return out;
}

}  // namespace csiae
