#include <fstream>
#include <iostream>
#include <set>

#include "commands.hpp"
#include "dataset.hpp"
#include "manifest.hpp"

#include "csiae/channelgen.hpp"
#include "csiae/container.hpp"
#include "csiae/errors.hpp"

namespace csiae::cli {

namespace {

struct GenOptions {
  std::vector<std::string> profiles{"epa"};
  std::vector<std::string> profile_files;
  std::vector<std::string> ks{"128"};
  int n_bs = 32;
  int n_ue = 4;
  std::vector<std::string> snrs{"20"};
  int samples = 64;
  std::uint64_t seed = 1;
  double delta_f = 15e3;
  std::string domain = "frequency";
  std::string out;
};

void run_gen(const GenOptions& o, const CLI::App& sub) {
  std::vector<ChannelProfile> profiles;
  for (const auto& f : o.profile_files) profiles.push_back(load_profile(f));
  if (o.profile_files.empty() || sub.count("--profile") > 0) {
    for (const auto& name : o.profiles) profiles.push_back(profile_by_name(name));
  }
  const auto ks = parse_int_list(o.ks);
  const auto snrs = parse_double_list(o.snrs);
  if (o.domain != "frequency" && o.domain != "delay") {
    throw ConfigError("--domain must be 'frequency' or 'delay'");
  }

  std::vector<GenSetting> settings;
  for (const auto& p : profiles) {
    for (double snr : snrs) {
      for (int k : ks) {
        GenSetting s;
        s.profile = p;
        s.snr_db = snr;
        s.k = k;
        s.n_bs = o.n_bs;
        s.n_ue = o.n_ue;
        s.samples = o.samples;
        s.subcarrier_spacing_hz = o.delta_f;
        s.seed = derive_seed(o.seed, settings.size());
        s.validate();
        settings.push_back(std::move(s));
      }
    }
  }
  if (settings.empty()) throw ConfigError("empty generation grid");

  std::set<int> categories;
  for (int k : ks) categories.insert(categorize(k).index);
  if (o.domain == "frequency" && std::set<int>(ks.begin(), ks.end()).size() > 1) {
    throw ConfigError("a frequency-domain container holds one K; use --domain delay for a K grid");
  }
  if (categories.size() > 1) throw ConfigError("all K values must fall into one input category");

  Container c;
  std::size_t expected = 0;
  if (o.domain == "frequency") {
    std::vector<CsiTensor> all;
    for (const auto& s : settings) {
      for (auto& t : generate_csi(s)) all.push_back(std::move(t));
    }
    expected = all.size();
    c = tensors_to_container(all);
  } else {
    std::vector<DelaySample> all;
    std::uint64_t id = 0;
    for (const auto& s : settings) {
      for (const auto& t : generate_csi(s)) {
        for (auto& d : to_delay_samples(t, id++, false)) all.push_back(std::move(d));
      }
    }
    expected = all.size();
    c = delay_to_container(all);
  }

  const fs::path out = prepare_output(o.out.empty() ? default_out_dir() / "data.csit" : fs::path(o.out));
  write_container(out, c);
  const fs::path sidecar = out.string() + ".json";
  {
    std::ofstream f(sidecar);
    f << dataset_manifest_json(settings, o.domain, c) << '\n';
    if (!f) throw FormatError("failed writing " + sidecar.string());
  }

  const Container back = read_container(out);
  if (back.dims != c.dims || back.dims.front() != expected) {
    throw FormatError("written container does not match the generated data");
  }
  if (read_manifest_settings(sidecar).size() != settings.size()) {
    throw FormatError("written dataset manifest is incomplete");
  }

  RunManifest m("gen", sub);
  m.set_seed("base", o.seed);
  for (std::size_t i = 0; i < settings.size(); ++i) m.set_seed("setting_" + std::to_string(i), settings[i].seed);
  for (const auto& f : o.profile_files) m.add_input(f);
  m.add_output(out);
  m.add_output(sidecar);
  m.write(manifest_path_for(out));
  std::cout << "wrote " << expected << (o.domain == "frequency" ? " tensors" : " delay samples")
            << " to " << out.string() << '\n';
}

}  // namespace

void add_gen(CLI::App& app) {
  auto o = std::make_shared<GenOptions>();
  CLI::App* sub = app.add_subcommand("gen", "Generate a synthetic CSI dataset");
  sub->add_option("--profile", o->profiles, "Built-in channel profile(s): EPA, EVA, TDL-30/100/300")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--profile-file", o->profile_files, "JSON tap-table profile(s)")->check(CLI::ExistingFile);
  sub->add_option("--k", o->ks, "Resource blocks (list or first:last[:step])")->delimiter(',')->capture_default_str();
  sub->add_option("--nbs", o->n_bs, "BS antennas")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--nue", o->n_ue, "UE antennas")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--snr", o->snrs, "SNR in dB (list or first:last[:step], 'inf' for noiseless)")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--samples", o->samples, "Tensors per setting")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_option("--seed", o->seed, "Base seed")->capture_default_str();
  sub->add_option("--delta-f", o->delta_f, "Subcarrier spacing in Hz")->capture_default_str();
  sub->add_option("--domain", o->domain, "frequency: [n,2,K,NBS,NUE]; delay: [n,2N] slices")
      ->capture_default_str()
      ->check(CLI::IsMember({"frequency", "delay"}));
  sub->add_option("--out", o->out, "Output container (default $CSIAE_OUT_DIR/data.csit)");
  sub->callback([o, sub] { run_gen(*o, *sub); });
}

}  // namespace csiae::cli
