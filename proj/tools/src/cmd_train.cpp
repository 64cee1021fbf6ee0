#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "dataset.hpp"
#include "manifest.hpp"

#include "csiae/checkpoint.hpp"
#include "csiae/errors.hpp"
#include "csiae/training.hpp"

namespace csiae::cli {

namespace {

struct TrainOptions {
  std::string data;
  std::string approach = "masked";
  std::vector<std::string> lambdas{"4,8,16,32"};
  std::vector<std::string> weights;
  int epochs = 100;
  int substep_epochs = 50;
  int batch = 64;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  bool fine_tune = false;
  std::string split = "train";
  std::uint64_t split_seed = 1;
  int probe = 512;
  std::string out;
  std::string history;
};

void print_entry(const HistoryEntry& e) {
  std::cout << "  " << e.phase << " epoch " << e.epoch;
  if (e.target_lambda > 0) std::cout << " (lambda " << e.target_lambda << ")";
  std::cout << " total " << e.report.total << '\n';
}

void run_train(const TrainOptions& o, const CLI::App& sub) {
  const Approach approach = parse_approach(o.approach);
  const LambdaSet ls = lambda_set_from(o.lambdas, o.weights);
  if (o.fine_tune && approach != Approach::masked) {
    throw ConfigError("--fine-tune applies to the masked approach only");
  }
  const Dataset all = load_dataset(o.data);
  const Dataset d = select_split(all, parse_split(o.split), o.split_seed);

  BuildOptions bo;
  bo.seed = o.seed;
  AeBundle bundle = build_bundle(approach, d.category, ls, bo);

  TrainConfig cfg;
  cfg.epochs_joint = o.epochs;
  cfg.epochs_per_substep = o.substep_epochs;
  cfg.batch_size = o.batch;
  cfg.learning_rate = o.lr;
  cfg.seed = o.seed;
  cfg.lambda_set = ls;
  cfg.fine_tune = o.fine_tune;
  cfg.probe_size = o.probe;

  std::cout << "training " << to_string(approach) << " on " << d.samples.size()
            << " samples (category " << d.category.index << ", " << ls.size() << " latent sizes)\n";
  const History history = train(bundle, d.samples, cfg);
  print_entry(history.front());
  print_entry(history.back());

  const fs::path out = prepare_output(
      o.out.empty() ? default_out_dir() / (std::string(to_string(approach)) + ".csae") : fs::path(o.out));
  const fs::path hist = prepare_output(o.history.empty() ? fs::path(out.string() + ".history.csv")
                                                         : fs::path(o.history));

  RunManifest m("train", sub);
  m.set_seed("train", o.seed);
  m.set_seed("split", o.split_seed);
  m.add_input(o.data);
  m.note("train_samples", d.samples.size());
  nlohmann::json extra;
  extra["manifest"] = m.to_json();
  save_checkpoint(out, bundle, &cfg, history, extra.dump());
  {
    std::ofstream f(hist);
    write_history_csv(f, history);
    if (!f) throw FormatError("failed writing " + hist.string());
  }

  const LoadedCheckpoint back = load_checkpoint(out);
  if (back.bundle.encoder_param_count() != bundle.encoder_param_count() ||
      back.bundle.decoder_param_count() != bundle.decoder_param_count()) {
    throw FormatError("written checkpoint does not match the trained bundle");
  }
  m.add_output(out);
  m.add_output(hist);
  m.write(manifest_path_for(out));
  std::cout << "encoder params " << bundle.encoder_param_count() << ", decoder params "
            << bundle.decoder_param_count() << "\nwrote " << out.string() << '\n';
}

}  // namespace

void add_train(CLI::App& app) {
  auto o = std::make_shared<TrainOptions>();
  CLI::App* sub = app.add_subcommand("train", "Train an autoencoder bundle");
  sub->add_option("--data", o->data, "Dataset container")->required()->check(CLI::ExistingFile);
  sub->add_option("--approach", o->approach, "naive, saldr or masked")
      ->capture_default_str()
      ->check(CLI::IsMember({"naive", "saldr", "masked"}));
  sub->add_option("--lambdas", o->lambdas, "Latent sizes, ascending")->delimiter(',')->capture_default_str();
  sub->add_option("--weights", o->weights, "Loss weights (default uniform)")->delimiter(',');
  sub->add_option("--epochs", o->epochs, "Joint-training epochs")->capture_default_str();
  sub->add_option("--substep-epochs", o->substep_epochs, "Epochs per fine-tune sub-step")->capture_default_str();
  sub->add_option("--batch", o->batch, "Mini-batch size")->capture_default_str();
  sub->add_option("--lr", o->lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--seed", o->seed, "Initialization and shuffle seed")->capture_default_str();
  sub->add_flag("--fine-tune", o->fine_tune, "Run the freeze/fine-tune sub-steps after joint training");
  sub->add_option("--split", o->split, "train, test or all")->capture_default_str();
  sub->add_option("--split-seed", o->split_seed, "Seed of the 90/10 tensor split")->capture_default_str();
  sub->add_option("--probe", o->probe, "Samples used for the per-epoch loss history")->capture_default_str();
  sub->add_option("--out", o->out, "Checkpoint path (default $CSIAE_OUT_DIR/<approach>.csae)");
  sub->add_option("--history", o->history, "History CSV (default <out>.history.csv)");
  sub->callback([o, sub] { run_train(*o, *sub); });
}

}  // namespace csiae::cli
