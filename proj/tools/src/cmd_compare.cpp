#include <algorithm>
#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "dataset.hpp"
#include "manifest.hpp"

#include "csiae/errors.hpp"
#include "csiae/evalbench.hpp"
#include "csiae/training.hpp"

namespace csiae::cli {

namespace {

struct CompareOptions {
  std::string data;
  std::vector<std::string> cases{"4,32"};
  int epochs = 100;
  int substep_epochs = 50;
  int batch = 64;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  std::uint64_t split_seed = 1;
  bool no_fine_tune = false;
  int repeats = 200;
  bool emit_plot_data = false;
  std::vector<std::string> cardinalities{"1,2,4,8,16,32"};
  std::string out_dir;
};

template <class Fn>
fs::path write_file(const fs::path& path, Fn&& fn) {
  std::ofstream f(prepare_output(path));
  fn(f);
  if (!f) throw FormatError("failed writing " + path.string());
  return path;
}

void run_compare(const CompareOptions& o, const CLI::App& sub) {
  const Dataset all = load_dataset(o.data);
  const Dataset train_set = select_split(all, Split::train, o.split_seed);
  const Dataset test_set = select_split(all, Split::test, o.split_seed);
  const auto cases = parse_int_list(o.cases);
  if (cases.empty()) throw ConfigError("--cases is empty");
  const fs::path dir = o.out_dir.empty() ? default_out_dir() / "compare" : fs::path(o.out_dir);
  const int k = all.tensors.empty() ? all.category.rb_max : all.tensors.front().k;

  BenchOptions bopt;
  bopt.repeats = o.repeats;
  bopt.seed = o.seed;

  RunManifest m("compare", sub);
  m.set_seed("train", o.seed);
  m.set_seed("split", o.split_seed);
  m.add_input(o.data);

  std::vector<ScalingRow> table;
  std::vector<NmseResult> fig7;
  History fig10;
  const int fig_case = std::find(cases.begin(), cases.end(), 4) != cases.end() ? 4 : cases.front();

  for (int c : cases) {
    const LambdaSet ls = case_lambdas(c);
    std::vector<NmseResult> nmse_rows;
    for (Approach a : {Approach::naive, Approach::saldr, Approach::masked}) {
      BuildOptions bo;
      bo.seed = o.seed;
      AeBundle b = build_bundle(a, all.category, ls, bo);
      TrainConfig cfg;
      cfg.epochs_joint = o.epochs;
      cfg.epochs_per_substep = o.substep_epochs;
      cfg.batch_size = o.batch;
      cfg.learning_rate = o.lr;
      cfg.seed = o.seed;
      cfg.lambda_set = ls;
      cfg.fine_tune = a == Approach::masked && !o.no_fine_tune;
      std::cout << "case " << c << ": training " << to_string(a) << '\n';
      const History h = train(b, train_set.samples, cfg);
      const auto rows = evaluate(b, test_set.samples, ls);
      nmse_rows.insert(nmse_rows.end(), rows.begin(), rows.end());
      const BenchResult r = bench_latency(b, bopt);
      table.push_back({a, r.cardinality, r.param_count, r.worst_cr_latency_s, r.worst_cr_flops});
      if (c == fig_case) {
        fig7.insert(fig7.end(), rows.begin(), rows.end());
        if (a == Approach::masked) fig10 = h;
      }
    }
    m.add_output(write_file(dir / ("nmse_case" + std::to_string(c) + ".csv"),
                            [&](std::ostream& f) { write_nmse_csv(f, nmse_rows, k); }));
  }
  m.add_output(write_file(dir / "table3.csv", [&](std::ostream& f) { write_scaling_csv(f, table); }));

  if (o.emit_plot_data) {
    const Approach approaches[] = {Approach::naive, Approach::saldr, Approach::masked};
    std::vector<LambdaSet> sets;
    for (int c : parse_int_list(o.cardinalities)) sets.push_back(case_lambdas(c));
    const auto counts = scaling_experiment(approaches, sets, all.category);
    const auto timed = scaling_experiment(approaches, sets, all.category, &bopt);
    m.add_output(write_file(dir / "fig7.csv", [&](std::ostream& f) { write_nmse_csv(f, fig7, k); }));
    m.add_output(write_file(dir / "fig8.csv", [&](std::ostream& f) { write_scaling_csv(f, counts); }));
    m.add_output(write_file(dir / "fig9.csv", [&](std::ostream& f) { write_scaling_csv(f, timed); }));
    m.add_output(write_file(dir / "fig10.csv", [&](std::ostream& f) { write_history_csv(f, fig10); }));
  }
  m.note("train_samples", train_set.samples.size());
  m.note("test_samples", test_set.samples.size());
  m.write(dir / "compare.manifest.json");
  for (const auto& r : table) {
    std::cout << to_string(r.approach) << " |Lambda|=" << r.cardinality << ": params " << r.params
              << ", worst-CR latency " << r.latency_s * 1e3 << " ms\n";
  }
  std::cout << "wrote " << dir.string() << '\n';
}

}  // namespace

void add_compare(CLI::App& app) {
  auto o = std::make_shared<CompareOptions>();
  CLI::App* sub = app.add_subcommand("compare", "Train and compare all three approaches");
  sub->add_option("--data", o->data, "Dataset container")->required()->check(CLI::ExistingFile);
  sub->add_option("--cases", o->cases, "Cardinalities |Lambda| to compare")->delimiter(',')->capture_default_str();
  sub->add_option("--epochs", o->epochs, "Joint-training epochs")->capture_default_str();
  sub->add_option("--substep-epochs", o->substep_epochs, "Epochs per fine-tune sub-step")->capture_default_str();
  sub->add_option("--batch", o->batch, "Mini-batch size")->capture_default_str();
  sub->add_option("--lr", o->lr, "Adam learning rate")->capture_default_str();
  sub->add_option("--seed", o->seed, "Initialization and shuffle seed")->capture_default_str();
  sub->add_option("--split-seed", o->split_seed, "Seed of the 90/10 tensor split")->capture_default_str();
  sub->add_flag("--no-fine-tune", o->no_fine_tune, "Skip the masked fine-tune sub-steps");
  sub->add_option("--repeats", o->repeats, "Timed runs per CR")->capture_default_str();
  sub->add_flag("--emit-plot-data", o->emit_plot_data, "Also write fig7..fig10.csv");
  sub->add_option("--cardinalities", o->cardinalities, "Cardinalities for fig8/fig9")
      ->delimiter(',')
      ->capture_default_str();
  sub->add_option("--out-dir", o->out_dir, "Output directory (default $CSIAE_OUT_DIR/compare)");
  sub->callback([o, sub] { run_compare(*o, *sub); });
}

}  // namespace csiae::cli
