#include <fstream>
#include <iostream>

#include "commands.hpp"
#include "dataset.hpp"
#include "manifest.hpp"
#include "npy.hpp"

#include "csiae/checkpoint.hpp"
#include "csiae/errors.hpp"
#include "csiae/evalbench.hpp"
#include "csiae/training.hpp"

namespace csiae::cli {

namespace {

struct EvalOptions {
  std::string checkpoint;
  std::string data;
  std::string split = "test";
  std::uint64_t split_seed = 1;
  std::string out;
  std::string tensor_out;
  std::string dump;
};

void write_csv(const fs::path& path, const std::vector<NmseResult>& rows, int k) {
  std::ofstream f(prepare_output(path));
  write_nmse_csv(f, rows, k);
  if (!f) throw FormatError("failed writing " + path.string());
}

void check_csv(const fs::path& path, std::size_t rows) {
  std::ifstream f(path);
  std::string line;
  std::size_t n = 0;
  while (std::getline(f, line)) ++n;
  if (n != rows + 1) throw FormatError(path.string() + " has an unexpected row count");
}

void run_eval(const EvalOptions& o, const CLI::App& sub) {
  const LoadedCheckpoint ck = load_checkpoint(o.checkpoint);
  const AeBundle& b = ck.bundle;
  const Dataset all = load_dataset(o.data);
  const Dataset d = select_split(all, parse_split(o.split), o.split_seed);
  if (!(d.category == b.category)) {
    throw UsageError("dataset category " + std::to_string(d.category.index) +
                     " does not match the checkpoint's category " + std::to_string(b.category.index));
  }
  const LambdaSet& ls = b.lambda_set;
  const auto rows = evaluate(b, d.samples, ls);
  // Per-slice CR uses the largest K of the category.
  const int k = d.tensors.empty() ? b.category.rb_max : d.tensors.front().k;

  const fs::path out = o.out.empty() ? default_out_dir() / "nmse.csv" : fs::path(o.out);
  write_csv(out, rows, k);
  check_csv(out, rows.size());

  RunManifest m("eval", sub);
  m.set_seed("split", o.split_seed);
  m.add_input(o.checkpoint);
  m.add_input(o.data);
  m.note("samples", d.samples.size());
  m.add_output(out);

  for (const auto& r : rows) {
    std::cout << to_string(r.approach) << " lambda " << r.lambda << ": " << r.nmse_db << " dB ("
              << r.sample_count << " samples)\n";
  }

  if (!d.tensors.empty()) {
    const auto trows = evaluate_tensors(b, d.tensors, ls);
    const fs::path tout = o.tensor_out.empty() ? fs::path(fs::path(out).replace_extension("").string() + "_tensor.csv")
                                               : fs::path(o.tensor_out);
    write_csv(tout, trows, k);
    check_csv(tout, trows.size());
    m.add_output(tout);
  }

  if (!o.dump.empty()) {
    // [lambda, sample, {h, h_hat}, 2N] in the denormalized delay domain.
    const std::size_t n = d.samples.size();
    const auto len = static_cast<std::size_t>(b.category.input_size());
    std::vector<double> values;
    values.reserve(ls.size() * n * 2 * len);
    const Matrix x = pack_samples(d.samples);
    for (int lambda : ls.lambdas) {
      const Matrix y = reconstruct_batch(b, x, lambda);
      for (std::size_t i = 0; i < n; ++i) {
        const double s = d.samples[i].scale;
        const auto col = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < len; ++j) values.push_back(x(static_cast<Eigen::Index>(j), col) * s);
        for (std::size_t j = 0; j < len; ++j) values.push_back(y(static_cast<Eigen::Index>(j), col) * s);
      }
    }
    const std::uint64_t shape[] = {ls.size(), n, 2, len};
    const fs::path dump = prepare_output(o.dump);
    write_npy(dump, shape, values);
    m.add_output(dump);
    m.note("dump_layout", "[lambda, sample, {h, h_hat}, 2N], lambdas in checkpoint order");
    m.note("lambdas", ls.lambdas);
  }
  m.write(manifest_path_for(out));
}

}  // namespace

void add_eval(CLI::App& app) {
  auto o = std::make_shared<EvalOptions>();
  CLI::App* sub = app.add_subcommand("eval", "Evaluate NMSE of a checkpoint on a dataset");
  sub->add_option("--checkpoint", o->checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  sub->add_option("--data", o->data, "Dataset container")->required()->check(CLI::ExistingFile);
  sub->add_option("--split", o->split, "train, test or all")->capture_default_str();
  sub->add_option("--split-seed", o->split_seed, "Seed of the 90/10 tensor split")->capture_default_str();
  sub->add_option("--out", o->out, "Per-slice NMSE CSV (default $CSIAE_OUT_DIR/nmse.csv)");
  sub->add_option("--tensor-out", o->tensor_out, "Full-tensor NMSE CSV (frequency data only)");
  sub->add_option("--dump", o->dump, "Write raw h / h_hat as a float64 .npy array");
  sub->callback([o, sub] { run_eval(*o, *sub); });
}

}  // namespace csiae::cli
