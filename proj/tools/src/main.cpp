#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config_json.hpp"
#include "dataset.hpp"


namespace csiae::cli {

LambdaSet case_lambdas(int c) {
  if (c == 4) return LambdaSet::uniform({4, 8, 16, 32});
  if (c == 32) return LambdaSet::range(1, 32);
  return LambdaSet::with_cardinality(c, 32);
}

LambdaSet lambda_set_from(const std::vector<std::string>& lambdas, const std::vector<std::string>& weights) {
  const auto l = parse_int_list(lambdas);
  if (weights.empty()) return LambdaSet::uniform(l);
  return LambdaSet::weighted(l, parse_double_list(weights));
}

}  // namespace csiae::cli

int main(int argc, char** argv) {
  CLI::App app{"csiae: universal autoencoder for MIMO CSI feedback"};
  app.set_version_flag("--version", std::string(CSIAE_VERSION));
  app.config_formatter(std::make_shared<csiae::cli::ConfigJson>());
  app.set_config("--config", "", "JSON config or run manifest; explicit flags take precedence");
  app.fallthrough();
  app.require_subcommand(1);

  csiae::cli::add_gen(app);
  csiae::cli::add_train(app);
  csiae::cli::add_eval(app);
  csiae::cli::add_bench(app);
  csiae::cli::add_compare(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
