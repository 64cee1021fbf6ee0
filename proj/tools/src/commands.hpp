#pragma once

#include <CLI11.hpp>

#include "csiae/models.hpp"

namespace csiae::cli {

void add_gen(CLI::App& app);
void add_train(CLI::App& app);
void add_eval(CLI::App& app);
void add_bench(CLI::App& app);
void add_compare(CLI::App& app);

/// Lambda set for a Table-3 case: 4 -> {4,8,16,32}, 32 -> {1..32}, otherwise
/// `c` evenly spaced sizes up to 32.
LambdaSet case_lambdas(int c);

/// --lambdas/--weights into a LambdaSet (uniform when no weights are given).
LambdaSet lambda_set_from(const std::vector<std::string>& lambdas,
                          const std::vector<std::string>& weights);

}  // namespace csiae::cli
