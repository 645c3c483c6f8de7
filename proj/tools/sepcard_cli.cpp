// Copyright 2026 The sepcard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// sepcard: reproduces the cardinality claims as JSON reports.
//
//   sepcard werner --n 3 [--f 0.2] [--tol 1e-9]
//   sepcard pentagon [--seed 0] [--budget 100000]
//   sepcard tensor-power --n 2 --copies 3 [--budget 1024]
//   sepcard decompose --state pentagon --k 10 [--seed 0] [--budget 64] [--tol 1e-6]
//
// The report goes to stdout (and to --out when given); a summary table goes
// to stderr unless --quiet. Exit status is 0 iff every check passed.

#include "sepcard/runners.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <thread>

int main(int argc, char** argv) {
  CLI::App app{"Optimal-ensemble cardinality bounds for marginally separable states"};
  app.require_subcommand(1);

  bool quiet = false;
  std::string out_path;
  std::uint64_t seed = 0;
  std::optional<std::int64_t> budget;
  std::optional<double> tol;
  long n = 2;
  std::optional<double> f;
  std::optional<int> k;
  std::optional<int> copies;
  std::string state;

  auto common = [&](CLI::App* sub) {
    sub->add_flag("--quiet", quiet, "Suppress the stderr summary table");
    sub->add_option("--out", out_path, "Also write the JSON report to this path");
    sub->add_option("--seed", seed, "Master RNG seed")->capture_default_str();
    sub->add_option("--budget", budget, "Search/restart/size budget (subcommand specific)");
    sub->add_option("--tol", tol, "Tolerance override (subcommand specific)");
  };

  auto* werner = app.add_subcommand("werner", "Werner family PPT boundary, ranks and brackets");
  common(werner);
  werner->add_option("--n", n, "Local dimension (2..8)")->required();
  werner->add_option("--f", f, "Mixing weight; defaults to the located PPT boundary");

  auto* pentagon = app.add_subcommand("pentagon", "Pentagon product set on 3x4 and its completion");
  common(pentagon);

  auto* tpow = app.add_subcommand("tensor-power", "Rank and lower-bound table over tensor copies");
  common(tpow);
  tpow->add_option("--n", n, "Local dimension (2..8)")->required();
  tpow->add_option("--copies", copies, "Number of copies");
  tpow->add_option("--k", k, "Alias for --copies");

  auto* decompose = app.add_subcommand("decompose", "Search for a separable decomposition");
  common(decompose);
  decompose->add_option("--state", state, "werner:n:f | pentagon | tensor:n:k")->required();
  decompose->add_option("--k", k, "Decomposition cardinality")->required();

  CLI11_PARSE(app, argc, argv);

  sepcard::RunOptions opt;
  opt.seed = seed;
  opt.budget = budget;
  opt.tol = tol;
  opt.threads = std::max(1u, std::thread::hardware_concurrency());

  sepcard::Report report;
  try {
    if (*werner) {
      report = sepcard::run_werner(n, f, opt);
    } else if (*pentagon) {
      report = sepcard::run_pentagon(opt);
    } else if (*tpow) {
      const int c = copies.value_or(k.value_or(1));
      report = sepcard::run_tensor_power(n, c, opt);
    } else {
      report = sepcard::run_decompose(state, *k, opt);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const std::string text = sepcard::serialize(report);
  std::cout << text;
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    if (!os) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 2;
    }
    os << text;
  }
  if (!quiet) sepcard::print_table(std::cerr, report);
  return report.all_passed() ? 0 : 1;
}
