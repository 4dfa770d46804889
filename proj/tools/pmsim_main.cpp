// Copyright 2026 The pmsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmsim/errors.hpp"
#include "pmsim/harness.hpp"

namespace {

// Exit codes: 0 success, 2 invalid config or usage, 3 numerical guard abort,
// 4 I/O failure, 1 unexpected error.
constexpr int kOk = 0;
constexpr int kUnexpected = 1;
constexpr int kBadConfig = 2;
constexpr int kNumericalAbort = 3;
constexpr int kIoFailure = 4;

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t comma = list.find(',', start);
    std::string token = list.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      throw pmsim::ConfigError("sweep: --values entry '" + token + "' is not a number");
    }
    if (used != token.size())
      throw pmsim::ConfigError("sweep: --values entry '" + token + "' is not a number");
    values.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.empty()) throw pmsim::ConfigError("sweep: --values is empty");
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pmsim: protective quantum measurement simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int threads = 0;
  bool plot = false;
  std::string param;
  std::string values_list;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "JSON experiment config file")->required();
    sub->add_option("--seed", seed, "override the config seed");
    sub->add_option("--out", out_path, "write the CSV here instead of stdout");
    sub->add_option("--threads", threads, "override the config thread count");
    sub->add_flag("--plot", plot, "also write a gnuplot script next to --out");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "execute the experiment the config declares");
  add_common(cmd_run);
  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "quantum versus model across a parameter sweep");
  add_common(cmd_sweep);
  cmd_sweep->add_option("--param", param, "swept parameter: N, T, or var_x0")->required();
  cmd_sweep->add_option("--values", values_list, "comma-separated parameter values")
      ->required();
  CLI::App* cmd_fitk =
      app.add_subcommand("fit-k", "fit the pointer variance constants k1, k2");
  add_common(cmd_fitk);
  CLI::App* cmd_compare =
      app.add_subcommand("compare", "one-point quantum versus model comparison");
  add_common(cmd_compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kBadConfig;
  }

  try {
    pmsim::ExperimentConfig config = pmsim::load_config(config_path);
    CLI::App* active = app.get_subcommands().front();
    if (active->count("--seed") > 0) config.seed = seed;
    if (active->count("--threads") > 0) {
      if (threads < 1 || threads > 256)
        throw pmsim::ConfigError("config: field 'threads' must be between 1 and 256");
      config.threads = threads;
    }
    if (active->count("--out") > 0) config.out = out_path;
    if (plot && config.out.empty())
      throw pmsim::ConfigError("--plot needs --out (or an 'out' config field)");

    pmsim::RunResult result;
    if (active == cmd_sweep) {
      result = pmsim::run_sweep(config, param, parse_values(values_list));
    } else {
      if (active == cmd_fitk) config.kind = pmsim::ExperimentKind::kFitK;
      if (active == cmd_compare) config.kind = pmsim::ExperimentKind::kCompare;
      result = pmsim::run_experiment(config);
    }

    if (config.out.empty()) {
      std::fputs(result.csv.c_str(), stdout);
    } else {
      pmsim::write_text(config.out, result.csv);
      if (plot)
        pmsim::write_text(config.out + ".gp", pmsim::plot_script(config, config.out));
    }
    return kOk;
  } catch (const pmsim::ConfigError& e) {
    std::fprintf(stderr, "pmsim: %s\n", e.what());
    return kBadConfig;
  } catch (const pmsim::IoError& e) {
    std::fprintf(stderr, "pmsim: %s\n", e.what());
    return kIoFailure;
  } catch (const pmsim::NumericalError& e) {
    std::fprintf(stderr, "pmsim: numerical guard: %s\n", e.what());
    return kNumericalAbort;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pmsim: unexpected error: %s\n", e.what());
    return kUnexpected;
  }
}
