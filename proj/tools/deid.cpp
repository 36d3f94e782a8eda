// Copyright 2026 The Deid Authors
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


// deid: validate inputs, search policies, select weekly policies and
// evaluate release sequences. See README.md for the run config format.

#include <CLI11.hpp>

#include <iostream>

#include "deid/cli.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string counties;
  std::optional<int> k;
  std::optional<double> threshold;
  std::optional<int> lag;
  std::optional<std::string> schedule;
  std::optional<int> replicates;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
  std::optional<std::string> decisions;
  std::optional<std::string> tables;
  bool verify = false;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "Run config (JSON)")->required();
  cmd->add_option("--counties", o.counties, "Comma-separated county fips filter");
  cmd->add_option("--k", o.k, "Group size threshold k");
  cmd->add_option("--threshold", o.threshold, "Maximum acceptable PK risk");
  cmd->add_option("--lag", o.lag, "Lagging period in days (daily schedule)");
  cmd->add_option("--schedule", o.schedule, "Release schedule")->check(CLI::IsMember({"daily", "weekly"}));
  cmd->add_option("--replicates", o.replicates, "Monte Carlo replicates");
  cmd->add_option("--seed", o.seed, "Top-level random seed");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores); does not change results");
}

deid::cli::RunConfig resolve(const Overrides& o) {
  auto cfg = deid::cli::load_run_config(o.config);
  if (!o.counties.empty()) cfg.counties = deid::cli::split_list(o.counties);
  if (o.k) cfg.params.k = *o.k;
  if (o.threshold) cfg.params.threshold = *o.threshold;
  if (o.lag) cfg.params.lagging_days = *o.lag;
  if (o.schedule) cfg.params.schedule = deid::parse_schedule(*o.schedule);
  if (o.replicates) cfg.params.n_replicates = *o.replicates;
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.out = *o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.decisions) cfg.decisions = *o.decisions;
  if (o.tables) cfg.tables = *o.tables;
  if (o.verify) cfg.verify = true;
  cfg.params.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Re-identification risk forecasting and release policy selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(deid::cli::kVersion));

  Overrides o;
  std::string source = "forecast";
  std::string policy = "dynamic";

  auto* validate = app.add_subcommand("validate", "Check every input file named in the config");
  add_common(validate, o);

  auto* search = app.add_subcommand("search", "Minimal case volume per policy for each county");
  add_common(search, o);
  search->add_flag("--verify", o.verify, "Retest met policies at larger volumes and count frontier violations");

  auto* select = app.add_subcommand("select", "Weekly policy decisions from forecasts or actual counts");
  add_common(select, o);
  select->add_option("--source", source, "Case volumes to select from")->check(CLI::IsMember({"forecast", "actual"}));
  select->add_option("--tables", o.tables, "Search table directory");

  auto* evaluate = app.add_subcommand("evaluate", "PK risk of the released sequence on actual counts");
  add_common(evaluate, o);
  evaluate->add_option("--policy", policy, "dynamic, k-anon, a policy code, or a comma-separated list");
  evaluate->add_option("--source", source, "Decision source for dynamic evaluation")
      ->check(CLI::IsMember({"forecast", "actual"}));
  evaluate->add_option("--decisions", o.decisions, "Decisions CSV (defaults to the select output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : deid::cli::kExitValidation;
  }

  try {
    auto cfg = resolve(o);
    if (*validate) return deid::cli::cmd_validate(cfg, std::cout, std::cerr);
    if (*search) return deid::cli::cmd_search(cfg, std::cout, std::cerr);
    if (*select) return deid::cli::cmd_select(cfg, deid::parse_source(source), std::cout, std::cerr);
    return deid::cli::cmd_evaluate(cfg, deid::cli::split_list(policy), deid::parse_source(source), std::cout,
                                   std::cerr);
  } catch (const deid::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return deid::cli::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return deid::cli::kExitRuntime;
  }
}
