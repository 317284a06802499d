// SPDX-License-Identifier: Apache-2.0
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "combeam/experiments.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> threads;
  std::optional<double> epsilon_rel;
  std::optional<long long> max_iter;
};

void add_common(CLI::App* cmd, CliOverrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON config file");
  cmd->add_option("--seed", ov.seed, "override the configured seed list with one seed");
  cmd->add_option("--out", ov.out_dir, "output directory");
  cmd->add_option("--threads", ov.threads,
                  "worker threads for sweep cells (0 = serial, reproducible)");
  cmd->add_option("--epsilon-rel", ov.epsilon_rel, "relative gap tolerance");
  cmd->add_option("--max-iter", ov.max_iter, "iteration cap");
}

combeam::ExperimentConfig make_config(const CliOverrides& ov, combeam::RunMode mode) {
  nlohmann::json j;
  if (!ov.config_path.empty()) {
    std::ifstream in(ov.config_path);
    if (!in)
      throw std::invalid_argument("cannot open config \"" + ov.config_path + "\"");
    in >> j;
  } else {
    j = nlohmann::json::object();
  }
  const char* mode_name = combeam::to_string(mode);
  if (j.contains("mode") && j.at("mode").get<std::string>() != mode_name)
    throw std::invalid_argument("config mode disagrees with the subcommand");
  j["mode"] = mode_name;
  auto cfg = combeam::config_from_json(j);
  if (ov.seed) cfg.seeds = {*ov.seed};
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.threads) cfg.threads = *ov.threads;
  if (ov.epsilon_rel) cfg.epsilon_rel = *ov.epsilon_rel;
  if (ov.max_iter) cfg.max_iter = *ov.max_iter;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Globally optimal joint beamforming and BS-user link selection "
               "under per-BS backhaul, power and per-user SINR constraints"};
  app.require_subcommand(1);

  CliOverrides ov;
  auto* solve = app.add_subcommand("solve", "single optimal solve with trace");
  auto* sweep = app.add_subcommand("sweep", "sum rate versus backhaul capacity");
  auto* check = app.add_subcommand("oracle-check", "brute-force cross-check");
  add_common(solve, ov);
  add_common(sweep, ov);
  add_common(check, ov);

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed())
      return combeam::run_solve(make_config(ov, combeam::RunMode::Solve));
    if (sweep->parsed())
      return combeam::run_sweep(make_config(ov, combeam::RunMode::Sweep));
    if (check->parsed())
      return combeam::run_oracle_check(make_config(ov, combeam::RunMode::OracleCheck));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return combeam::kExitError;
  }
  return combeam::kExitError;
}
