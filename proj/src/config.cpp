// SPDX-License-Identifier: Apache-2.0
#include "combeam/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace combeam {

const char* to_string(RunMode m) {
  switch (m) {
    case RunMode::Solve: return "solve";
    case RunMode::Sweep: return "sweep";
    case RunMode::OracleCheck: return "oracle-check";
  }
  return "unknown";
}

Real dbm_to_watts(Real dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
Real watts_to_dbm(Real watts) { return 10.0 * std::log10(watts) + 30.0; }
Real db_to_linear(Real db) { return std::pow(10.0, db / 10.0); }
Real linear_to_db(Real lin) { return 10.0 * std::log10(lin); }

Real mnats_per_s_to_nats_per_use(Real mnats_per_s, Real bandwidth_hz) {
  return mnats_per_s * 1e6 / bandwidth_hz;
}
Real nats_per_use_to_mnats_per_s(Real nats_per_use, Real bandwidth_hz) {
  return nats_per_use * bandwidth_hz / 1e6;
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

const std::set<std::string> kKnownKeys = {
    "mode",
    "num_bs",
    "antennas_per_bs",
    "num_users",
    "inter_site_distance_km",
    "power_dbm",
    "noise_dbm_per_hz",
    "bandwidth_mhz",
    "sinr_target_db",
    "shadowing_std_db",
    "backhaul_mnats_per_s",
    "backhaul_sweep_mnats_per_s",
    "seeds",
    "epsilon_rel",
    "epsilon_abs",
    "max_iter",
    "grid_delta",
    "out_dir",
    "threads",
    "scenario_path",
};

}  // namespace

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object())
    throw std::invalid_argument("config: top level must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!kKnownKeys.count(key))
      throw std::invalid_argument(
          "config: unknown key \"" + key +
          "\" (check the unit suffix against the documented schema)");
  }
  if (!j.contains("mode"))
    throw std::invalid_argument("config: required key \"mode\" is missing");

  ExperimentConfig cfg;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "solve")
    cfg.mode = RunMode::Solve;
  else if (mode == "sweep")
    cfg.mode = RunMode::Sweep;
  else if (mode == "oracle-check")
    cfg.mode = RunMode::OracleCheck;
  else
    throw std::invalid_argument("config: mode must be solve, sweep or oracle-check");

  SystemParams p;  // carries the reference defaults
  p.num_bs = j.value("num_bs", 3);
  p.antennas_per_bs = j.value("antennas_per_bs", 4);
  p.num_users = j.value("num_users", 6);
  p.inter_site_distance_km = j.value("inter_site_distance_km", 1.0);
  p.shadowing_std_db = j.value("shadowing_std_db", 8.0);
  p.power_budget_w = dbm_to_watts(j.value("power_dbm", 46.0));
  p.noise_density_w_per_hz = dbm_to_watts(j.value("noise_dbm_per_hz", -174.0));
  p.bandwidth_hz = j.value("bandwidth_mhz", 10.0) * 1e6;
  p.sinr_target = db_to_linear(j.value("sinr_target_db", 0.0));
  p.backhaul_cap = mnats_per_s_to_nats_per_use(
      j.value("backhaul_mnats_per_s", 200.0), p.bandwidth_hz);
  p.validate();
  cfg.params = p;

  if (j.contains("seeds")) {
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (cfg.seeds.empty())
      throw std::invalid_argument("config: seeds must be non-empty when given");
  } else if (cfg.mode == RunMode::Sweep) {
    for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
  } else {
    cfg.seeds = {1};
  }

  std::vector<Real> sweep_mnats =
      j.value("backhaul_sweep_mnats_per_s",
              std::vector<Real>{100, 150, 200, 250, 300, 350, 400});
  for (Real c : sweep_mnats)
    cfg.sweep_backhaul.push_back(mnats_per_s_to_nats_per_use(c, p.bandwidth_hz));

  cfg.epsilon_rel = j.value("epsilon_rel", 1e-3);
  cfg.epsilon_abs = j.value("epsilon_abs", 1e-4);
  cfg.max_iter = j.value("max_iter", 100000LL);
  cfg.grid_delta = j.value("grid_delta", 0.05);
  cfg.out_dir = j.value("out_dir", std::string("out"));
  cfg.threads = j.value("threads", 0);
  cfg.scenario_path = j.value("scenario_path", std::string());
  if (cfg.epsilon_rel < 0 || cfg.epsilon_abs < 0)
    throw std::invalid_argument("config: tolerances must be >= 0");
  if (cfg.max_iter < 1) throw std::invalid_argument("config: max_iter must be >= 1");
  if (!(cfg.grid_delta > 0))
    throw std::invalid_argument("config: grid_delta must be > 0");
  if (cfg.threads < 0) throw std::invalid_argument("config: threads must be >= 0");

  char hex[32];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(fnv1a(j.dump())));
  cfg.config_hash = hex;
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("config: cannot open \"" + path + "\"");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: invalid JSON in \"" + path + "\": " + e.what());
  }
  return config_from_json(j);
}

}  // namespace combeam
