// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "combeam/scenario.hpp"
#include "json.hpp"

namespace combeam {

enum class RunMode { Solve, Sweep, OracleCheck };
const char* to_string(RunMode m);

// Unit conversions, applied exactly once at config load.
Real dbm_to_watts(Real dbm);
Real watts_to_dbm(Real watts);
Real db_to_linear(Real db);
Real linear_to_db(Real lin);
Real mnats_per_s_to_nats_per_use(Real mnats_per_s, Real bandwidth_hz);
Real nats_per_use_to_mnats_per_s(Real nats_per_use, Real bandwidth_hz);

struct ExperimentConfig {
  RunMode mode = RunMode::Solve;
  SystemParams params;  // internal units (watts, nats/use, linear SINR)
  std::vector<std::uint64_t> seeds;
  Real epsilon_rel = 1e-3;
  Real epsilon_abs = 1e-4;
  long long max_iter = 100000;
  Real grid_delta = 0.05;
  std::string out_dir = "out";
  std::vector<Real> sweep_backhaul;  // nats/use
  int threads = 0;                   // 0 = serial, bit-reproducible
  std::string scenario_path;         // optional: load instead of generating
  std::string config_hash;           // FNV-1a of the canonical config dump
};

// Strict parse: unknown keys are errors, units live in the key names,
// defaults follow the reference experiment set-up (B=3, M=4, K=6, d=1 km,
// 46 dBm, -174 dBm/Hz, 10 MHz, 0 dB target, 8 dB shadowing, 200 Mnats/s).
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

}  // namespace combeam
