// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "combeam/config.hpp"
#include "combeam/dbrb.hpp"

namespace combeam {

// Exit codes shared by the CLI: 0 success, 1 other error, 2 infeasible,
// 3 iteration limit, 4 oracle divergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitIterationLimit = 3;
inline constexpr int kExitOracleDivergence = 4;

// One-shot baseline: bound the reduced root box and keep the binary-search
// incumbent; falls back to the all-links selection when the search comes up
// empty.
std::optional<Incumbent> root_relaxation_heuristic(const Instance& inst,
                                                   SolveStats* stats = nullptr);

// Single optimal solve: writes scenario.json, trace.csv, solution.json and
// summary.json into the output directory.
int run_solve(const ExperimentConfig& cfg);

// Backhaul sweep over (capacity, seed) cells: writes sweep.csv and
// sweep_summary.json.  Cells run concurrently when cfg.threads > 0.
int run_sweep(const ExperimentConfig& cfg);

// Oracle cross-check on a guard-sized instance: writes check.json.
int run_oracle_check(const ExperimentConfig& cfg);

}  // namespace combeam
