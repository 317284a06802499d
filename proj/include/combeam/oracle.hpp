// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "combeam/dbrb.hpp"
#include "combeam/problem.hpp"
#include "json.hpp"

namespace combeam {

struct OracleResult {
  bool feasible = false;
  Real objective = 0.0;  // best grid sum rate, nats/use
  SelectionVector best_x;
  VecX best_z;
  Real grid_step = 0.0;
  long long feasibility_solves = 0;
};

// Brute-force reference: enumerate every connected Boolean selection and a
// delta-grid over the rate box, certifying candidates with the beamforming
// feasibility subproblem.  The result is within K*delta of the true optimum
// from below.  Guarded to BK <= 8, K <= 3; refuses larger instances.
OracleResult enumerate_optimal(const Instance& inst, Real grid_step = 0.05);

struct OracleComparison {
  bool pass = false;
  bool oracle_feasible = false;
  bool dbrb_feasible = false;
  Real oracle_objective = 0.0;
  Real dbrb_lower = 0.0;
  Real dbrb_upper = 0.0;
  Real lb_tolerance = 0.0;  // K*delta + eps_abs
  std::string detail;
  nlohmann::json report;  // full dump, including traces on divergence
};

// Cross-check: |dbrb LB - oracle| <= K*delta + eps_abs and
// dbrb UB >= oracle - 1e-6, with matching feasibility verdicts.
OracleComparison oracle_vs_dbrb(const Instance& inst, Real grid_step,
                                Real eps_abs, long long max_iterations = 100000);

}  // namespace combeam
