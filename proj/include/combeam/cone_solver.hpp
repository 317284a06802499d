// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "combeam/cone_program.hpp"

namespace combeam {

struct SolverOptions {
  Real tolerance = 1e-8;   // feasibility and duality-gap target
  int max_iterations = 100;
};

// Solves the standard-form conic program with a primal-dual interior-point
// method on the homogeneous self-dual embedding (Nesterov-Todd scaling,
// Mehrotra predictor-corrector, dense KKT factorization).  Infeasibility and
// unboundedness are reported through certificates, never as a silent wrong
// answer; runs are deterministic for identical inputs.
ConeSolution solve(const ConeProgram& prog, const SolverOptions& opts = {});
inline ConeSolution solve(const ConeProgram& prog, Real tol) {
  return solve(prog, SolverOptions{tol, 100});
}

}  // namespace combeam
