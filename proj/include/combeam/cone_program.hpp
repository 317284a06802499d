// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "combeam/problem.hpp"
#include "combeam/types.hpp"
#include "json.hpp"

namespace combeam {

// Standard-form conic program
//
//   minimize    c'x
//   subject to  b - A x in K,
//
// where K is the product of the listed cone blocks in row order.  A Zero
// block pins b - Ax = 0 (an equality), a NonNeg block means b - Ax >= 0
// elementwise, and a Soc block of dimension d >= 2 requires
// s_0 >= ||(s_1..s_{d-1})||_2 for s = b - Ax on those rows.
enum class ConeKind { Zero, NonNeg, Soc };

struct ConeBlock {
  ConeKind kind;
  int dim;
};

// Maps solver variables back to the model quantities (w stored as
// interleaved re/im pairs, then x, u, z where present).  Offsets are -1 for
// blocks that a particular program eliminates.
struct VariableMap {
  int B = 0, M = 0, K = 0;
  std::vector<int> w_offset;  // per link (b-major): start of 2M interleaved reals
  std::vector<int> u_offset;  // per link
  int x_offset = -1;          // BK contiguous relaxed selection vars
  int z_offset = -1;          // K contiguous rate vars

  Beamformer beamformer(const VecX& primal) const;
  SoftPower soft_power(const VecX& primal) const;
  VecX selection(const VecX& primal) const;  // relaxed x, zeros if absent
  RateVector rates(const VecX& primal) const;
};

struct ConeProgram {
  VecX c;
  MatX A;
  VecX b;
  std::vector<ConeBlock> cones;
  VariableMap vars;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
  void validate() const;  // throws std::invalid_argument on inconsistency
};

struct SolverStatistics {
  int iterations = 0;
  Real primal_residual = 0.0;
  Real dual_residual = 0.0;
  Real duality_gap = 0.0;
};

struct ConeSolution {
  enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };
  Status status = Status::NumericalFailure;
  VecX x;  // primal
  VecX y;  // dual multiplier per row (free on Zero rows, in K* otherwise)
  VecX s;  // slack per row, s = b - Ax
  Real objective = 0.0;       // c'x
  Real dual_objective = 0.0;  // -b'y, a certified bound for Optimal solves
  SolverStatistics stats;
};

const char* to_string(ConeSolution::Status s);

// Debug dump for cross-solver verification: c, b, A as (row, col, value)
// triplets, cone list.
nlohmann::json program_to_json(const ConeProgram& prog);

}  // namespace combeam
