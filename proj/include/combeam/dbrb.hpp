// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "combeam/box.hpp"
#include "combeam/problem.hpp"
#include "combeam/types.hpp"

namespace combeam {

// A live search box with its bound bookkeeping.
struct Node {
  Box box;
  Real upper = 0.0;
  std::optional<Real> local_lower;  // feasible value found inside this box
  long long created_iter = 0;
  long long seq = 0;  // creation order, deterministic tie-break
};

struct TraceRow {
  long long iter = 0;
  Real ub = 0.0;
  Real lb = 0.0;
  long long live_boxes = 0;
  long long socp_solves = 0;  // bounding relaxations
  long long feas_solves = 0;  // feasibility subproblems
  double elapsed_ms = 0.0;
};

enum class TerminationReason { Converged, Exhausted, IterationLimit, Infeasible };
const char* to_string(TerminationReason r);

struct SolveResult {
  std::optional<Incumbent> incumbent;
  Real upper_bound = 0.0;
  Real lower_bound = 0.0;
  std::vector<TraceRow> trace;
  TerminationReason reason = TerminationReason::Infeasible;
  long long iterations = 0;
  long long bound_solves = 0;
  long long feasibility_solves = 0;
  double wall_ms = 0.0;
};

struct SolveStats {
  long long bound_solves = 0;
  long long feas_solves = 0;
};

struct DbrbOptions {
  Real epsilon_rel = 1e-3;
  Real epsilon_abs = 1e-4;
  long long max_iterations = 100000;
  // Verified feasible starting point; raises the initial cbo.
  std::optional<Incumbent> warm_incumbent;
  // Invoked once per trace row as it is produced.
  std::function<void(const TraceRow&)> trace_sink;
};

// Improving-bound selection: argmax upper bound, ties by earliest creation
// iteration, then lowest sequence number.  Throws on an empty set.
int select_box_index(const std::vector<Node>& nodes);
inline const Node& select_box(const std::vector<Node>& nodes) {
  return nodes[select_box_index(nodes)];
}

// Signalled by branch() when a box cannot be split further.
class AtomBoxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bisects along the longest edge (Boolean edges count as length 1); Boolean
// splits fix the coordinate to 0 / 1, continuous splits cut at the midpoint.
std::pair<Box, Box> branch(const Box& box);

// Exact membership of (x, z) in the feasible set: connectivity, per-BS
// backhaul sum x*z <= C, and feasibility of the beamforming subproblem at
// rate floor z.  Solver breakdown raises SolverError rather than returning
// false.
bool point_in_S(const Instance& inst, const SelectionVector& x, const VecX& z,
                SolveStats* stats = nullptr);

// Box reduction.  Contract: every s in [lo,hi] that is feasible with
// objective >= cbo stays inside the returned box; nullopt means no such
// point exists.  Boolean coordinates are probed with per-constraint
// most-permissive face tests; continuous lower bounds use the exact linear
// objective cut, continuous upper bounds a feasibility bisection.
std::optional<Box> reduce(const Box& box, Real cbo, const Instance& inst,
                          SolveStats* stats = nullptr);

struct BoundResult {
  bool pruned = false;
  Real upper = 0.0;
  std::optional<Incumbent> incumbent;
};

// Bounding step: convex relaxation for the upper bound (pruned when the
// relaxation with the cbo bracket is infeasible), then the binary search
// over selections derived from the relaxation's soft powers for an
// incumbent.
BoundResult bound(const Box& box, Real cbo, const Instance& inst,
                  SolveStats* stats = nullptr);

// Turns a beamforming feasibility witness for a fixed selection into a
// verified incumbent: phase rotation, then the best feasible scaling of the
// whole beamformer (every SINR is monotone in the scale), then the full
// constraint check.  Returns nullopt when no scaling satisfies everything.
std::optional<Incumbent> incumbent_from_witness(const Instance& inst,
                                                const SelectionVector& x_sel,
                                                const Beamformer& w_raw);

// Threshold binary search over the number of active links, driven by the
// relaxation's soft-power vector.  Returns the best verified incumbent.
// probe_log, when given, records the L value of every threshold probe.
std::optional<Incumbent> binary_search_feasible(const SoftPower& u_star,
                                                const Box& box,
                                                const Instance& inst,
                                                SolveStats* stats = nullptr,
                                                std::vector<int>* probe_log = nullptr);

// The full branch-reduce-and-bound run.
SolveResult solve_dbrb(const Instance& inst, const DbrbOptions& opts = {});

}  // namespace combeam
