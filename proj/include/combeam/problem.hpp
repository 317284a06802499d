// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "combeam/box.hpp"
#include "combeam/scenario.hpp"
#include "combeam/types.hpp"

namespace combeam {

// Aggregate beamformer: column k is w_k in C^{B*M}; the M-row block starting
// at b*M is w_{b,k}.
using Beamformer = MatXc;
// Boolean selection x_{b,k}, b-major (see link_index).
using SelectionVector = VecXi;
// Soft power levels u_{b,k}, same ordering as the selection.
using SoftPower = VecX;
// Per-user rates z_k in nats per channel use.
using RateVector = VecX;

// One system instance: constants plus a channel realization.  Immutable
// after construction; safe to share across threads.
struct Instance {
  SystemParams params;
  ChannelSet channels;

  int B() const { return params.num_bs; }
  int M() const { return params.antennas_per_bs; }
  int K() const { return params.num_users; }
  Real noise_w() const { return params.noise_power_w(); }
};

Instance make_instance(const SystemParams& params, std::uint64_t seed);

// |h_k w_k|^2 / (sum_{j != k} |h_k w_j|^2 + W*N0), linear.
Real sinr(const Instance& inst, const Beamformer& w, int k);

// log(1 + sinr_k), nats per channel use.
Real rate(const Instance& inst, const Beamformer& w, int k);
RateVector all_rates(const Instance& inst, const Beamformer& w);

// sum_k x_{b,k} * rates_k for BS b.
Real backhaul_usage(const SelectionVector& x, const RateVector& rates, int b);

// Rotates each column of w by a unit-modulus scalar so that h_k w_k is real
// and nonnegative.  Leaves every |h_k w_j|, and hence every SINR, unchanged.
Beamformer soc_rotate(const Instance& inst, const Beamformer& w);

struct Violation {
  std::string constraint;  // "backhaul", "sinr", "soft-power", "power",
                           // "connectivity", "boolean"
  int index;               // BS, user, or link index as appropriate
  Real margin;             // amount by which the constraint is exceeded
};

struct FeasibilityReport {
  std::vector<Violation> violations;
  bool feasible() const { return violations.empty(); }
};

// Evaluates every constraint of the design problem and reports violations
// with margins.  The tolerance is relative for power and backhaul, absolute
// for the linear-domain SINR and the remaining constraints.
FeasibilityReport check_feasible(const Instance& inst, const Beamformer& w,
                                 const SelectionVector& x, const SoftPower& u,
                                 Real tol = 1e-6);

// A verified-feasible solution and its objective (sum of achieved rates).
struct Incumbent {
  Beamformer w;
  SelectionVector x;
  SoftPower u;
  RateVector rates;
  Real objective = 0.0;  // = rates.sum()
};

// Root search box: Boolean coordinates in [0,1]; z_k in
// [log(1 + gamma0), min{B*C, log(1 + B*P*|h_k|^2/(W*N0))}].  Returns nullopt
// when some user's SINR target is unreachable even at full power.
std::optional<Box> compute_root_box(const Instance& inst);

}  // namespace combeam
