// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "combeam/box.hpp"
#include "combeam/cone_program.hpp"
#include "combeam/problem.hpp"

namespace combeam {

// Real rows (a_re, a_im) over interleaved (re, im) variables such that
// a_re . vec(w) = Re(h w) and a_im . vec(w) = Im(h w) for a complex row h.
std::pair<VecX, VecX> realify_inner_product(const RowVecXc& h);

// Interleaved (re, im) stacking of a complex vector.
VecX realify_vector(const VecXc& v);

// McCormick underestimator of sum_k x_{b,k} z_k over the box: the larger of
// the two affine pieces anchored at the lower and upper box corners.
// x_point has the full BK layout, z_point length K.
Real envelope_phi(const VecX& x_point, const VecX& z_point, const Box& box, int b);

// Convex bounding relaxation over a reduced box: maximize sum z (encoded as
// a minimization), x relaxed to [x_lo, x_hi], with the SINR and rate-bound
// second-order constraints, soft-power cones, per-BS power, connectivity,
// the cbo bracket rows and the envelope backhaul cuts.
ConeProgram build_bound_program(const Box& box, const Instance& inst, Real cbo);

// Feasibility subproblem for a fixed Boolean selection at rate floor z_lower:
// variables (w, u) for the active links only.  Inactive links are eliminated
// (their beamformers are identically zero).  The default objective is zero;
// MinPower asks for the least total soft power, which drives achieved rates
// toward the floor and is what the incumbent search uses.
enum class FeasObjective { None, MinPower };
ConeProgram build_feasibility_program(const SelectionVector& x_sel,
                                      const RateVector& z_lower,
                                      const Instance& inst,
                                      FeasObjective objective = FeasObjective::None);

}  // namespace combeam
