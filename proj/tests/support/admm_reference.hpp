// SPDX-License-Identifier: Apache-2.0
// Test-only reference solver: plain ADMM on the same standard form,
// algorithmically independent of the interior-point path it cross-checks.
#pragma once

#include <cmath>

#include "combeam/cone_program.hpp"

namespace combeam::testing {

struct AdmmResult {
  bool converged = false;
  Real objective = 0.0;
  VecX x;
};

inline VecX project_cone(const ConeProgram& prog, const VecX& s) {
  VecX out = s;
  int r = 0;
  for (const auto& blk : prog.cones) {
    if (blk.kind == ConeKind::Zero) {
      out.segment(r, blk.dim).setZero();
    } else if (blk.kind == ConeKind::NonNeg) {
      out.segment(r, blk.dim) = out.segment(r, blk.dim).cwiseMax(0.0);
    } else {
      auto v = s.segment(r + 1, blk.dim - 1);
      Real t = s[r];
      Real nv = v.norm();
      if (nv <= t) {
        // already inside
      } else if (nv <= -t) {
        out.segment(r, blk.dim).setZero();
      } else {
        Real a = 0.5 * (t + nv);
        out[r] = a;
        out.segment(r + 1, blk.dim - 1) = v * (a / nv);
      }
    }
    r += blk.dim;
  }
  return out;
}

// minimize c'x  s.t.  Ax + s = b, s in K, via scaled ADMM on the augmented
// Lagrangian.  Requires A to have full column rank (all test programs do).
inline AdmmResult admm_solve(const ConeProgram& prog, int max_iter = 400000,
                             Real tol = 1e-10) {
  const int n = prog.num_vars();
  const Real rho = 1.0;
  MatX ata = rho * (prog.A.transpose() * prog.A);
  ata.diagonal().array() += 1e-12;
  Eigen::LDLT<MatX> fac(ata);

  VecX x = VecX::Zero(n);
  VecX s = project_cone(prog, prog.b);
  VecX y = VecX::Zero(prog.num_rows());

  AdmmResult res;
  for (int it = 0; it < max_iter; ++it) {
    VecX rhs = -prog.c - prog.A.transpose() * y -
               rho * prog.A.transpose() * (s - prog.b);
    x = fac.solve(rhs);
    VecX s_prev = s;
    s = project_cone(prog, prog.b - prog.A * x - y / rho);
    VecX prim = prog.A * x + s - prog.b;
    y += rho * prim;
    Real rp = prim.norm();
    Real rd = (rho * prog.A.transpose() * (s - s_prev)).norm();
    if (rp < tol && rd < tol) {
      res.converged = true;
      break;
    }
  }
  res.x = x;
  res.objective = prog.c.dot(x);
  return res;
}

}  // namespace combeam::testing
