// SPDX-License-Identifier: Apache-2.0
#include "combeam/cone_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace combeam {
namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();

struct IneqBlock {
  ConeKind kind;  // NonNeg or Soc
  int offset;     // row offset inside the inequality part
  int dim;
};

Real jdot(const Eigen::Ref<const VecX>& u) {
  return u[0] * u[0] - u.tail(u.size() - 1).squaredNorm();
}

// Smallest positive root of a*t^2 + b*t + c = 0, +inf when none.
Real smallest_positive_root(Real a, Real b, Real c) {
  if (std::abs(a) < 1e-300) {
    if (b >= 0) return kInf;
    return -c / b;
  }
  Real disc = b * b - 4 * a * c;
  if (disc < 0) return a > 0 ? kInf : 0.0;  // a<0, c>0 always has a root
  Real sq = std::sqrt(disc);
  Real q = -0.5 * (b + (b >= 0 ? sq : -sq));
  Real r1 = q / a;
  Real r2 = (q != 0.0) ? c / q : kInf;
  Real lo = std::min(r1, r2), hi = std::max(r1, r2);
  if (lo > 0) return lo;
  if (hi > 0) return hi;
  return kInf;
}

// Nesterov-Todd scaling state.  For the nonnegative part W = diag(w); for a
// second-order block W = beta * (2 v v' - J) with v'Jv = 1, J = diag(1, -I).
// In both cases W z = W^{-1} s = lambda.
struct Scaling {
  VecX w_nn;                 // nonneg entries, in block order
  std::vector<Real> beta;    // per SOC block
  std::vector<VecX> v;       // per SOC block
  VecX lambda;               // full inequality-space scaled point
};

class ConelpSolver {
 public:
  ConelpSolver(const ConeProgram& prog, const SolverOptions& opts) : opts_(opts) {
    split(prog);
  }

  ConeSolution run();

 private:
  void split(const ConeProgram& prog);

  // --- cone algebra over the inequality space --------------------------
  Real max_outside(const VecX& u) const;  // max amount outside the cone
  void add_identity(VecX& u, Real a) const;
  Real step_to_boundary(const VecX& lam, const VecX& d) const;
  Scaling compute_scaling(const VecX& s, const VecX& z) const;
  VecX apply_w(const Scaling& sc, const VecX& u) const;
  VecX apply_w_inv(const Scaling& sc, const VecX& u) const;
  VecX circ(const VecX& a, const VecX& b) const;
  VecX circ_solve(const VecX& lam, const VecX& d) const;  // lam o u = d

  // --- KKT ---------------------------------------------------------------
  // The inequality block is eliminated before factoring:
  //   z = Dinv (G x - bz),  D = W'W,
  //   [G'Dinv G   Aeq'] [x]   [bx + G'Dinv bz]
  //   [Aeq        0   ] [y] = [by            ],
  // with iterative refinement against the full 3x3 system.
  bool factor(const Scaling& sc);
  VecX apply_dinv(const VecX& u) const;  // (W'W)^{-1} u per block
  struct XYZ {
    VecX x, y, z;
  };
  XYZ solve3(const VecX& bx, const VecX& by, const VecX& bz) const;

  ConeSolution finish_optimal(const VecX& x, const VecX& y, const VecX& z,
                              const VecX& s, Real tau, int iter, Real pres,
                              Real dres, Real gap) const;

  SolverOptions opts_;
  int n_ = 0, p_ = 0, m_ = 0;
  MatX Aeq_, G_;
  VecX beq_, h_, c_;
  std::vector<IneqBlock> blocks_;
  int nn_total_ = 0;
  int degree_ = 0;
  std::vector<int> row_is_eq_;   // original row -> 1 if equality
  std::vector<int> row_local_;   // original row -> index within its part
  VecX row_scale_;               // original row -> equilibration factor d
  int orig_rows_ = 0;

  // Scaling-dependent state refreshed by factor().
  VecX dinv_nn_;               // 1/w^2 on nonneg entries, block order
  std::vector<Real> dinv_beta_;  // beta^{-2} per SOC block
  std::vector<VecX> dinv_v_;     // J v per SOC block: D^{-1} = b^{-2}(2vv'-J)
  MatX reduced_;
  Eigen::PartialPivLU<MatX> lu_;
};

void ConelpSolver::split(const ConeProgram& prog) {
  prog.validate();
  n_ = prog.num_vars();
  orig_rows_ = prog.num_rows();
  c_ = prog.c;

  // Row equilibration: one factor per scalar row, uniform within each SOC
  // block (SOC membership is invariant under uniform positive scaling).
  row_scale_ = VecX::Ones(orig_rows_);
  {
    int r = 0;
    for (const auto& blk : prog.cones) {
      if (blk.kind == ConeKind::Soc) {
        Real mx = 0.0;
        for (int i = 0; i < blk.dim; ++i)
          mx = std::max(mx, std::max(prog.A.row(r + i).norm(), std::abs(prog.b[r + i])));
        Real d = 1.0 / std::clamp(mx, 1e-8, 1e8);
        for (int i = 0; i < blk.dim; ++i) row_scale_[r + i] = d;
      } else {
        for (int i = 0; i < blk.dim; ++i) {
          Real mx = std::max(prog.A.row(r + i).norm(), std::abs(prog.b[r + i]));
          row_scale_[r + i] = 1.0 / std::clamp(mx, 1e-8, 1e8);
        }
      }
      r += blk.dim;
    }
  }

  p_ = 0;
  m_ = 0;
  for (const auto& blk : prog.cones)
    (blk.kind == ConeKind::Zero ? p_ : m_) += blk.dim;

  Aeq_.resize(p_, n_);
  beq_.resize(p_);
  G_.resize(m_, n_);
  h_.resize(m_);
  row_is_eq_.assign(orig_rows_, 0);
  row_local_.assign(orig_rows_, 0);

  int r = 0, re = 0, ri = 0;
  nn_total_ = 0;
  for (const auto& blk : prog.cones) {
    if (blk.kind == ConeKind::Zero) {
      for (int i = 0; i < blk.dim; ++i, ++r, ++re) {
        Aeq_.row(re) = prog.A.row(r) * row_scale_[r];
        beq_[re] = prog.b[r] * row_scale_[r];
        row_is_eq_[r] = 1;
        row_local_[r] = re;
      }
    } else {
      blocks_.push_back({blk.kind, ri, blk.dim});
      if (blk.kind == ConeKind::NonNeg) nn_total_ += blk.dim;
      for (int i = 0; i < blk.dim; ++i, ++r, ++ri) {
        G_.row(ri) = prog.A.row(r) * row_scale_[r];
        h_[ri] = prog.b[r] * row_scale_[r];
        row_local_[r] = ri;
      }
    }
  }
  degree_ = nn_total_;
  for (const auto& blk : blocks_)
    if (blk.kind == ConeKind::Soc) degree_ += 1;
}

Real ConelpSolver::max_outside(const VecX& u) const {
  Real t = -kInf;
  for (const auto& blk : blocks_) {
    auto seg = u.segment(blk.offset, blk.dim);
    if (blk.kind == ConeKind::NonNeg)
      t = std::max(t, -seg.minCoeff());
    else
      t = std::max(t, seg.tail(blk.dim - 1).norm() - seg[0]);
  }
  return t;
}

void ConelpSolver::add_identity(VecX& u, Real a) const {
  for (const auto& blk : blocks_) {
    if (blk.kind == ConeKind::NonNeg)
      u.segment(blk.offset, blk.dim).array() += a;
    else
      u[blk.offset] += a;
  }
}

Real ConelpSolver::step_to_boundary(const VecX& lam, const VecX& d) const {
  Real alpha = kInf;
  for (const auto& blk : blocks_) {
    auto L = lam.segment(blk.offset, blk.dim);
    auto D = d.segment(blk.offset, blk.dim);
    if (blk.kind == ConeKind::NonNeg) {
      for (int i = 0; i < blk.dim; ++i)
        if (D[i] < 0) alpha = std::min(alpha, -L[i] / D[i]);
    } else {
      Real a = jdot(D);
      Real b = 2.0 * (L[0] * D[0] - L.tail(blk.dim - 1).dot(D.tail(blk.dim - 1)));
      Real cq = jdot(L);
      alpha = std::min(alpha, smallest_positive_root(a, b, cq));
    }
  }
  return alpha;
}

Scaling ConelpSolver::compute_scaling(const VecX& s, const VecX& z) const {
  Scaling sc;
  sc.w_nn.resize(nn_total_);
  sc.lambda.resize(m_);
  int nn_at = 0;
  for (const auto& blk : blocks_) {
    auto S = s.segment(blk.offset, blk.dim);
    auto Z = z.segment(blk.offset, blk.dim);
    if (blk.kind == ConeKind::NonNeg) {
      for (int i = 0; i < blk.dim; ++i) {
        sc.w_nn[nn_at + i] = std::sqrt(S[i] / Z[i]);
        sc.lambda[blk.offset + i] = std::sqrt(S[i] * Z[i]);
      }
      nn_at += blk.dim;
    } else {
      const int d = blk.dim;
      Real aa = std::sqrt(jdot(S));
      Real bb = std::sqrt(jdot(Z));
      VecX sb = S / aa, zb = Z / bb;
      Real gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
      VecX v(d);
      v[0] = (sb[0] + zb[0]) / (2.0 * gamma);
      v.tail(d - 1) = (sb.tail(d - 1) - zb.tail(d - 1)) / (2.0 * gamma);
      sc.beta.push_back(std::sqrt(aa / bb));
      sc.v.push_back(v);
      Real sab = std::sqrt(aa * bb);
      Real dd = sb[0] + zb[0] + 2.0 * gamma;
      VecX lam(d);
      lam[0] = gamma * sab;
      lam.tail(d - 1) = sab * ((gamma + zb[0]) * sb.tail(d - 1) +
                               (gamma + sb[0]) * zb.tail(d - 1)) / dd;
      sc.lambda.segment(blk.offset, d) = lam;
    }
  }
  return sc;
}

VecX ConelpSolver::apply_w(const Scaling& sc, const VecX& u) const {
  VecX out(m_);
  int nn_at = 0, soc_at = 0;
  for (const auto& blk : blocks_) {
    auto U = u.segment(blk.offset, blk.dim);
    if (blk.kind == ConeKind::NonNeg) {
      out.segment(blk.offset, blk.dim) =
          sc.w_nn.segment(nn_at, blk.dim).cwiseProduct(U);
      nn_at += blk.dim;
    } else {
      // W = beta * T with T = [v0, v1'; v1, I + v1 v1'/(1+v0)]; T*T = 2vv'-J.
      const VecX& v = sc.v[soc_at];
      Real beta = sc.beta[soc_at];
      ++soc_at;
      const int d = blk.dim;
      Real vu = v.tail(d - 1).dot(U.tail(d - 1));
      VecX res(d);
      res[0] = v[0] * U[0] + vu;
      res.tail(d - 1) =
          U[0] * v.tail(d - 1) + U.tail(d - 1) + (vu / (1.0 + v[0])) * v.tail(d - 1);
      out.segment(blk.offset, d) = beta * res;
    }
  }
  return out;
}

VecX ConelpSolver::apply_w_inv(const Scaling& sc, const VecX& u) const {
  VecX out(m_);
  int nn_at = 0, soc_at = 0;
  for (const auto& blk : blocks_) {
    auto U = u.segment(blk.offset, blk.dim);
    if (blk.kind == ConeKind::NonNeg) {
      out.segment(blk.offset, blk.dim) =
          U.cwiseQuotient(sc.w_nn.segment(nn_at, blk.dim));
      nn_at += blk.dim;
    } else {
      // T^{-1} = [v0, -v1'; -v1, I + v1 v1'/(1+v0)]
      const VecX& v = sc.v[soc_at];
      Real beta = sc.beta[soc_at];
      ++soc_at;
      const int d = blk.dim;
      Real vu = v.tail(d - 1).dot(U.tail(d - 1));
      VecX res(d);
      res[0] = v[0] * U[0] - vu;
      res.tail(d - 1) =
          -U[0] * v.tail(d - 1) + U.tail(d - 1) + (vu / (1.0 + v[0])) * v.tail(d - 1);
      out.segment(blk.offset, d) = res / beta;
    }
  }
  return out;
}

VecX ConelpSolver::circ(const VecX& a, const VecX& b) const {
  VecX out(m_);
  for (const auto& blk : blocks_) {
    auto A = a.segment(blk.offset, blk.dim);
    auto B = b.segment(blk.offset, blk.dim);
    if (blk.kind == ConeKind::NonNeg) {
      out.segment(blk.offset, blk.dim) = A.cwiseProduct(B);
    } else {
      out[blk.offset] = A.dot(B);
      out.segment(blk.offset + 1, blk.dim - 1) =
          A[0] * B.tail(blk.dim - 1) + B[0] * A.tail(blk.dim - 1);
    }
  }
  return out;
}

VecX ConelpSolver::circ_solve(const VecX& lam, const VecX& d) const {
  VecX out(m_);
  for (const auto& blk : blocks_) {
    auto L = lam.segment(blk.offset, blk.dim);
    auto D = d.segment(blk.offset, blk.dim);
    if (blk.kind == ConeKind::NonNeg) {
      out.segment(blk.offset, blk.dim) = D.cwiseQuotient(L);
    } else {
      Real det = jdot(L);
      Real u0 = (L[0] * D[0] - L.tail(blk.dim - 1).dot(D.tail(blk.dim - 1))) / det;
      out[blk.offset] = u0;
      out.segment(blk.offset + 1, blk.dim - 1) =
          (D.tail(blk.dim - 1) - u0 * L.tail(blk.dim - 1)) / L[0];
    }
  }
  return out;
}

void ConelpSolver::build_kkt_pattern() {
  const int N = n_ + p_ + m_;
  kkt_ = MatX::Zero(N, N);
  kkt_.block(0, n_, n_, p_) = Aeq_.transpose();
  kkt_.block(0, n_ + p_, n_, m_) = G_.transpose();
  kkt_.block(n_, 0, p_, n_) = Aeq_;
  kkt_.block(n_ + p_, 0, m_, n_) = G_;
}

bool ConelpSolver::factor(const Scaling& sc) {
  // Refresh the -W'W block.
  kkt_.block(n_ + p_, n_ + p_, m_, m_).setZero();
  int nn_at = 0, soc_at = 0;
  for (const auto& blk : blocks_) {
    int r0 = n_ + p_ + blk.offset;
    if (blk.kind == ConeKind::NonNeg) {
      for (int i = 0; i < blk.dim; ++i) {
        Real w = sc.w_nn[nn_at + i];
        kkt_(r0 + i, r0 + i) = -w * w;
      }
      nn_at += blk.dim;
    } else {
      const int d = blk.dim;
      const VecX& v = sc.v[soc_at];
      Real beta = sc.beta[soc_at];
      ++soc_at;
      // W'W = beta^2 T^2 = beta^2 (2 v v' - J)
      MatX H = 2.0 * v * v.transpose();
      H(0, 0) -= 1.0;
      H.bottomRightCorner(d - 1, d - 1) += MatX::Identity(d - 1, d - 1);
      kkt_.block(r0, r0, d, d) = -(beta * beta) * H;
    }
  }

  const Real reg = 1e-10;
  kkt_reg_ = kkt_;
  kkt_reg_.diagonal().head(n_).array() += reg;
  kkt_reg_.diagonal().tail(p_ + m_).array() -= reg;
  lu_.compute(kkt_reg_);
  VecX probe = VecX::Ones(kkt_.rows());
  VecX sol = lu_.solve(probe);
  return sol.allFinite();
}

VecX ConelpSolver::kkt_solve(const VecX& rhs) const {
  VecX sol = lu_.solve(rhs);
  for (int it = 0; it < 2; ++it) {
    VecX resid = rhs - kkt_ * sol;
    sol += lu_.solve(resid);
  }
  return sol;
}

ConelpSolver::XYZ ConelpSolver::solve3(const VecX& bx, const VecX& by,
                                       const VecX& bz) const {
  VecX rhs(n_ + p_ + m_);
  rhs.head(n_) = bx;
  rhs.segment(n_, p_) = by;
  rhs.tail(m_) = bz;
  VecX sol = kkt_solve(rhs);
  return {sol.head(n_), sol.segment(n_, p_), sol.tail(m_)};
}

ConeSolution ConelpSolver::finish_optimal(const VecX& x, const VecX& y,
                                          const VecX& z, const VecX& s,
                                          Real tau, int iter, Real pres,
                                          Real dres, Real gap) const {
  ConeSolution out;
  out.status = ConeSolution::Status::Optimal;
  out.x = x / tau;
  out.y.resize(orig_rows_);
  out.s.resize(orig_rows_);
  for (int r = 0; r < orig_rows_; ++r) {
    if (row_is_eq_[r]) {
      out.y[r] = row_scale_[r] * y[row_local_[r]] / tau;
      out.s[r] = 0.0;
    } else {
      out.y[r] = row_scale_[r] * z[row_local_[r]] / tau;
      out.s[r] = s[row_local_[r]] / (row_scale_[r] * tau);
    }
  }
  out.objective = c_.dot(out.x);
  out.dual_objective = -(beq_.dot(y) + h_.dot(z)) / tau;
  out.stats = {iter, pres, dres, gap};
  return out;
}

ConeSolution ConelpSolver::run() {
  ConeSolution fail;
  fail.status = ConeSolution::Status::NumericalFailure;

  build_kkt_pattern();

  const Real resx0 = std::max<Real>(1.0, c_.norm());
  const Real resy0 = std::max<Real>(1.0, beq_.norm());
  const Real resz0 = std::max<Real>(1.0, h_.norm());

  // Initial point: least-squares primal/dual starts shifted into the cone.
  VecX s0 = VecX::Ones(std::max(m_, 0)), z0 = s0, lam0;
  Scaling identity;
  identity.w_nn = VecX::Ones(nn_total_);
  int nn_seen = 0;
  for (const auto& blk : blocks_) {
    if (blk.kind == ConeKind::NonNeg) {
      nn_seen += blk.dim;
    } else {
      VecX v = VecX::Zero(blk.dim);
      v[0] = 1.0;
      identity.beta.push_back(1.0);
      identity.v.push_back(v);
    }
  }
  (void)nn_seen;
  if (!factor(identity)) return fail;

  VecX x, y, z, s;
  {
    auto prim = solve3(VecX::Zero(n_), beq_, h_);
    x = prim.x;
    s = -prim.z;
    Real ts = m_ > 0 ? max_outside(s) : -kInf;
    if (m_ > 0 && ts >= -1e-8 * std::max<Real>(1.0, s.norm()))
      add_identity(s, 1.0 + ts);
    auto dual = solve3(-c_, VecX::Zero(p_), VecX::Zero(m_));
    y = dual.y;
    z = dual.z;
    Real tz = m_ > 0 ? max_outside(z) : -kInf;
    if (m_ > 0 && tz >= -1e-8 * std::max<Real>(1.0, z.norm()))
      add_identity(z, 1.0 + tz);
  }
  Real tau = 1.0, kappa = 1.0;

  const Real ftol = opts_.tolerance;
  int iter = 0;
  Real pres = kInf, dres = kInf, gap_abs = kInf;

  // Finite precision caps how far the endgame can go; keep the cleanest
  // iterate seen so the final classification is not at the mercy of a
  // corrupted last step.
  struct BestIterate {
    Real merit = kInf;
    VecX x, y, z, s;
    Real tau = 1.0;
    Real pres = kInf, dres = kInf, gap = kInf;
    int iter = 0;
  } best;
  int last_progress = 0;

  for (iter = 0; iter < opts_.max_iterations; ++iter) {
    // Residuals of the embedding.
    VecX rx = Aeq_.transpose() * y + G_.transpose() * z + c_ * tau;
    VecX ry = Aeq_ * x - beq_ * tau;
    VecX rz = G_ * x + s - h_ * tau;
    Real rt = c_.dot(x) + beq_.dot(y) + h_.dot(z) + kappa;

    Real pcost = c_.dot(x) / tau;
    gap_abs = (m_ > 0 ? s.dot(z) : 0.0) / (tau * tau);
    Real relgap = gap_abs / std::max<Real>(1.0, std::abs(pcost));
    pres = std::max(p_ > 0 ? ry.norm() / resy0 : 0.0,
                    m_ > 0 ? rz.norm() / resz0 : 0.0) / tau;
    dres = rx.norm() / (resx0 * tau);

    if (pres <= ftol && dres <= ftol && (gap_abs <= ftol || relgap <= ftol))
      return finish_optimal(x, y, z, s, tau, iter, pres, dres, gap_abs);

    Real merit = std::max({pres, dres, std::min(gap_abs, relgap)});
    if (merit < 0.9 * best.merit) {
      best = {merit, x, y, z, s, tau, pres, dres, gap_abs, iter};
      last_progress = iter;
    }
    if (iter - last_progress > 15) break;  // stalled at machine precision

    Real denom_p = -(beq_.dot(y) + h_.dot(z));
    if (denom_p > 0) {
      Real pinf = (Aeq_.transpose() * y + G_.transpose() * z).norm() / resx0 / denom_p;
      if (pinf <= ftol) {
        ConeSolution out;
        out.status = ConeSolution::Status::Infeasible;
        out.stats = {iter, pres, dres, gap_abs};
        return out;
      }
    }
    Real denom_d = -c_.dot(x);
    if (denom_d > 0) {
      Real dinf = std::max(p_ > 0 ? (Aeq_ * x).norm() / resy0 : 0.0,
                           m_ > 0 ? (G_ * x + s).norm() / resz0 : 0.0) / denom_d;
      if (dinf <= ftol) {
        ConeSolution out;
        out.status = ConeSolution::Status::Unbounded;
        out.stats = {iter, pres, dres, gap_abs};
        return out;
      }
    }

    Real mu = ((m_ > 0 ? s.dot(z) : 0.0) + tau * kappa) / (degree_ + 1);

    Scaling sc = compute_scaling(s, z);
    if (!sc.lambda.allFinite()) break;
    if (!factor(sc)) break;

    auto vsol = solve3(-c_, beq_, h_);
    Real cbh_v = c_.dot(vsol.x) + beq_.dot(vsol.y) + h_.dot(vsol.z);
    Real dg = cbh_v - kappa / tau;
    if (!std::isfinite(dg) || std::abs(dg) < 1e-300) break;

    VecX dx, dy, dz, ds;
    Real dtau = 0, dkappa = 0;
    VecX rho_s, rho_z;  // scaled-space directions for step control

    auto take_direction = [&](Real eta, const VecX& d_s, Real d_kap) {
      VecX g = circ_solve(sc.lambda, d_s);
      VecX bz = -eta * rz + apply_w(sc, g);
      auto usol = solve3(-eta * rx, -eta * ry, bz);
      Real bt = -eta * rt + d_kap / tau;
      dtau = (bt - (c_.dot(usol.x) + beq_.dot(usol.y) + h_.dot(usol.z))) / dg;
      dx = usol.x + dtau * vsol.x;
      dy = usol.y + dtau * vsol.y;
      dz = usol.z + dtau * vsol.z;
      ds = -apply_w(sc, g + apply_w(sc, dz));
      dkappa = -(d_kap + kappa * dtau) / tau;
      rho_s = apply_w_inv(sc, ds);
      rho_z = apply_w(sc, dz);
    };

    auto boundary_step = [&]() {
      Real a = m_ > 0 ? std::min(step_to_boundary(sc.lambda, rho_s),
                                 step_to_boundary(sc.lambda, rho_z))
                      : kInf;
      if (dtau < 0) a = std::min(a, -tau / dtau);
      if (dkappa < 0) a = std::min(a, -kappa / dkappa);
      return a;
    };

    // Predictor.
    VecX lam_sq = circ(sc.lambda, sc.lambda);
    take_direction(1.0, lam_sq, tau * kappa);
    Real alpha_aff = std::min<Real>(1.0, boundary_step());
    Real mu_aff = ((m_ > 0 ? (s + alpha_aff * ds).dot(z + alpha_aff * dz) : 0.0) +
                   (tau + alpha_aff * dtau) * (kappa + alpha_aff * dkappa)) /
                  (degree_ + 1);
    Real sigma = std::clamp(mu_aff / mu, 0.0, 1.0);
    sigma = sigma * sigma * sigma;

    // Corrector.
    VecX ds_corr = lam_sq;
    if (m_ > 0) ds_corr += circ(rho_s, rho_z);
    add_identity(ds_corr, -sigma * mu);
    Real dk_corr = tau * kappa + dtau * dkappa - sigma * mu;
    take_direction(1.0 - sigma, ds_corr, dk_corr);

    Real alpha = std::min<Real>(1.0, 0.99 * boundary_step());
#ifdef COMBEAM_SOLVER_TRACE
    std::printf(
        "it=%2d mu=%9.2e aaff=%6.4f sigma=%6.4f alpha=%6.4f tau=%9.2e kap=%9.2e "
        "pres=%8.1e dres=%8.1e gap=%8.1e\n",
        iter, mu, alpha_aff, sigma, alpha, tau, kappa, pres, dres, gap_abs);
#endif
    if (!(alpha > 1e-10)) break;

    x += alpha * dx;
    y += alpha * dy;
    if (m_ > 0) {
      z += alpha * dz;
      s += alpha * ds;
    }
    tau += alpha * dtau;
    kappa += alpha * dkappa;
    if (!(tau > 0) || !(kappa > 0)) break;
  }

  // Classify the best iterate under a relaxed tolerance before giving up.
  const Real relax = std::max(ftol * 100, 1e-6);
  if (best.merit <= relax)
    return finish_optimal(best.x, best.y, best.z, best.s, best.tau, best.iter,
                          best.pres, best.dres, best.gap);
  {
    Real denom_p = -(beq_.dot(y) + h_.dot(z));
    if (denom_p > 0 &&
        (Aeq_.transpose() * y + G_.transpose() * z).norm() / resx0 / denom_p <= relax) {
      ConeSolution out;
      out.status = ConeSolution::Status::Infeasible;
      out.stats = {iter, pres, dres, gap_abs};
      return out;
    }
    Real denom_d = -c_.dot(x);
    if (denom_d > 0 &&
        std::max(p_ > 0 ? (Aeq_ * x).norm() / resy0 : 0.0,
                 m_ > 0 ? (G_ * x + s).norm() / resz0 : 0.0) / denom_d <= relax) {
      ConeSolution out;
      out.status = ConeSolution::Status::Unbounded;
      out.stats = {iter, pres, dres, gap_abs};
      return out;
    }
  }
  fail.stats = {iter, pres, dres, gap_abs};
  return fail;
}

}  // namespace

ConeSolution solve(const ConeProgram& prog, const SolverOptions& opts) {
  ConelpSolver solver(prog, opts);
  return solver.run();
}

}  // namespace combeam
