// SPDX-License-Identifier: Apache-2.0
#include "combeam/dbrb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

#include "combeam/cone_solver.hpp"
#include "combeam/socp_builders.hpp"

namespace combeam {
namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();
constexpr Real kBackhaulSlack = 1e-9;  // fp headroom, well under check tolerance

bool connectivity_ok(const SelectionVector& x, int B, int K) {
  for (int k = 0; k < K; ++k) {
    int served = 0;
    for (int b = 0; b < B; ++b) served += x[link_index(b, k, K)];
    if (served < 1) return false;
  }
  return true;
}

bool backhaul_ok(const SelectionVector& x, const VecX& z, const Instance& inst) {
  const int B = inst.B(), K = inst.K();
  const Real cap = inst.params.backhaul_cap * (1.0 + kBackhaulSlack);
  for (int b = 0; b < B; ++b) {
    Real used = 0.0;
    for (int k = 0; k < K; ++k) used += x[link_index(b, k, K)] * z[k];
    if (used > cap) return false;
  }
  return true;
}

bool socp_feasible(const SelectionVector& x, const VecX& z, const Instance& inst,
                   SolveStats* stats, Real tol) {
  ConeProgram prog = build_feasibility_program(x, z, inst);
  if (stats) stats->feas_solves++;
  ConeSolution sol = solve(prog, SolverOptions{tol, 100});
  if (sol.status == ConeSolution::Status::Optimal) return true;
  if (sol.status == ConeSolution::Status::Infeasible) return false;
  throw SolverError("feasibility probe failed numerically");
}

std::uint64_t selection_bits(const SelectionVector& x) {
  std::uint64_t bits = 0;
  for (int l = 0; l < x.size(); ++l)
    if (x[l]) bits |= (1ULL << l);
  return bits;
}

// Exactly the L largest entries of u, ties at the threshold resolved toward
// smaller link index.
SelectionVector top_l_selection(const SoftPower& u, int L) {
  const int n = static_cast<int>(u.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return u[a] > u[b]; });
  SelectionVector x = SelectionVector::Zero(n);
  for (int i = 0; i < L && i < n; ++i) x[order[i]] = 1;
  return x;
}

}  // namespace

namespace {

// Deterministic projected-gradient ascent on the sum rate over the active
// links, with the exact projection onto the per-BS power balls.  Pure local
// polish of a witness; every candidate it produces is re-verified later.
Beamformer ascend_sum_rate(const Instance& inst, const SelectionVector& x_sel,
                           Beamformer w, int max_steps = 60) {
  const int B = inst.B(), M = inst.M(), K = inst.K();
  const Real noise = inst.noise_w();
  const Real pbar = inst.params.power_budget_w;

  auto project = [&](Beamformer& v) {
    for (int b = 0; b < B; ++b)
      for (int k = 0; k < K; ++k)
        if (!x_sel[link_index(b, k, K)])
          v.col(k).segment(b * M, M).setZero();
    for (int b = 0; b < B; ++b) {
      Real used = 0.0;
      for (int k = 0; k < K; ++k) used += v.col(k).segment(b * M, M).squaredNorm();
      if (used > pbar) {
        Real sc = std::sqrt(pbar / used);
        for (int k = 0; k < K; ++k) v.col(k).segment(b * M, M) *= sc;
      }
    }
  };
  auto sum_rate = [&](const Beamformer& v) {
    Real total = 0.0;
    for (int k = 0; k < K; ++k) {
      const auto hk = inst.channels.h.row(k);
      Real sig = std::norm(Complex(hk * v.col(k)));
      Real interf = 0.0;
      for (int j = 0; j < K; ++j)
        if (j != k) interf += std::norm(Complex(hk * v.col(j)));
      total += std::log1p(sig / (interf + noise));
    }
    return total;
  };

  project(w);
  Real cur = sum_rate(w);
  Real step = 0.25 * pbar / std::max<Real>(1.0, w.squaredNorm());
  for (int it = 0; it < max_steps; ++it) {
    // d/dw_j* of sum_k [log(S_k + I_k + N) - log(I_k + N)]
    MatXc grad = MatXc::Zero(B * M, K);
    VecX sig(K), interf(K);
    for (int k = 0; k < K; ++k) {
      const auto hk = inst.channels.h.row(k);
      sig[k] = std::norm(Complex(hk * w.col(k)));
      interf[k] = 0.0;
      for (int j = 0; j < K; ++j)
        if (j != k) interf[k] += std::norm(Complex(hk * w.col(j)));
    }
    for (int j = 0; j < K; ++j) {
      for (int k = 0; k < K; ++k) {
        const auto hk = inst.channels.h.row(k);
        Complex hkwj = hk * w.col(j);
        Real tot = sig[k] + interf[k] + noise;
        if (k == j) {
          grad.col(j) += hk.adjoint() * hkwj / tot;
        } else {
          grad.col(j) += hk.adjoint() * hkwj * (1.0 / tot - 1.0 / (interf[k] + noise));
        }
      }
    }
    Beamformer trial = w + step * grad;
    project(trial);
    Real val = sum_rate(trial);
    if (val > cur) {
      w = trial;
      cur = val;
      step *= 1.6;
    } else {
      step *= 0.4;
      if (step * grad.norm() < 1e-12 * std::max<Real>(1.0, w.norm())) break;
    }
  }
  return w;
}

}  // namespace

namespace {

// Each witness is scaled along the ray t*w: every SINR is increasing in t,
// so the best feasible scale sits on the binding power or backhaul
// constraint and can be found with scalar bisection only.
std::optional<Incumbent> scale_and_verify(const Instance& inst,
                                          const SelectionVector& x_sel,
                                          const Beamformer& w_raw) {
  const int B = inst.B(), M = inst.M(), K = inst.K();
  const Real noise = inst.noise_w();
  const Real pbar = inst.params.power_budget_w;
  const Real cbar = inst.params.backhaul_cap;
  const Real gamma0 = inst.params.sinr_target;

  Beamformer w = soc_rotate(inst, w_raw);
  VecX sig(K), interf(K);
  for (int k = 0; k < K; ++k) {
    const auto hk = inst.channels.h.row(k);
    sig[k] = std::norm(Complex(hk * w.col(k)));
    interf[k] = 0.0;
    for (int j = 0; j < K; ++j)
      if (j != k) interf[k] += std::norm(Complex(hk * w.col(j)));
  }

  // Feasible range of t^2: SINR targets from below, per-BS power from above.
  Real t2_lo = 0.0, t2_hi = std::numeric_limits<Real>::infinity();
  for (int k = 0; k < K; ++k) {
    Real denom = sig[k] - gamma0 * interf[k];
    if (!(denom > 0)) return std::nullopt;
    t2_lo = std::max(t2_lo, gamma0 * noise / denom);
  }
  for (int b = 0; b < B; ++b) {
    Real used = 0.0;
    for (int k = 0; k < K; ++k) used += w.col(k).segment(b * M, M).squaredNorm();
    if (used > 0) t2_hi = std::min(t2_hi, pbar / used);
  }
  if (!std::isfinite(t2_hi)) t2_hi = std::max<Real>(1.0, t2_lo);
  if (t2_lo > t2_hi) return std::nullopt;

  auto backhaul_fits = [&](Real t2) {
    for (int b = 0; b < B; ++b) {
      Real used = 0.0;
      for (int k = 0; k < K; ++k) {
        if (!x_sel[link_index(b, k, K)]) continue;
        used += std::log1p(t2 * sig[k] / (t2 * interf[k] + noise));
      }
      if (used > cbar) return false;
    }
    return true;
  };

  Real t2 = t2_hi;
  if (!backhaul_fits(t2)) {
    if (!backhaul_fits(t2_lo)) return std::nullopt;
    Real lo = t2_lo, hi = t2_hi;
    for (int step = 0; step < 80; ++step) {
      Real mid = 0.5 * (lo + hi);
      (backhaul_fits(mid) ? lo : hi) = mid;
    }
    t2 = lo;
  }

  w *= std::sqrt(t2);
  RateVector r = all_rates(inst, w);
  for (int b = 0; b < B; ++b)
    if (backhaul_usage(x_sel, r, b) > cbar * (1.0 + kBackhaulSlack))
      return std::nullopt;
  SoftPower u = SoftPower::Zero(B * K);
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      const int l = link_index(b, k, K);
      if (x_sel[l]) u[l] = w.col(k).segment(b * M, M).squaredNorm();
    }
  Incumbent inc{w, x_sel, u, r, r.sum()};
  if (!check_feasible(inst, w, x_sel, u).feasible()) return std::nullopt;
  return inc;
}

}  // namespace

std::optional<Incumbent> incumbent_from_witness(const Instance& inst,
                                                const SelectionVector& x_sel,
                                                const Beamformer& w_raw) {
  auto direct = scale_and_verify(inst, x_sel, w_raw);
  auto polished =
      scale_and_verify(inst, x_sel, ascend_sum_rate(inst, x_sel, w_raw));
  if (direct && polished)
    return polished->objective > direct->objective ? polished : direct;
  return direct ? direct : polished;
}

const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::Converged: return "converged";
    case TerminationReason::Exhausted: return "tree-exhausted";
    case TerminationReason::IterationLimit: return "iteration-limit";
    case TerminationReason::Infeasible: return "infeasible";
  }
  return "unknown";
}

int select_box_index(const std::vector<Node>& nodes) {
  if (nodes.empty())
    throw std::invalid_argument("select_box: empty node set");
  int best = 0;
  for (int i = 1; i < static_cast<int>(nodes.size()); ++i) {
    const Node& a = nodes[i];
    const Node& b = nodes[best];
    if (a.upper > b.upper ||
        (a.upper == b.upper &&
         (a.created_iter < b.created_iter ||
          (a.created_iter == b.created_iter && a.seq < b.seq))))
      best = i;
  }
  return best;
}

std::pair<Box, Box> branch(const Box& box) {
  const int n = box.dim();
  int j = -1;
  Real best = 0.0;
  for (int i = 0; i < n; ++i) {
    Real len = box.hi[i] - box.lo[i];
    if (len > best) {
      best = len;
      j = i;
    }
  }
  const Real atom_width = 1e-12 * std::max<Real>(1.0, box.hi.cwiseAbs().maxCoeff());
  if (j < 0 || (j >= box.num_bool && best <= atom_width))
    throw AtomBoxError("box has no edge left to split");

  Box left = box, right = box;
  if (j < box.num_bool) {
    left.hi[j] = 0.0;
    right.lo[j] = 1.0;
  } else {
    Real mid = 0.5 * (box.lo[j] + box.hi[j]);
    left.hi[j] = mid;
    right.lo[j] = mid;
  }
  return {left, right};
}

bool point_in_S(const Instance& inst, const SelectionVector& x, const VecX& z,
                SolveStats* stats) {
  if (!connectivity_ok(x, inst.B(), inst.K())) return false;
  if (!backhaul_ok(x, z, inst)) return false;
  return socp_feasible(x, z, inst, stats, 1e-8);
}

std::optional<Box> reduce(const Box& box, Real cbo, const Instance& inst,
                          SolveStats* stats) {
  const int B = inst.B(), K = inst.K();
  const int BK = box.num_bool;
  VecX p = box.lo, q = box.hi;

  // Objective cut: f is linear, so the lower corner can be raised exactly.
  const Real qsum = q.tail(K).sum();
  for (int k = 0; k < K; ++k) {
    p[BK + k] = std::max(p[BK + k], cbo - (qsum - q[BK + k]));
    if (p[BK + k] > q[BK + k]) return std::nullopt;
  }

  SelectionVector q_bool(BK), p_bool(BK);
  for (int l = 0; l < BK; ++l) {
    q_bool[l] = static_cast<int>(q[l]);
    p_bool[l] = static_cast<int>(p[l]);
  }
  VecX z_lo = p.tail(K);

  // Feasibility probes at the most permissive settings per constraint:
  // connectivity and the beamforming subproblem at the largest selection,
  // backhaul at the smallest.  A failure rules out every point of the face.
  std::unordered_map<std::uint64_t, bool> socp_cache;
  auto socp_at = [&](const SelectionVector& x) {
    const std::uint64_t key = selection_bits(x);
    auto it = socp_cache.find(key);
    if (it != socp_cache.end()) return it->second;
    bool ok = socp_feasible(x, z_lo, inst, stats, 1e-7);
    socp_cache.emplace(key, ok);
    return ok;
  };

  if (!connectivity_ok(q_bool, B, K)) return std::nullopt;
  if (!backhaul_ok(p_bool, z_lo, inst)) return std::nullopt;
  bool box_socp_known = true;
  bool box_socp_ok = true;
  try {
    box_socp_ok = socp_at(q_bool);
  } catch (const SolverError&) {
    box_socp_known = false;
  }
  if (box_socp_known && !box_socp_ok) return std::nullopt;

  // Boolean shortcut per unfixed dimension.
  for (int l = 0; l < BK; ++l) {
    if (p_bool[l] == q_bool[l]) continue;
    bool face0_ok = true;
    q_bool[l] = 0;
    if (!connectivity_ok(q_bool, B, K)) {
      face0_ok = false;
    } else {
      try {
        face0_ok = socp_at(q_bool);
      } catch (const SolverError&) {
        face0_ok = true;  // probe failed: leave the dim unreduced
      }
    }
    q_bool[l] = 1;
    if (!face0_ok) {
      p[l] = 1.0;
      p_bool[l] = 1;
      if (!backhaul_ok(p_bool, z_lo, inst)) return std::nullopt;
      continue;
    }
    // x_l = 1 face: only the backhaul side can newly fail here.
    p_bool[l] = 1;
    bool face1_ok = backhaul_ok(p_bool, z_lo, inst);
    p_bool[l] = 0;
    if (!face1_ok) {
      q[l] = 0.0;
      q_bool[l] = 0;
      if (!connectivity_ok(q_bool, B, K)) return std::nullopt;
      if (box_socp_known) {
        try {
          if (!socp_at(q_bool)) return std::nullopt;
        } catch (const SolverError&) {
          box_socp_known = false;
        }
      }
    }
  }

  // Continuous upper bounds via bisection on the box membership probe.
  auto probe_z = [&](const VecX& z) -> bool {
    if (!backhaul_ok(p_bool, z, inst)) return false;
    return socp_feasible(q_bool, z, inst, stats, 1e-7);
  };
  for (int k = 0; k < K; ++k) {
    const Real lo = p[BK + k], hi = q[BK + k];
    const Real edge = hi - lo;
    if (edge <= 1e-12) continue;
    VecX ztest = z_lo;
    ztest[k] = hi;
    bool hi_ok;
    try {
      hi_ok = probe_z(ztest);
    } catch (const SolverError&) {
      continue;  // leave the dim unreduced
    }
    if (hi_ok) continue;
    Real beta_lo = 0.0, beta_hi = 1.0;
    bool aborted = false;
    for (int step = 0; step < 20 && (beta_hi - beta_lo) > 1e-3; ++step) {
      const Real mid = 0.5 * (beta_lo + beta_hi);
      ztest[k] = lo + mid * edge;
      bool ok;
      try {
        ok = probe_z(ztest);
      } catch (const SolverError&) {
        aborted = true;
        break;
      }
      (ok ? beta_lo : beta_hi) = mid;
    }
    if (!aborted) q[BK + k] = lo + beta_hi * edge;
  }

  Box out{p, q, BK};
  return out;
}

std::optional<Incumbent> binary_search_feasible(const SoftPower& u_star,
                                                const Box& box,
                                                const Instance& inst,
                                                SolveStats* stats,
                                                std::vector<int>* probe_log) {
  const int B = inst.B(), K = inst.K();
  const int BK = B * K;
  const VecX z_lo = box.cont_lo();
  std::optional<Incumbent> best;

  auto probe_selection = [&](const SelectionVector& x_sel) -> bool {
    if (!connectivity_ok(x_sel, B, K)) return false;
    ConeProgram prog =
        build_feasibility_program(x_sel, z_lo, inst, FeasObjective::MinPower);
    if (stats) stats->feas_solves++;
    ConeSolution sol = solve(prog, SolverOptions{1e-8, 100});
    if (sol.status != ConeSolution::Status::Optimal) return false;

    auto cand = incumbent_from_witness(inst, x_sel, prog.vars.beamformer(sol.x));
    if (cand && (!best || cand->objective > best->objective)) best = cand;
    return true;
  };
  auto probe = [&](int L) {
    if (probe_log) probe_log->push_back(L);
    return probe_selection(top_l_selection(u_star, L));
  };

  int l_min = K, l_max = BK;
  if (l_min >= l_max) {
    probe(l_max);  // single-BS layout: all links is the only connected choice
    return best;
  }
  bool probed_k = false, probed_all = false;
  while (l_min < l_max) {
    const int L = (l_min + l_max) / 2;
    probed_k = probed_k || (L == K);
    probed_all = probed_all || (L == BK);
    if (probe(L))
      l_min = L + 1;
    else
      l_max = L - 1;
  }
  // The bisection can end without visiting either endpoint; both matter.
  // L = K is the most backhaul-friendly thresholding, L = BK the most
  // power-friendly, and the binding regime is not known up front.
  if (!probed_all) probe(BK);
  if (!probed_k) {
    SelectionVector sparse = top_l_selection(u_star, K);
    if (!connectivity_ok(sparse, B, K)) {
      sparse = SelectionVector::Zero(BK);
      for (int k = 0; k < K; ++k) {
        int arg = 0;
        Real bestu = -kInf;
        for (int b = 0; b < B; ++b) {
          const int l = link_index(b, k, K);
          if (u_star[l] > bestu) {
            bestu = u_star[l];
            arg = l;
          }
        }
        sparse[arg] = 1;
      }
    }
    probe_selection(sparse);
  }
  return best;
}

BoundResult bound(const Box& box, Real cbo, const Instance& inst,
                  SolveStats* stats) {
  ConeProgram prog = build_bound_program(box, inst, cbo);
  if (stats) stats->bound_solves++;
  ConeSolution sol = solve(prog, SolverOptions{1e-8, 100});
  const Real f_vertex = box.vertex_upper();

  if (sol.status == ConeSolution::Status::Infeasible) return {true, -kInf, {}};
  if (sol.status != ConeSolution::Status::Optimal)
    return {false, f_vertex, {}};  // vertex bound always valid

  // Certified side of the relaxation, padded against solver slack, never
  // above the exact vertex bound.
  Real ub = -sol.dual_objective;
  ub += 1e-7 * std::max<Real>(1.0, std::abs(ub));
  ub = std::min(ub, f_vertex);

  SoftPower u_star = prog.vars.soft_power(sol.x);
  auto inc = binary_search_feasible(u_star, box, inst, stats);
  return {false, ub, inc};
}

SolveResult solve_dbrb(const Instance& inst, const DbrbOptions& opts) {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  };

  SolveResult res;
  SolveStats stats;
  const int K = inst.K();

  auto finish = [&](TerminationReason reason, Real ub, Real lb,
                    std::optional<Incumbent> inc, long long iters) {
    res.reason = reason;
    res.upper_bound = ub;
    res.lower_bound = lb;
    res.incumbent = std::move(inc);
    res.iterations = iters;
    res.bound_solves = stats.bound_solves;
    res.feasibility_solves = stats.feas_solves;
    res.wall_ms = elapsed_ms();
    return res;
  };

  Real theta = K * std::log1p(inst.params.sinr_target);
  std::optional<Incumbent> incumbent;
  if (opts.warm_incumbent &&
      check_feasible(inst, opts.warm_incumbent->w, opts.warm_incumbent->x,
                     opts.warm_incumbent->u)
          .feasible() &&
      opts.warm_incumbent->objective > theta) {
    incumbent = opts.warm_incumbent;
    theta = incumbent->objective;
  }

  auto root_box = compute_root_box(inst);
  if (!root_box) return finish(TerminationReason::Infeasible, -kInf, -kInf, {}, 0);

  std::vector<Node> nodes;
  long long seq = 0;
  Real ub_report = kInf;

  auto emit_trace = [&](long long iter) {
    Real live_max = -kInf;
    for (const auto& nd : nodes) live_max = std::max(live_max, nd.upper);
    Real cand = nodes.empty() ? theta : std::max(live_max, theta);
    ub_report = std::min(ub_report, cand);
    TraceRow row{iter,
                 ub_report,
                 theta,
                 static_cast<long long>(nodes.size()),
                 stats.bound_solves,
                 stats.feas_solves,
                 elapsed_ms()};
    res.trace.push_back(row);
    if (opts.trace_sink) opts.trace_sink(row);
  };

  auto absorb = [&](const Box& rbox, const BoundResult& br, Real parent_ub,
                    long long iter) {
    if (br.incumbent && br.incumbent->objective > theta) {
      theta = br.incumbent->objective;
      incumbent = br.incumbent;
    }
    Real ub = std::min(br.upper, parent_ub);
    if (ub >= theta) {
      std::optional<Real> local;
      if (br.incumbent) {
        // Record the local value only when the found point lies in the box.
        VecX s(rbox.dim());
        for (int l = 0; l < rbox.num_bool; ++l) s[l] = br.incumbent->x[l];
        s.tail(rbox.num_cont()) = br.incumbent->rates;
        if (rbox.contains(s)) local = std::min(br.incumbent->objective, ub);
      }
      nodes.push_back({rbox, ub, local, iter, seq++});
    }
  };

  // Initialization reduces the root box but computes no relaxation for it;
  // its vertex value is a valid bound and the first real bounds appear with
  // the first branching step.
  {
    auto r0 = reduce(*root_box, theta, inst, &stats);
    if (r0 && r0->vertex_upper() >= theta)
      nodes.push_back({*r0, r0->vertex_upper(), std::nullopt, 0, seq++});
  }
  if (nodes.empty() && !incumbent) {
    emit_trace(0);
    return finish(TerminationReason::Infeasible, -kInf, -kInf, {}, 0);
  }
  emit_trace(0);

  long long iter = 1;
  TerminationReason reason = TerminationReason::IterationLimit;
  while (true) {
    if (nodes.empty() && !incumbent) {
      // Every box was certified to hold nothing at or above the floor cbo,
      // which covers the whole feasible set.
      return finish(TerminationReason::Infeasible, -kInf, -kInf, {}, iter - 1);
    }
    const Real gap = ub_report - theta;
    if (gap <= opts.epsilon_abs ||
        gap / std::max<Real>(1.0, std::abs(ub_report)) <= opts.epsilon_rel) {
      reason = TerminationReason::Converged;
      break;
    }
    if (nodes.empty()) {
      reason = TerminationReason::Exhausted;
      break;
    }
    if (iter > opts.max_iterations) {
      reason = TerminationReason::IterationLimit;
      break;
    }

    const int sel = select_box_index(nodes);
    Node current = nodes[sel];
    nodes.erase(nodes.begin() + sel);

    try {
      auto [left, right] = branch(current.box);
      for (const Box& child : {left, right}) {
        auto rc = reduce(child, theta, inst, &stats);
        if (!rc) continue;
        auto bc = bound(*rc, theta, inst, &stats);
        if (bc.pruned) continue;
        absorb(*rc, bc, current.upper, iter);
      }
    } catch (const AtomBoxError&) {
      // Fully resolved box; whatever it contained is captured by theta.
    }

    std::erase_if(nodes, [&](const Node& nd) { return nd.upper < theta; });
    emit_trace(iter);
    ++iter;
  }

  return finish(reason, ub_report, theta, incumbent, iter - 1);
}

}  // namespace combeam
