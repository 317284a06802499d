// SPDX-License-Identifier: Apache-2.0
#include "combeam/oracle.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <unordered_map>

#include "combeam/cone_solver.hpp"
#include "combeam/scenario.hpp"
#include "combeam/socp_builders.hpp"

namespace combeam {
namespace {

constexpr Real kInf = std::numeric_limits<Real>::infinity();

struct GridSearch {
  const Instance& inst;
  SelectionVector x;
  std::vector<int> sizes;          // grid points per dimension
  std::vector<Real> z_lo;
  Real delta;
  long long* solves;
  // Exact-key memo of subproblem verdicts plus monotone dominance fronts:
  // feasibility is downward closed on the grid.
  std::unordered_map<std::uint64_t, bool>* memo;
  std::uint64_t xbits = 0;
  std::vector<std::array<int, 3>> known_feasible;
  std::vector<std::array<int, 3>> known_infeasible;

  Real z_at(int dim, int idx) const { return z_lo[dim] + delta * idx; }

  std::uint64_t key(const std::array<int, 3>& idx) const {
    std::uint64_t k = xbits;
    for (int d = 0; d < 3; ++d) k = k * 20011 + static_cast<std::uint64_t>(idx[d] + 1);
    return k;
  }

  bool backhaul_ok(const std::array<int, 3>& idx) const {
    const int B = inst.B(), K = inst.K();
    const Real cap = inst.params.backhaul_cap * (1.0 + 1e-9);
    for (int b = 0; b < B; ++b) {
      Real used = 0.0;
      for (int k = 0; k < K; ++k)
        used += x[link_index(b, k, K)] * z_at(k, idx[k]);
      if (used > cap) return false;
    }
    return true;
  }

  bool feasible(const std::array<int, 3>& idx) {
    if (!backhaul_ok(idx)) return false;
    for (const auto& f : known_feasible) {
      bool dom = true;
      for (int d = 0; d < static_cast<int>(sizes.size()); ++d)
        if (idx[d] > f[d]) { dom = false; break; }
      if (dom) return true;
    }
    for (const auto& g : known_infeasible) {
      bool dom = true;
      for (int d = 0; d < static_cast<int>(sizes.size()); ++d)
        if (idx[d] < g[d]) { dom = false; break; }
      if (dom) return false;
    }
    const std::uint64_t k = key(idx);
    auto it = memo->find(k);
    bool ok;
    if (it != memo->end()) {
      ok = it->second;
    } else {
      VecX z(inst.K());
      for (int d = 0; d < inst.K(); ++d) z[d] = z_at(d, idx[d]);
      ConeProgram prog = build_feasibility_program(x, z, inst);
      ++(*solves);
      ConeSolution sol = solve(prog, SolverOptions{1e-8, 100});
      if (sol.status == ConeSolution::Status::Optimal) {
        ok = true;
      } else if (sol.status == ConeSolution::Status::Infeasible) {
        ok = false;
      } else {
        char msg[256];
        std::snprintf(msg, sizeof msg,
                      "oracle feasibility probe failed numerically at xbits=%llu "
                      "z=(%.17g, %.17g, %.17g)",
                      static_cast<unsigned long long>(xbits), z[0],
                      inst.K() > 1 ? z[1] : 0.0, inst.K() > 2 ? z[2] : 0.0);
        throw SolverError(msg);
      }
      memo->emplace(k, ok);
    }
    (ok ? known_feasible : known_infeasible).push_back(idx);
    return ok;
  }
};

}  // namespace

OracleResult enumerate_optimal(const Instance& inst, Real grid_step) {
  const int B = inst.B(), K = inst.K();
  const int BK = B * K;
  if (BK > 8 || K > 3)
    throw std::invalid_argument(
        "enumerate_optimal: instance exceeds the cost guard (BK <= 8, K <= 3)");
  if (!(grid_step > 0))
    throw std::invalid_argument("enumerate_optimal: grid step must be > 0");

  OracleResult res;
  res.grid_step = grid_step;
  auto root = compute_root_box(inst);
  if (!root) return res;  // SINR target unreachable: infeasible

  std::vector<int> sizes(K);
  std::vector<Real> z_lo(K), z_hi(K);
  for (int k = 0; k < K; ++k) {
    z_lo[k] = root->lo[BK + k];
    z_hi[k] = root->hi[BK + k];
    sizes[k] = static_cast<int>(std::floor((z_hi[k] - z_lo[k]) / grid_step + 1e-12)) + 1;
  }

  Real best = -kInf;
  SelectionVector best_x;
  VecX best_z;
  std::unordered_map<std::uint64_t, bool> memo;

  for (std::uint32_t bits = 0; bits < (1u << BK); ++bits) {
    SelectionVector x(BK);
    for (int l = 0; l < BK; ++l) x[l] = (bits >> l) & 1;
    bool connected = true;
    for (int k = 0; k < K && connected; ++k) {
      int served = 0;
      for (int b = 0; b < B; ++b) served += x[link_index(b, k, K)];
      connected = served >= 1;
    }
    if (!connected) continue;

    GridSearch gs{inst,  x,     sizes, z_lo, grid_step, &res.feasibility_solves,
                  &memo,  bits,  {},    {}};

    std::array<int, 3> idx{0, 0, 0};
    std::function<void(int, Real)> descend = [&](int d, Real partial) {
      Real slack_above = 0.0;
      for (int j = d; j < K; ++j) slack_above += gs.z_at(j, sizes[j] - 1);
      if (partial + slack_above <= best + 1e-12) return;
      if (d == K - 1) {
        int lo = 0, hi = sizes[d] - 1, found = -1;
        while (lo <= hi) {
          int mid = (lo + hi) / 2;
          idx[d] = mid;
          if (gs.feasible(idx)) {
            found = mid;
            lo = mid + 1;
          } else {
            hi = mid - 1;
          }
        }
        if (found >= 0) {
          Real value = partial + gs.z_at(d, found);
          if (value > best) {
            best = value;
            best_x = x;
            best_z.resize(K);
            for (int j = 0; j < K - 1; ++j) best_z[j] = gs.z_at(j, idx[j]);
            best_z[K - 1] = gs.z_at(d, found);
          }
        }
        return;
      }
      for (int i = sizes[d] - 1; i >= 0; --i) {
        idx[d] = i;
        descend(d + 1, partial + gs.z_at(d, i));
      }
    };
    descend(0, 0.0);
  }

  if (best > -kInf) {
    res.feasible = true;
    res.objective = best;
    res.best_x = best_x;
    res.best_z = best_z;
  }
  return res;
}

OracleComparison oracle_vs_dbrb(const Instance& inst, Real grid_step,
                                Real eps_abs, long long max_iterations) {
  OracleComparison cmp;
  OracleResult oracle = enumerate_optimal(inst, grid_step);

  DbrbOptions opts;
  opts.epsilon_abs = eps_abs;
  opts.epsilon_rel = 0.0;
  opts.max_iterations = max_iterations;
  SolveResult dbrb = solve_dbrb(inst, opts);

  cmp.oracle_feasible = oracle.feasible;
  cmp.dbrb_feasible = dbrb.reason != TerminationReason::Infeasible;
  cmp.oracle_objective = oracle.objective;
  cmp.dbrb_lower = dbrb.lower_bound;
  cmp.dbrb_upper = dbrb.upper_bound;
  cmp.lb_tolerance = inst.K() * grid_step + eps_abs;

  if (!oracle.feasible || !cmp.dbrb_feasible) {
    cmp.pass = (oracle.feasible == cmp.dbrb_feasible);
    cmp.detail = cmp.pass ? "both infeasible" : "feasibility verdicts diverge";
  } else {
    const bool lb_ok =
        std::abs(dbrb.lower_bound - oracle.objective) <= cmp.lb_tolerance;
    const bool ub_ok = dbrb.upper_bound >= oracle.objective - 1e-6;
    cmp.pass = lb_ok && ub_ok;
    cmp.detail = cmp.pass          ? "bounds agree"
                 : (!lb_ok && !ub_ok) ? "lower and upper bounds diverge"
                 : !lb_ok            ? "lower bound diverges"
                                     : "upper bound diverges";
  }

  nlohmann::json j;
  j["pass"] = cmp.pass;
  j["detail"] = cmp.detail;
  j["oracle"] = {{"feasible", oracle.feasible},
                 {"objective_nats_per_use", oracle.objective},
                 {"grid_step", oracle.grid_step},
                 {"feasibility_solves", oracle.feasibility_solves}};
  j["dbrb"] = {{"feasible", cmp.dbrb_feasible},
               {"lower_bound", dbrb.lower_bound},
               {"upper_bound", dbrb.upper_bound},
               {"iterations", dbrb.iterations},
               {"termination", to_string(dbrb.reason)}};
  j["lb_tolerance"] = cmp.lb_tolerance;
  if (!cmp.pass) {
    j["instance"] = scenario_to_json(inst.params, inst.channels);
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& row : dbrb.trace)
      trace.push_back({{"iter", row.iter}, {"ub", row.ub}, {"lb", row.lb}});
    j["dbrb_trace"] = trace;
    if (oracle.feasible) {
      j["oracle_best_x"] =
          std::vector<int>(oracle.best_x.data(), oracle.best_x.data() + oracle.best_x.size());
      j["oracle_best_z"] =
          std::vector<Real>(oracle.best_z.data(), oracle.best_z.data() + oracle.best_z.size());
    }
  }
  cmp.report = std::move(j);
  return cmp;
}

}  // namespace combeam
