// SPDX-License-Identifier: Apache-2.0
// Acceptance suite: one checked criterion per section, one PASS/FAIL line
// each.  Run with no arguments for the full suite or with a criterion number
// (1-9) for a single one.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "combeam/cone_solver.hpp"
#include "combeam/experiments.hpp"
#include "combeam/oracle.hpp"
#include "combeam/rng.hpp"
#include "combeam/socp_builders.hpp"
#include "support/conformance_cases.hpp"

using namespace combeam;

namespace {

Instance desk_instance(int B, int M, int K, std::uint64_t seed, Real backhaul,
                       Real sinr_target = 1.0) {
  SystemParams p;
  p.num_bs = B;
  p.antennas_per_bs = M;
  p.num_users = K;
  p.backhaul_cap = backhaul;
  p.sinr_target = sinr_target;
  return make_instance(p, seed);
}

SolveResult desk_solve(const Instance& inst, Real eps_abs, Real eps_rel,
                       long long max_iter) {
  DbrbOptions opts;
  opts.epsilon_abs = eps_abs;
  opts.epsilon_rel = eps_rel;
  opts.max_iterations = max_iter;
  return solve_dbrb(inst, opts);
}

// --- criterion 1: oracle equivalence at desk scale ------------------------
bool criterion_oracle_equivalence(std::string& detail) {
  int pass_count = 0, total = 0;
  double worst_wall_s = 0.0;
  std::ostringstream note;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (Real cap : {5.0, 20.0}) {
      ++total;
      auto t0 = std::chrono::steady_clock::now();
      Instance inst = desk_instance(2, 2, 2, seed, cap);
      auto cmp = oracle_vs_dbrb(inst, 0.05, 1e-2, 3000);
      double wall_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      worst_wall_s = std::max(worst_wall_s, wall_s);
      bool in_budget = wall_s < 300.0;
      if (cmp.pass && in_budget) {
        ++pass_count;
      } else {
        note << " [seed " << seed << " cap " << cap << ": " << cmp.detail
             << (in_budget ? "" : ", over budget") << "]";
      }
    }
  }
  std::ostringstream d;
  d << pass_count << "/" << total << " instances agree, worst wall "
    << std::fixed << worst_wall_s << " s" << note.str();
  detail = d.str();
  return pass_count == total;
}

// --- criterion 2: convergence shape --------------------------------------
bool criterion_convergence_shape(std::string& detail) {
  int good = 0;
  std::ostringstream note;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Instance inst = desk_instance(3, 2, 3, seed, 20.0);
    auto res = desk_solve(inst, 1e-4, 1e-3, 5000);
    bool converged = res.reason == TerminationReason::Converged;
    bool fast_drop = false;
    if (!res.trace.empty()) {
      Real g0 = res.trace.front().ub - res.trace.front().lb;
      long long budget = static_cast<long long>(
          std::ceil(0.25 * static_cast<double>(res.iterations)));
      for (const auto& row : res.trace) {
        if (row.ub - row.lb <= 0.1 * g0) {
          fast_drop = row.iter <= budget;
          break;
        }
      }
    }
    if (converged && fast_drop) {
      ++good;
    } else {
      note << " [seed " << seed << (converged ? "" : ": no convergence")
           << (fast_drop ? "" : ": slow initial drop") << "]";
    }
  }
  std::ostringstream d;
  d << good << "/10 seeds converge with the early gap collapse" << note.str();
  detail = d.str();
  return good >= 9;
}

// --- criterion 3: bound monotonicity --------------------------------------
bool criterion_bound_monotonicity(std::string& detail) {
  struct Case {
    Instance inst;
    Real eps_abs, eps_rel;
  };
  std::vector<Case> cases;
  cases.push_back({desk_instance(2, 2, 2, 1, 5.0), 1e-2, 0.0});
  cases.push_back({desk_instance(2, 2, 2, 2, 20.0), 1e-2, 0.0});
  cases.push_back({desk_instance(3, 2, 3, 3, 20.0), 1e-4, 1e-3});
  long long rows = 0;
  for (const auto& c : cases) {
    auto res = desk_solve(c.inst, c.eps_abs, c.eps_rel, 5000);
    for (std::size_t i = 0; i < res.trace.size(); ++i) {
      ++rows;
      if (i > 0 && res.trace[i].ub > res.trace[i - 1].ub) {
        detail = "upper bound increased at iteration " +
                 std::to_string(res.trace[i].iter);
        return false;
      }
      if (i > 0 && res.trace[i].lb < res.trace[i - 1].lb) {
        detail = "lower bound decreased at iteration " +
                 std::to_string(res.trace[i].iter);
        return false;
      }
      if (res.trace[i].lb > res.trace[i].ub + 1e-9) {
        detail = "lb exceeded ub at iteration " + std::to_string(res.trace[i].iter);
        return false;
      }
    }
  }
  detail = std::to_string(rows) + " trace rows over 3 runs, all monotone";
  return true;
}

// --- criterion 4: feasibility of outputs ----------------------------------
bool criterion_output_feasibility(std::string& detail) {
  int incumbents = 0;
  for (std::uint64_t seed : {1, 2, 3, 4}) {
    for (Real cap : {5.0, 20.0}) {
      Instance inst = desk_instance(2, 2, 2, seed, cap);
      auto res = desk_solve(inst, 1e-2, 0.0, 3000);
      if (!res.incumbent) continue;
      ++incumbents;
      const auto& inc = *res.incumbent;
      auto report = check_feasible(inst, inc.w, inc.x, inc.u, 1e-6);
      if (!report.feasible()) {
        detail = "incumbent fails check_feasible (seed " + std::to_string(seed) + ")";
        return false;
      }
      for (int b = 0; b < inst.B(); ++b) {
        if (backhaul_usage(inc.x, inc.rates, b) >
            inst.params.backhaul_cap * (1.0 + 1e-6)) {
          detail = "backhaul recheck failed (seed " + std::to_string(seed) + ")";
          return false;
        }
      }
      if (std::abs(inc.objective - inc.rates.sum()) > 1e-9) {
        detail = "objective drifts from the achieved rates";
        return false;
      }
    }
  }
  detail = std::to_string(incumbents) + " incumbents verified at 1e-6";
  return incumbents > 0;
}

// --- criterion 5 and 8 share one sweep ------------------------------------
ExperimentConfig sweep_config(const std::string& out_dir) {
  nlohmann::json j{{"mode", "sweep"},
                   {"num_bs", 2},
                   {"antennas_per_bs", 2},
                   {"num_users", 2},
                   {"backhaul_sweep_mnats_per_s", {50.0, 100.0, 150.0, 200.0, 250.0}},
                   {"seeds", {1, 2, 3}},
                   {"epsilon_abs", 1e-2},
                   {"epsilon_rel", 0.0},
                   {"max_iter", 3000}};
  auto cfg = config_from_json(j);
  cfg.out_dir = out_dir;
  return cfg;
}

struct SweepRow {
  Real cap = 0.0;
  std::uint64_t seed = 0;
  Real opt = 0.0, heur = 0.0, ratio = 0.0;
  std::string status;
};

std::vector<SweepRow> run_and_parse_sweep(const std::string& tag, bool& ok) {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / ("combeam_acceptance_" + tag);
  fs::remove_all(dir);
  auto cfg = sweep_config(dir.string());
  ok = run_sweep(cfg) == kExitOk;
  std::vector<SweepRow> rows;
  std::ifstream in(dir / "sweep.csv");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("backhaul", 0) == 0) continue;
    SweepRow row;
    std::stringstream ss(line);
    std::string f;
    std::getline(ss, f, ',');
    row.cap = std::stod(f);
    std::getline(ss, f, ',');
    row.seed = std::stoull(f);
    std::getline(ss, f, ',');
    row.opt = std::stod(f);
    std::getline(ss, f, ',');
    row.heur = std::stod(f);
    std::getline(ss, f, ',');
    row.ratio = std::stod(f);
    std::getline(ss, f, ',');
    std::getline(ss, f, ',');
    std::getline(ss, f, ',');
    row.status = f;
    rows.push_back(row);
  }
  fs::remove_all(dir);
  return rows;
}

bool criterion_backhaul_monotonicity(std::string& detail) {
  bool ok = false;
  auto rows = run_and_parse_sweep("c5", ok);
  if (!ok || rows.empty()) {
    detail = "sweep did not complete";
    return false;
  }
  std::map<std::uint64_t, std::vector<SweepRow>> by_seed;
  for (const auto& row : rows) {
    if (row.status != "ok") {
      detail = "cell (" + std::to_string(row.seed) + ", " +
               std::to_string(row.cap) + ") status " + row.status;
      return false;
    }
    by_seed[row.seed].push_back(row);
  }
  for (auto& [seed, list] : by_seed) {
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].opt < list[i - 1].opt - 1e-2) {  // eps_abs of the runs
        detail = "optimum decreased in capacity for seed " + std::to_string(seed);
        return false;
      }
    }
  }
  detail = std::to_string(rows.size()) + " cells, per-seed optima nondecreasing";
  return true;
}

bool criterion_heuristic_ratio(std::string& detail) {
  bool ok = false;
  auto rows = run_and_parse_sweep("c8", ok);
  if (!ok || rows.empty()) {
    detail = "sweep did not complete";
    return false;
  }
  Real lo = 2.0, hi = 0.0, sum = 0.0;
  int n = 0;
  for (const auto& row : rows) {
    if (row.status != "ok") continue;
    if (!(row.ratio > 0.0) || row.ratio > 1.0 + 1e-9) {
      detail = "ratio " + std::to_string(row.ratio) + " outside (0, 1]";
      return false;
    }
    lo = std::min(lo, row.ratio);
    hi = std::max(hi, row.ratio);
    sum += row.ratio;
    ++n;
  }
  std::ostringstream d;
  d << n << " cells, heuristic/optimal in [" << std::setprecision(4) << lo
    << ", " << hi << "], mean " << sum / n;
  detail = d.str();
  return n > 0;
}

// --- criterion 6: reduction safety ----------------------------------------
bool criterion_reduction_safety(std::string& detail) {
  long long certified_total = 0;
  for (auto [seed, cap] : std::vector<std::pair<std::uint64_t, Real>>{
           {1, 5.0}, {2, 20.0}}) {
    Instance inst = desk_instance(2, 2, 2, seed, cap);
    auto root = compute_root_box(inst);
    if (!root) {
      detail = "root box unexpectedly infeasible";
      return false;
    }
    auto res = desk_solve(inst, 1e-2, 0.0, 2000);
    if (!res.incumbent) {
      detail = "no incumbent to set the cbo";
      return false;
    }
    const int K = inst.K(), BK = inst.B() * inst.K();
    for (Real theta :
         {K * std::log(2.0), 0.9 * res.incumbent->objective}) {
      auto reduced = reduce(*root, theta, inst);
      Rng rng(1000 + seed);
      int kept = 0;
      for (int attempt = 0; attempt < 40000 && kept < 500; ++attempt) {
        SelectionVector x(BK);
        for (int l = 0; l < BK; ++l) x[l] = rng.uniform() < 0.6;
        VecX z(K);
        Real fsum = 0.0;
        for (int k = 0; k < K; ++k) {
          z[k] = root->lo[BK + k] +
                 rng.uniform() * (root->hi[BK + k] - root->lo[BK + k]);
          fsum += z[k];
        }
        if (fsum < theta) continue;
        bool member;
        try {
          member = point_in_S(inst, x, z);
        } catch (const SolverError&) {
          continue;
        }
        if (!member) continue;
        ++kept;
        ++certified_total;
        if (!reduced) {
          detail = "reduce dropped a certified point (empty result)";
          return false;
        }
        for (int l = 0; l < BK; ++l)
          if (x[l] < reduced->lo[l] - 1e-12 || x[l] > reduced->hi[l] + 1e-12) {
            detail = "certified point left the reduced Boolean range";
            return false;
          }
        for (int k = 0; k < K; ++k)
          if (z[k] < reduced->lo[BK + k] - 1e-9 ||
              z[k] > reduced->hi[BK + k] + 1e-9) {
            detail = "certified point left the reduced rate range";
            return false;
          }
      }
    }
  }
  detail = std::to_string(certified_total) + " certified points stayed inside";
  return certified_total >= 1000;
}

// --- criterion 7: envelope soundness ---------------------------------------
bool criterion_envelope_soundness(std::string& detail) {
  for (std::uint64_t seed : {1, 2}) {
    Instance inst = desk_instance(2, 2, 2, seed, 5.0);
    auto root = compute_root_box(inst);
    Rng rng(seed);
    const int BK = 4, K = 2;
    for (int trial = 0; trial < 5; ++trial) {
      Box box = *root;
      for (int l = 0; l < BK; ++l) {
        Real r = rng.uniform();
        if (r < 0.3) box.hi[l] = 0.0;
        else if (r < 0.6) box.lo[l] = 1.0;
      }
      for (int k = 0; k < K; ++k) {
        Real a = rng.uniform(), b = rng.uniform();
        if (a > b) std::swap(a, b);
        Real lo = box.lo[BK + k], hi = box.hi[BK + k];
        box.lo[BK + k] = lo + a * (hi - lo);
        box.hi[BK + k] = lo + b * (hi - lo);
      }
      for (int i = 0; i < 10000; ++i) {
        VecX x(BK), z(K);
        for (int l = 0; l < BK; ++l)
          x[l] = box.lo[l] + rng.uniform() * (box.hi[l] - box.lo[l]);
        for (int k = 0; k < K; ++k)
          z[k] = box.lo[BK + k] + rng.uniform() * (box.hi[BK + k] - box.lo[BK + k]);
        for (int b = 0; b < 2; ++b) {
          Real bilinear = 0.0;
          for (int k = 0; k < K; ++k) bilinear += x[b * K + k] * z[k];
          if (envelope_phi(x, z, box, b) > bilinear + 1e-12) {
            detail = "envelope exceeded the bilinear form";
            return false;
          }
        }
      }
      for (int corner = 0; corner < 4; ++corner) {
        VecX x(BK), z(K);
        for (int l = 0; l < BK; ++l) x[l] = (corner & 1) ? box.hi[l] : box.lo[l];
        for (int k = 0; k < K; ++k)
          z[k] = (corner & 2) ? box.hi[BK + k] : box.lo[BK + k];
        for (int b = 0; b < 2; ++b) {
          Real bilinear = 0.0;
          for (int k = 0; k < K; ++k) bilinear += x[b * K + k] * z[k];
          if (std::abs(envelope_phi(x, z, box, b) - bilinear) > 1e-9) {
            detail = "corner equality violated";
            return false;
          }
        }
      }
    }
  }
  detail = "100000 interior points and all corners over 10 boxes";
  return true;
}

// --- criterion 9: cone solver conformance ----------------------------------
bool criterion_solver_conformance(std::string& detail) {
  auto cases = combeam::testing::conformance_cases();
  int passed = 0;
  for (const auto& c : cases) {
    auto sol = solve(c.prog);
    bool good = sol.status == c.expected_status;
    if (good && c.expected_status == ConeSolution::Status::Optimal)
      good = std::abs(sol.objective - c.expected_objective) < 1e-6;
    if (!good) {
      detail = "case \"" + c.name + "\" returned " + to_string(sol.status);
      return false;
    }
    ++passed;
  }
  auto twice_a = solve(cases[1].prog);
  auto twice_b = solve(cases[1].prog);
  if (twice_a.objective != twice_b.objective) {
    detail = "determinism broken";
    return false;
  }
  detail = std::to_string(passed) + " analytic cases at 1e-6, deterministic";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "oracle equivalence", criterion_oracle_equivalence},
      {2, "convergence shape", criterion_convergence_shape},
      {3, "bound monotonicity", criterion_bound_monotonicity},
      {4, "feasibility of outputs", criterion_output_feasibility},
      {5, "backhaul monotonicity", criterion_backhaul_monotonicity},
      {6, "reduction safety", criterion_reduction_safety},
      {7, "envelope soundness", criterion_envelope_soundness},
      {8, "heuristic ratio", criterion_heuristic_ratio},
      {9, "solver conformance", criterion_solver_conformance},
  };

  int only = 0;
  if (argc > 1) only = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& c : criteria) {
    if (only != 0 && c.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", c.id,
                c.name, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
