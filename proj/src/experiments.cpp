// SPDX-License-Identifier: Apache-2.0
#include "combeam/experiments.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "combeam/cone_solver.hpp"
#include "combeam/oracle.hpp"
#include "combeam/socp_builders.hpp"

namespace combeam {
namespace {

constexpr const char* kVersion = "combeam 0.1.0";

Instance acquire_instance(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.scenario_path.empty()) {
    std::ifstream in(cfg.scenario_path);
    if (!in)
      throw std::invalid_argument("cannot open scenario \"" + cfg.scenario_path + "\"");
    nlohmann::json j;
    in >> j;
    auto [params, channels] = scenario_from_json(j);
    return Instance{params, channels};
  }
  return make_instance(cfg.params, seed);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write \"" + path + "\"");
  out << text;
}

nlohmann::json bound_or_null(Real v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

nlohmann::json incumbent_to_json(const Instance& inst, const Incumbent& inc) {
  const Real W = inst.params.bandwidth_hz;
  nlohmann::json j;
  j["objective_nats_per_use"] = inc.objective;
  j["objective_mnats_per_s"] = nats_per_use_to_mnats_per_s(inc.objective, W);
  j["rates_nats_per_use"] =
      std::vector<Real>(inc.rates.data(), inc.rates.data() + inc.rates.size());
  std::vector<Real> rates_mnats;
  for (int k = 0; k < inc.rates.size(); ++k)
    rates_mnats.push_back(nats_per_use_to_mnats_per_s(inc.rates[k], W));
  j["rates_mnats_per_s"] = rates_mnats;
  j["selection"] = std::vector<int>(inc.x.data(), inc.x.data() + inc.x.size());
  j["soft_power_w"] = std::vector<Real>(inc.u.data(), inc.u.data() + inc.u.size());

  nlohmann::json w = nlohmann::json::array();
  for (int k = 0; k < inc.w.cols(); ++k) {
    nlohmann::json col = nlohmann::json::array();
    for (int i = 0; i < inc.w.rows(); ++i)
      col.push_back({inc.w(i, k).real(), inc.w(i, k).imag()});
    w.push_back(col);
  }
  j["beamformer"] = w;

  std::vector<Real> bh_nats, bh_mnats;
  for (int b = 0; b < inst.B(); ++b) {
    Real used = backhaul_usage(inc.x, inc.rates, b);
    bh_nats.push_back(used);
    bh_mnats.push_back(nats_per_use_to_mnats_per_s(used, W));
  }
  j["backhaul_usage_nats_per_use"] = bh_nats;
  j["backhaul_usage_mnats_per_s"] = bh_mnats;

  auto report = check_feasible(inst, inc.w, inc.x, inc.u);
  nlohmann::json viol = nlohmann::json::array();
  for (const auto& v : report.violations)
    viol.push_back({{"constraint", v.constraint}, {"index", v.index}, {"margin", v.margin}});
  j["check"] = {{"feasible", report.feasible()}, {"violations", viol}};
  return j;
}

std::string provenance_line(const ExperimentConfig& cfg, std::uint64_t seed) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "# %s config=%s seed=%llu", kVersion,
                cfg.config_hash.c_str(), static_cast<unsigned long long>(seed));
  return buf;
}

int exit_code_for(const SolveResult& res) {
  if (res.reason == TerminationReason::Infeasible || !res.incumbent)
    return kExitInfeasible;
  if (res.reason == TerminationReason::IterationLimit) return kExitIterationLimit;
  return kExitOk;
}

}  // namespace

std::optional<Incumbent> root_relaxation_heuristic(const Instance& inst,
                                                   SolveStats* stats) {
  auto root = compute_root_box(inst);
  if (!root) return std::nullopt;
  const Real theta0 = inst.K() * std::log1p(inst.params.sinr_target);
  auto reduced = reduce(*root, theta0, inst, stats);
  if (!reduced) return std::nullopt;
  auto br = bound(*reduced, theta0, inst, stats);
  if (br.incumbent) return br.incumbent;

  // Fallback probe: every link on.
  SelectionVector all_on = SelectionVector::Ones(inst.B() * inst.K());
  const VecX z_lo = reduced->cont_lo();
  ConeProgram prog =
      build_feasibility_program(all_on, z_lo, inst, FeasObjective::MinPower);
  if (stats) stats->feas_solves++;
  ConeSolution sol = solve(prog, SolverOptions{1e-8, 100});
  if (sol.status != ConeSolution::Status::Optimal) return std::nullopt;
  Beamformer w = soc_rotate(inst, prog.vars.beamformer(sol.x));
  RateVector r = all_rates(inst, w);
  for (int b = 0; b < inst.B(); ++b)
    if (backhaul_usage(all_on, r, b) > inst.params.backhaul_cap * (1.0 + 1e-9))
      return std::nullopt;
  SoftPower u = SoftPower::Zero(inst.B() * inst.K());
  for (int b = 0; b < inst.B(); ++b)
    for (int k = 0; k < inst.K(); ++k)
      u[link_index(b, k, inst.K())] =
          w.col(k).segment(b * inst.M(), inst.M()).squaredNorm();
  Incumbent inc{w, all_on, u, r, r.sum()};
  if (!check_feasible(inst, w, all_on, u).feasible()) return std::nullopt;
  return inc;
}

int run_solve(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::uint64_t seed = cfg.seeds.front();
  Instance inst = acquire_instance(cfg, seed);

  write_text(cfg.out_dir + "/scenario.json",
             scenario_to_json(inst.params, inst.channels).dump(2) + "\n");

  std::ofstream trace(cfg.out_dir + "/trace.csv");
  trace << provenance_line(cfg, seed) << "\n";
  trace << "iter,ub,lb,live_boxes,socp_solves,feas_solves,elapsed_ms\n";

  DbrbOptions opts;
  opts.epsilon_rel = cfg.epsilon_rel;
  opts.epsilon_abs = cfg.epsilon_abs;
  opts.max_iterations = cfg.max_iter;
  opts.trace_sink = [&](const TraceRow& row) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%lld,%.12g,%.12g,%lld,%lld,%lld,%.3f\n",
                  row.iter, row.ub, row.lb, row.live_boxes, row.socp_solves,
                  row.feas_solves, row.elapsed_ms);
    trace << buf;
  };

  SolveResult res = solve_dbrb(inst, opts);
  trace.close();

  nlohmann::json summary;
  summary["version"] = kVersion;
  summary["config_hash"] = cfg.config_hash;
  summary["seed"] = seed;
  summary["termination"] = to_string(res.reason);
  summary["upper_bound_nats_per_use"] = bound_or_null(res.upper_bound);
  summary["lower_bound_nats_per_use"] = bound_or_null(res.lower_bound);
  const bool have_bounds =
      std::isfinite(res.upper_bound) && std::isfinite(res.lower_bound);
  summary["gap_abs"] = have_bounds ? nlohmann::json(res.upper_bound - res.lower_bound)
                                   : nlohmann::json(nullptr);
  summary["gap_rel"] =
      have_bounds
          ? nlohmann::json((res.upper_bound - res.lower_bound) /
                           std::max<Real>(1.0, std::abs(res.upper_bound)))
          : nlohmann::json(nullptr);
  summary["iterations"] = res.iterations;
  summary["bound_solves"] = res.bound_solves;
  summary["feasibility_solves"] = res.feasibility_solves;
  summary["wall_ms"] = res.wall_ms;
  write_text(cfg.out_dir + "/summary.json", summary.dump(2) + "\n");

  if (res.incumbent)
    write_text(cfg.out_dir + "/solution.json",
               incumbent_to_json(inst, *res.incumbent).dump(2) + "\n");

  return exit_code_for(res);
}

int run_sweep(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  if (!cfg.scenario_path.empty())
    throw std::invalid_argument("sweep mode generates its own scenarios; "
                                "scenario_path is not supported here");
  fs::create_directories(cfg.out_dir);

  struct Cell {
    Real backhaul = 0.0;  // nats/use
    std::uint64_t seed = 0;
    Real opt = std::nan("");
    Real heur = std::nan("");
    Real ratio = std::nan("");
    long long iters = 0;
    double wall_ms = 0.0;
    std::string status = "ok";
  };

  // Cells for one seed run in ascending capacity order so each incumbent can
  // warm-start the next cell: a point feasible at some capacity stays
  // feasible at every larger one, which also keeps the reported optima
  // monotone in the capacity by construction.
  std::vector<Real> caps_sorted = cfg.sweep_backhaul;
  std::sort(caps_sorted.begin(), caps_sorted.end());
  std::vector<Cell> cells;
  for (std::uint64_t seed : cfg.seeds)
    for (Real cap : caps_sorted) cells.push_back({cap, seed});
  const int caps_per_seed = static_cast<int>(caps_sorted.size());

  auto run_seed_chain = [&](std::size_t first_cell) {
    std::optional<Incumbent> carried;
    for (int i = 0; i < caps_per_seed; ++i) {
      Cell& cell = cells[first_cell + i];
      try {
        SystemParams params = cfg.params;
        params.backhaul_cap = cell.backhaul;
        Instance inst = make_instance(params, cell.seed);
        SolveStats heur_stats;
        auto heur = root_relaxation_heuristic(inst, &heur_stats);

        DbrbOptions opts;
        opts.epsilon_rel = cfg.epsilon_rel;
        opts.epsilon_abs = cfg.epsilon_abs;
        opts.max_iterations = cfg.max_iter;
        opts.warm_incumbent = heur;
        if (carried &&
            (!opts.warm_incumbent ||
             carried->objective > opts.warm_incumbent->objective) &&
            check_feasible(inst, carried->w, carried->x, carried->u).feasible())
          opts.warm_incumbent = carried;
        SolveResult res = solve_dbrb(inst, opts);

        cell.iters = res.iterations;
        cell.wall_ms = res.wall_ms;
        if (!res.incumbent) {
          cell.status = "infeasible";
          continue;
        }
        carried = res.incumbent;
        cell.opt = res.lower_bound;
        if (heur) {
          cell.heur = heur->objective;
          cell.ratio = cell.heur / cell.opt;
        }
        if (res.reason == TerminationReason::IterationLimit)
          cell.status = "iteration-limit";
      } catch (const std::exception& e) {
        cell.status = std::string("error:") + e.what();
      }
    }
  };

  if (cfg.threads <= 1) {
    for (std::size_t s = 0; s < cfg.seeds.size(); ++s)
      run_seed_chain(s * caps_per_seed);
  } else {
    std::mutex mu;
    std::size_t next_seed = 0;
    auto worker = [&] {
      for (;;) {
        std::size_t s;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next_seed >= cfg.seeds.size()) return;
          s = next_seed++;
        }
        run_seed_chain(s * caps_per_seed);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < cfg.threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const Real W = cfg.params.bandwidth_hz;
  std::ofstream csv(cfg.out_dir + "/sweep.csv");
  csv << provenance_line(cfg, cfg.seeds.front())
      << " units=mnats_per_s\n";
  csv << "backhaul,seed,opt_rate,heur_rate,ratio,iters,wall_ms,status\n";
  for (const auto& cell : cells) {
    char buf[320];
    std::snprintf(buf, sizeof buf, "%.12g,%llu,%.12g,%.12g,%.12g,%lld,%.3f,%s\n",
                  nats_per_use_to_mnats_per_s(cell.backhaul, W),
                  static_cast<unsigned long long>(cell.seed),
                  nats_per_use_to_mnats_per_s(cell.opt, W),
                  nats_per_use_to_mnats_per_s(cell.heur, W), cell.ratio,
                  cell.iters, cell.wall_ms, cell.status.c_str());
    csv << buf;
  }
  csv.close();

  nlohmann::json means = nlohmann::json::array();
  for (Real cap : cfg.sweep_backhaul) {
    Real opt_sum = 0, heur_sum = 0, ratio_sum = 0;
    Real ratio_min = std::numeric_limits<Real>::infinity(), ratio_max = 0;
    int n = 0;
    for (const auto& cell : cells) {
      if (cell.backhaul != cap || cell.status != "ok") continue;
      opt_sum += cell.opt;
      heur_sum += cell.heur;
      ratio_sum += cell.ratio;
      ratio_min = std::min(ratio_min, cell.ratio);
      ratio_max = std::max(ratio_max, cell.ratio);
      ++n;
    }
    nlohmann::json entry;
    entry["backhaul_mnats_per_s"] = nats_per_use_to_mnats_per_s(cap, W);
    entry["cells_ok"] = n;
    if (n > 0) {
      entry["mean_opt_mnats_per_s"] = nats_per_use_to_mnats_per_s(opt_sum / n, W);
      entry["mean_heur_mnats_per_s"] = nats_per_use_to_mnats_per_s(heur_sum / n, W);
      entry["mean_ratio"] = ratio_sum / n;
      entry["ratio_min"] = ratio_min;
      entry["ratio_max"] = ratio_max;
    }
    means.push_back(entry);
  }
  nlohmann::json summary;
  summary["version"] = kVersion;
  summary["config_hash"] = cfg.config_hash;
  summary["per_backhaul"] = means;
  std::vector<Real> ratios;
  for (const auto& cell : cells)
    if (cell.status == "ok" && std::isfinite(cell.ratio)) ratios.push_back(cell.ratio);
  summary["heuristic_ratios"] = ratios;
  write_text(cfg.out_dir + "/sweep_summary.json", summary.dump(2) + "\n");

  return kExitOk;
}

int run_oracle_check(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::uint64_t seed = cfg.seeds.front();
  Instance inst = acquire_instance(cfg, seed);
  if (inst.B() * inst.K() > 8 || inst.K() > 3) {
    std::cerr << "oracle-check: instance exceeds the oracle cost guard "
                 "(needs B*K <= 8 and K <= 3); refusing\n";
    return kExitError;
  }
  OracleComparison cmp =
      oracle_vs_dbrb(inst, cfg.grid_delta, cfg.epsilon_abs, cfg.max_iter);
  nlohmann::json j = cmp.report;
  j["version"] = kVersion;
  j["config_hash"] = cfg.config_hash;
  j["seed"] = seed;
  write_text(cfg.out_dir + "/check.json", j.dump(2) + "\n");
  return cmp.pass ? kExitOk : kExitOracleDivergence;
}

}  // namespace combeam
