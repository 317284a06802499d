// SPDX-License-Identifier: Apache-2.0
#include "combeam/problem.hpp"

#include <cmath>

namespace combeam {

Instance make_instance(const SystemParams& params, std::uint64_t seed) {
  Instance inst{params, generate_scenario(params, seed)};
  for (int k = 0; k < inst.K(); ++k)
    if (!(inst.channels.h.row(k).norm() > 0))
      throw std::invalid_argument("make_instance: degenerate zero channel");
  return inst;
}

Real sinr(const Instance& inst, const Beamformer& w, int k) {
  const auto hk = inst.channels.h.row(k);
  Real signal = std::norm(Complex(hk * w.col(k)));
  Real interference = 0.0;
  for (int j = 0; j < inst.K(); ++j)
    if (j != k) interference += std::norm(Complex(hk * w.col(j)));
  return signal / (interference + inst.noise_w());
}

Real rate(const Instance& inst, const Beamformer& w, int k) {
  return std::log1p(sinr(inst, w, k));
}

RateVector all_rates(const Instance& inst, const Beamformer& w) {
  RateVector r(inst.K());
  for (int k = 0; k < inst.K(); ++k) r[k] = rate(inst, w, k);
  return r;
}

Real backhaul_usage(const SelectionVector& x, const RateVector& rates, int b) {
  const int K = static_cast<int>(rates.size());
  Real total = 0.0;
  for (int k = 0; k < K; ++k) total += x[link_index(b, k, K)] * rates[k];
  return total;
}

Beamformer soc_rotate(const Instance& inst, const Beamformer& w) {
  Beamformer out = w;
  for (int k = 0; k < inst.K(); ++k) {
    Complex hw = inst.channels.h.row(k) * w.col(k);
    Real mag = std::abs(hw);
    if (mag > 0) out.col(k) *= std::conj(hw) / mag;
  }
  return out;
}

FeasibilityReport check_feasible(const Instance& inst, const Beamformer& w,
                                 const SelectionVector& x, const SoftPower& u,
                                 Real tol) {
  FeasibilityReport report;
  const int B = inst.B();
  const int M = inst.M();
  const int K = inst.K();
  const Real cbar = inst.params.backhaul_cap;
  const Real pbar = inst.params.power_budget_w;

  RateVector r = all_rates(inst, w);

  for (int l = 0; l < B * K; ++l) {
    Real frac = std::abs(x[l] - std::round(static_cast<Real>(x[l])));
    if (frac > tol) report.violations.push_back({"boolean", l, frac});
  }
  for (int k = 0; k < K; ++k) {
    int served = 0;
    for (int b = 0; b < B; ++b) served += x[link_index(b, k, K)];
    if (served < 1) report.violations.push_back({"connectivity", k, 1.0 - served});
  }
  for (int b = 0; b < B; ++b) {
    Real margin = (backhaul_usage(x, r, b) - cbar) / std::max<Real>(1.0, cbar);
    if (margin > tol) report.violations.push_back({"backhaul", b, margin});
  }
  for (int k = 0; k < K; ++k) {
    Real margin = inst.params.sinr_target - sinr(inst, w, k);
    if (margin > tol) report.violations.push_back({"sinr", k, margin});
  }
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      int l = link_index(b, k, K);
      Real margin = w.col(k).segment(b * M, M).squaredNorm() - x[l] * u[l];
      if (margin > tol) report.violations.push_back({"soft-power", l, margin});
    }
  for (int b = 0; b < B; ++b) {
    Real used = 0.0;
    for (int k = 0; k < K; ++k) used += u[link_index(b, k, K)];
    Real margin = (used - pbar) / std::max<Real>(1.0, pbar);
    if (margin > tol) report.violations.push_back({"power", b, margin});
  }
  return report;
}

std::optional<Box> compute_root_box(const Instance& inst) {
  const int B = inst.B();
  const int K = inst.K();
  const int n_bool = B * K;

  Box box;
  box.num_bool = n_bool;
  box.lo = VecX::Zero(n_bool + K);
  box.hi = VecX::Ones(n_bool + K);

  Real z_lo = std::log1p(inst.params.sinr_target);
  for (int k = 0; k < K; ++k) {
    Real power_cap = std::log1p(B * inst.params.power_budget_w *
                                inst.channels.user_channel_norm_sq(k) /
                                inst.noise_w());
    Real z_hi = std::min(B * inst.params.backhaul_cap, power_cap);
    if (z_lo > z_hi) return std::nullopt;  // SINR target unreachable
    box.lo[n_bool + k] = z_lo;
    box.hi[n_bool + k] = z_hi;
  }
  return box;
}

}  // namespace combeam
