// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "combeam/problem.hpp"
#include "combeam/rng.hpp"
#include "doctest.h"

using namespace combeam;

namespace {

Instance tiny_instance(int B = 2, int M = 2, int K = 2, std::uint64_t seed = 1,
                       Real backhaul = 5.0, Real sinr_target = 1.0) {
  SystemParams p;
  p.num_bs = B;
  p.antennas_per_bs = M;
  p.num_users = K;
  p.backhaul_cap = backhaul;
  p.sinr_target = sinr_target;
  return make_instance(p, seed);
}

Beamformer random_beamformer(const Instance& inst, Rng& rng, Real scale) {
  Beamformer w(inst.B() * inst.M(), inst.K());
  for (int i = 0; i < w.rows(); ++i)
    for (int k = 0; k < w.cols(); ++k)
      w(i, k) = scale * Complex(rng.normal(), rng.normal());
  return w;
}

// Direct scalar evaluation of the SINR definition, kept deliberately naive.
Real naive_sinr(const Instance& inst, const Beamformer& w, int k) {
  const int n = inst.B() * inst.M();
  Complex sig(0, 0);
  for (int t = 0; t < n; ++t) sig += inst.channels.h(k, t) * w(t, k);
  Real num = sig.real() * sig.real() + sig.imag() * sig.imag();
  Real den = inst.noise_w();
  for (int j = 0; j < inst.K(); ++j) {
    if (j == k) continue;
    Complex cross(0, 0);
    for (int t = 0; t < n; ++t) cross += inst.channels.h(k, t) * w(t, j);
    den += cross.real() * cross.real() + cross.imag() * cross.imag();
  }
  return num / den;
}

}  // namespace

TEST_CASE("sinr: matched filter without interference") {
  Instance inst = tiny_instance(1, 4, 1, 3);
  Real power = 2.5;
  Beamformer w(4, 1);
  w.col(0) = std::sqrt(power) * inst.channels.h.row(0).adjoint() /
             inst.channels.h.row(0).norm();
  Real expect = inst.channels.h.row(0).squaredNorm() * power / inst.noise_w();
  CHECK(sinr(inst, w, 0) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sinr: zero beamformer") {
  Instance inst = tiny_instance();
  Beamformer w = Beamformer::Zero(4, 2);
  CHECK(sinr(inst, w, 0) == 0.0);
  CHECK(sinr(inst, w, 1) == 0.0);
  CHECK(rate(inst, w, 0) == 0.0);
}

TEST_CASE("sinr: matches a naive scalar evaluation") {
  Instance inst = tiny_instance();
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Beamformer w = random_beamformer(inst, rng, 1.0);
    for (int k = 0; k < 2; ++k) {
      Real a = sinr(inst, w, k);
      Real b = naive_sinr(inst, w, k);
      CHECK(std::abs(a - b) <= 1e-12 * std::max<Real>(1.0, std::abs(b)));
    }
  }
}

TEST_CASE("rate at calibrated SINR values") {
  Instance inst = tiny_instance(1, 2, 1, 9);
  auto aligned_with_sinr = [&](Real target) {
    Real p = target * inst.noise_w() / inst.channels.h.row(0).squaredNorm();
    Beamformer w(2, 1);
    w.col(0) = std::sqrt(p) * inst.channels.h.row(0).adjoint() /
               inst.channels.h.row(0).norm();
    return w;
  };
  CHECK(rate(inst, aligned_with_sinr(std::exp(1.0) - 1.0), 0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rate(inst, aligned_with_sinr(1.0), 0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("backhaul usage") {
  const int K = 6;
  RateVector r = RateVector::Constant(K, std::log(2.0));
  SelectionVector x = SelectionVector::Zero(3 * K);
  CHECK(backhaul_usage(x, r, 0) == 0.0);
  x.segment(K, K).setOnes();  // BS 1 serves everyone
  CHECK(backhaul_usage(x, r, 1) == doctest::Approx(6.0 * std::log(2.0)));
  Rng rng(2);
  RateVector rr(K);
  for (int k = 0; k < K; ++k) rr[k] = std::abs(rng.normal());
  SelectionVector xx(3 * K);
  for (int l = 0; l < 3 * K; ++l) xx[l] = rng.uniform() < 0.5;
  for (int b = 0; b < 3; ++b) {
    Real direct = 0.0;
    for (int k = 0; k < K; ++k) direct += xx[b * K + k] * rr[k];
    CHECK(backhaul_usage(xx, rr, b) == doctest::Approx(direct).epsilon(1e-15));
  }
}

TEST_CASE("soc_rotate preserves every SINR and fixes the phase") {
  Instance inst = tiny_instance();
  Rng rng(7);
  Beamformer w = random_beamformer(inst, rng, 1.0);
  Beamformer r = soc_rotate(inst, w);
  for (int k = 0; k < 2; ++k) {
    Complex hw = inst.channels.h.row(k) * r.col(k);
    CHECK(std::abs(hw.imag()) < 1e-12 * std::abs(hw));
    CHECK(hw.real() >= 0.0);
    CHECK(sinr(inst, r, k) == doctest::Approx(sinr(inst, w, k)).epsilon(1e-12));
  }

  // already real-positive stays put
  Beamformer rr = soc_rotate(inst, r);
  CHECK((rr - r).norm() < 1e-12 * r.norm());

  // per-column phase invariance of the output
  Beamformer w2 = w;
  w2.col(0) *= std::polar(1.0, 1.234);
  Beamformer r2 = soc_rotate(inst, w2);
  CHECK((r2 - r).norm() < 1e-9 * r.norm());

  // zero column maps to itself
  Beamformer wz = w;
  wz.col(1).setZero();
  CHECK(soc_rotate(inst, wz).col(1).norm() == 0.0);
}

TEST_CASE("check_feasible reports the right violations") {
  Instance inst = tiny_instance();
  const int BK = 4;

  SUBCASE("zero beamformer violates only the SINR floor") {
    Beamformer w = Beamformer::Zero(4, 2);
    SelectionVector x(BK);
    x << 1, 0, 0, 1;  // one link per user
    SoftPower u = SoftPower::Zero(BK);
    auto report = check_feasible(inst, w, x, u);
    CHECK_FALSE(report.feasible());
    for (const auto& v : report.violations) CHECK(v.constraint == "sinr");
    CHECK(report.violations.size() == 2);
  }

  SUBCASE("empty selection violates connectivity") {
    Beamformer w = Beamformer::Zero(4, 2);
    SelectionVector x = SelectionVector::Zero(BK);
    SoftPower u = SoftPower::Zero(BK);
    auto report = check_feasible(inst, w, x, u);
    bool saw_connectivity = false;
    for (const auto& v : report.violations)
      saw_connectivity |= v.constraint == "connectivity";
    CHECK(saw_connectivity);
  }

  SUBCASE("soft power coupling is enforced") {
    Rng rng(3);
    Beamformer w = random_beamformer(inst, rng, 1.0);
    SelectionVector x = SelectionVector::Ones(BK);
    SoftPower u = SoftPower::Zero(BK);  // u too small for nonzero w
    auto report = check_feasible(inst, w, x, u);
    bool saw_soft = false;
    for (const auto& v : report.violations) saw_soft |= v.constraint == "soft-power";
    CHECK(saw_soft);
  }
}

TEST_CASE("root box formulas") {
  Instance inst = tiny_instance(2, 2, 2, 11, 5.0, 1.0);
  auto box = compute_root_box(inst);
  REQUIRE(box.has_value());
  CHECK(box->num_bool == 4);
  CHECK(box->dim() == 6);
  for (int l = 0; l < 4; ++l) {
    CHECK(box->lo[l] == 0.0);
    CHECK(box->hi[l] == 1.0);
  }
  for (int k = 0; k < 2; ++k) {
    CHECK(box->lo[4 + k] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    Real power_cap = std::log1p(2 * inst.params.power_budget_w *
                                inst.channels.user_channel_norm_sq(k) /
                                inst.noise_w());
    CHECK(box->hi[4 + k] ==
          doctest::Approx(std::min(10.0, power_cap)).epsilon(1e-12));
  }

  SUBCASE("huge backhaul leaves the power bound") {
    Instance loose = tiny_instance(2, 2, 2, 11, 1e9, 1.0);
    auto b2 = compute_root_box(loose);
    REQUIRE(b2.has_value());
    for (int k = 0; k < 2; ++k) {
      Real power_cap = std::log1p(2 * loose.params.power_budget_w *
                                  loose.channels.user_channel_norm_sq(k) /
                                  loose.noise_w());
      CHECK(b2->hi[4 + k] == doctest::Approx(power_cap).epsilon(1e-12));
    }
  }

  SUBCASE("unreachable SINR target is an explicit signal") {
    Instance hard = tiny_instance(2, 2, 2, 11, 5.0, 1e30);
    CHECK_FALSE(compute_root_box(hard).has_value());
  }
}
