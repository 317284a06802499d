// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "combeam/cone_solver.hpp"
#include "combeam/rng.hpp"
#include "combeam/socp_builders.hpp"
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

Box random_subbox(const Box& root, Rng& rng) {
  Box box = root;
  for (int l = 0; l < box.num_bool; ++l) {
    Real r = rng.uniform();
    if (r < 0.3) box.hi[l] = 0.0;       // fixed off
    else if (r < 0.6) box.lo[l] = 1.0;  // fixed on
  }
  for (int k = box.num_bool; k < box.dim(); ++k) {
    Real a = rng.uniform(), b = rng.uniform();
    if (a > b) std::swap(a, b);
    Real lo = box.lo[k], hi = box.hi[k];
    box.lo[k] = lo + a * (hi - lo);
    box.hi[k] = lo + b * (hi - lo);
  }
  return box;
}

}  // namespace

TEST_CASE("realify: inner product rows match complex arithmetic") {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 3 + trial % 4;
    RowVecXc h(n);
    VecXc w(n);
    for (int t = 0; t < n; ++t) {
      h[t] = Complex(rng.normal(), rng.normal());
      w[t] = Complex(rng.normal(), rng.normal());
    }
    auto [a_re, a_im] = realify_inner_product(h);
    VecX wr = realify_vector(w);
    Complex hw = h * w;
    CHECK(a_re.dot(wr) == doctest::Approx(hw.real()).epsilon(1e-12));
    CHECK(a_im.dot(wr) == doctest::Approx(hw.imag()).epsilon(1e-12));
    // |h w| equals the 2-norm of the realified pair
    Real norm2 = std::hypot(a_re.dot(wr), a_im.dot(wr));
    CHECK(norm2 == doctest::Approx(std::abs(hw)).epsilon(1e-12));
  }
  // real-only channel: imaginary rows carry no real-part coefficients
  RowVecXc hr = RowVecXc::Constant(2, Complex(1.5, 0.0));
  auto [a_re, a_im] = realify_inner_product(hr);
  CHECK(a_im[0] == 0.0);
  CHECK(a_im[2] == 0.0);
  CHECK(a_re[1] == 0.0);
  CHECK(a_re[3] == 0.0);
}

TEST_CASE("envelope: exact at all four corner combinations") {
  Instance inst = tiny_instance();
  auto root = compute_root_box(inst);
  REQUIRE(root.has_value());
  Rng rng(23);
  Box box = random_subbox(*root, rng);

  const int K = 2;
  for (int corner = 0; corner < 4; ++corner) {
    bool x_hi = corner & 1, z_hi = corner & 2;
    VecX x(box.num_bool), z(K);
    for (int l = 0; l < box.num_bool; ++l) x[l] = x_hi ? box.hi[l] : box.lo[l];
    for (int k = 0; k < K; ++k)
      z[k] = z_hi ? box.hi[box.num_bool + k] : box.lo[box.num_bool + k];
    for (int b = 0; b < 2; ++b) {
      Real bilinear = 0.0;
      for (int k = 0; k < K; ++k) bilinear += x[b * K + k] * z[k];
      CHECK(std::abs(envelope_phi(x, z, box, b) - bilinear) < 1e-9);
    }
  }
}

TEST_CASE("envelope: underestimates the bilinear form everywhere") {
  Instance inst = tiny_instance();
  auto root = compute_root_box(inst);
  Rng rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    Box box = random_subbox(*root, rng);
    for (int i = 0; i < 2000; ++i) {
      VecX x(box.num_bool), z(2);
      for (int l = 0; l < box.num_bool; ++l)
        x[l] = box.lo[l] + rng.uniform() * (box.hi[l] - box.lo[l]);
      for (int k = 0; k < 2; ++k)
        z[k] = box.lo[4 + k] + rng.uniform() * (box.hi[4 + k] - box.lo[4 + k]);
      for (int b = 0; b < 2; ++b) {
        Real bilinear = 0.0;
        for (int k = 0; k < 2; ++k) bilinear += x[b * 2 + k] * z[k];
        CHECK(envelope_phi(x, z, box, b) <= bilinear + 1e-12);
      }
    }
  }
}

TEST_CASE("envelope: exact when the Boolean block is fixed") {
  Instance inst = tiny_instance();
  auto root = compute_root_box(inst);
  Box box = *root;
  box.lo.head(4) << 1, 0, 0, 1;
  box.hi.head(4) = box.lo.head(4);
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    VecX x = box.lo.head(4);
    VecX z(2);
    for (int k = 0; k < 2; ++k)
      z[k] = box.lo[4 + k] + rng.uniform() * (box.hi[4 + k] - box.lo[4 + k]);
    for (int b = 0; b < 2; ++b) {
      Real bilinear = x[b * 2] * z[0] + x[b * 2 + 1] * z[1];
      CHECK(envelope_phi(x, z, box, b) ==
            doctest::Approx(bilinear).epsilon(1e-12));
    }
  }
}

TEST_CASE("bound program: fixed box pins the objective") {
  Instance inst = tiny_instance();
  auto root = compute_root_box(inst);
  Box box = *root;
  box.lo.head(4) << 1, 1, 1, 1;
  box.hi.head(4) = box.lo.head(4);
  // freeze z at a feasible interior level
  box.lo[4] = box.hi[4] = std::log(2.0) + 0.3;
  box.lo[5] = box.hi[5] = std::log(2.0) + 0.2;
  ConeProgram prog = build_bound_program(box, inst, 2 * std::log(2.0));
  auto sol = solve(prog);
  REQUIRE(sol.status == ConeSolution::Status::Optimal);
  CHECK(-sol.objective ==
        doctest::Approx(box.lo[4] + box.lo[5]).epsilon(1e-7));
}

TEST_CASE("bound program rejects malformed boxes") {
  Instance inst = tiny_instance();
  auto root = compute_root_box(inst);
  Box bad = *root;
  bad.lo[0] = 0.5;  // Boolean vertex not in {0,1}
  CHECK_THROWS_AS(build_bound_program(bad, inst, 0.0), std::invalid_argument);
  Box wrong = *root;
  wrong.lo.conservativeResize(5);
  wrong.hi.conservativeResize(5);
  CHECK_THROWS_AS(build_bound_program(wrong, inst, 0.0), std::invalid_argument);
}

TEST_CASE("feasibility program: generous setup is feasible and lifts cleanly") {
  Instance inst = tiny_instance(2, 2, 2, 4, 50.0, 0.1);  // easy SINR target
  SelectionVector all_on = SelectionVector::Ones(4);
  RateVector z_lo = RateVector::Constant(2, std::log1p(0.1));
  ConeProgram prog = build_feasibility_program(all_on, z_lo, inst);
  auto sol = solve(prog);
  REQUIRE(sol.status == ConeSolution::Status::Optimal);

  Beamformer w = prog.vars.beamformer(sol.x);
  // the witness satisfies the SINR floors, soft-power and power caps
  for (int k = 0; k < 2; ++k)
    CHECK(rate(inst, w, k) >= z_lo[k] - 1e-6);
  SoftPower u = prog.vars.soft_power(sol.x);
  auto report = check_feasible(inst, w, all_on, u);
  for (const auto& v : report.violations) {
    CHECK(v.constraint != "sinr");
    CHECK(v.constraint != "soft-power");
    CHECK(v.constraint != "power");
  }
}

TEST_CASE("feasibility program: an unserved user is infeasible") {
  Instance inst = tiny_instance();
  SelectionVector x(4);
  x << 1, 0, 1, 0;  // user 1 has no link anywhere
  RateVector z_lo = RateVector::Constant(2, std::log(2.0));
  ConeProgram prog = build_feasibility_program(x, z_lo, inst);
  CHECK(solve(prog).status == ConeSolution::Status::Infeasible);
}

TEST_CASE("feasibility program with min-power objective drives rates to the floor") {
  Instance inst = tiny_instance(2, 2, 2, 8, 50.0, 1.0);
  SelectionVector all_on = SelectionVector::Ones(4);
  RateVector z_lo = RateVector::Constant(2, 1.2);
  ConeProgram prog =
      build_feasibility_program(all_on, z_lo, inst, FeasObjective::MinPower);
  auto sol = solve(prog);
  REQUIRE(sol.status == ConeSolution::Status::Optimal);
  Beamformer w = prog.vars.beamformer(sol.x);
  for (int k = 0; k < 2; ++k)
    CHECK(rate(inst, w, k) == doctest::Approx(1.2).epsilon(1e-3));
}

TEST_CASE("program debug dump round-trips the matrix structure") {
  Instance inst = tiny_instance();
  auto root = compute_root_box(inst);
  ConeProgram prog = build_bound_program(*root, inst, 2 * std::log(2.0));
  auto j = program_to_json(prog);
  CHECK(j["num_vars"] == prog.num_vars());
  CHECK(j["num_rows"] == prog.num_rows());
  int cone_rows = 0;
  for (const auto& blk : j["cones"]) cone_rows += blk["dim"].get<int>();
  CHECK(cone_rows == prog.num_rows());
  MatX rebuilt = MatX::Zero(prog.num_rows(), prog.num_vars());
  for (const auto& t : j["A"]["triplets"])
    rebuilt(t[0].get<int>(), t[1].get<int>()) = t[2].get<Real>();
  CHECK((rebuilt - prog.A).norm() == 0.0);
}
