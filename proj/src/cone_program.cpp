// SPDX-License-Identifier: Apache-2.0
#include "combeam/cone_program.hpp"

namespace combeam {

Beamformer VariableMap::beamformer(const VecX& primal) const {
  Beamformer w = MatXc::Zero(B * M, K);
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      int off = w_offset[link_index(b, k, K)];
      if (off < 0) continue;
      for (int m = 0; m < M; ++m)
        w(b * M + m, k) = Complex(primal[off + 2 * m], primal[off + 2 * m + 1]);
    }
  return w;
}

SoftPower VariableMap::soft_power(const VecX& primal) const {
  SoftPower u = VecX::Zero(B * K);
  for (int l = 0; l < B * K; ++l)
    if (u_offset[l] >= 0) u[l] = primal[u_offset[l]];
  return u;
}

VecX VariableMap::selection(const VecX& primal) const {
  VecX x = VecX::Zero(B * K);
  if (x_offset >= 0) x = primal.segment(x_offset, B * K);
  return x;
}

RateVector VariableMap::rates(const VecX& primal) const {
  RateVector z = VecX::Zero(K);
  if (z_offset >= 0) z = primal.segment(z_offset, K);
  return z;
}

void ConeProgram::validate() const {
  if (A.rows() != b.size() || A.cols() != c.size())
    throw std::invalid_argument("ConeProgram: A shape inconsistent with b, c");
  int total = 0;
  for (const auto& blk : cones) {
    if (blk.dim < 1) throw std::invalid_argument("ConeProgram: cone dim < 1");
    if (blk.kind == ConeKind::Soc && blk.dim < 2)
      throw std::invalid_argument("ConeProgram: SOC dim < 2");
    total += blk.dim;
  }
  if (total != num_rows())
    throw std::invalid_argument("ConeProgram: cone dims do not sum to rows");
  if (!A.allFinite() || !b.allFinite() || !c.allFinite())
    throw std::invalid_argument("ConeProgram: non-finite entry");
}

const char* to_string(ConeSolution::Status s) {
  switch (s) {
    case ConeSolution::Status::Optimal: return "optimal";
    case ConeSolution::Status::Infeasible: return "infeasible";
    case ConeSolution::Status::Unbounded: return "unbounded";
    case ConeSolution::Status::NumericalFailure: return "numerical-failure";
  }
  return "unknown";
}

nlohmann::json program_to_json(const ConeProgram& prog) {
  nlohmann::json j;
  j["num_vars"] = prog.num_vars();
  j["num_rows"] = prog.num_rows();
  j["c"] = std::vector<Real>(prog.c.data(), prog.c.data() + prog.c.size());
  j["b"] = std::vector<Real>(prog.b.data(), prog.b.data() + prog.b.size());
  nlohmann::json triplets = nlohmann::json::array();
  for (int r = 0; r < prog.A.rows(); ++r)
    for (int cidx = 0; cidx < prog.A.cols(); ++cidx)
      if (prog.A(r, cidx) != 0.0) triplets.push_back({r, cidx, prog.A(r, cidx)});
  j["A"] = {{"triplets", triplets}};
  nlohmann::json cones = nlohmann::json::array();
  for (const auto& blk : prog.cones) {
    const char* kind = blk.kind == ConeKind::Zero      ? "zero"
                       : blk.kind == ConeKind::NonNeg ? "nonneg"
                                                       : "soc";
    cones.push_back({{"type", kind}, {"dim", blk.dim}});
  }
  j["cones"] = cones;
  return j;
}

}  // namespace combeam
