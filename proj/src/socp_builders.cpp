// SPDX-License-Identifier: Apache-2.0
#include "combeam/socp_builders.hpp"

#include <cmath>

namespace combeam {

std::pair<VecX, VecX> realify_inner_product(const RowVecXc& h) {
  const int n = static_cast<int>(h.size());
  VecX a_re = VecX::Zero(2 * n), a_im = VecX::Zero(2 * n);
  for (int t = 0; t < n; ++t) {
    a_re[2 * t] = h[t].real();
    a_re[2 * t + 1] = -h[t].imag();
    a_im[2 * t] = h[t].imag();
    a_im[2 * t + 1] = h[t].real();
  }
  return {a_re, a_im};
}

VecX realify_vector(const VecXc& v) {
  VecX out(2 * v.size());
  for (int t = 0; t < v.size(); ++t) {
    out[2 * t] = v[t].real();
    out[2 * t + 1] = v[t].imag();
  }
  return out;
}

Real envelope_phi(const VecX& x_point, const VecX& z_point, const Box& box, int b) {
  const int K = box.num_cont();
  Real lo_piece = 0.0, hi_piece = 0.0;
  for (int k = 0; k < K; ++k) {
    const int l = b * K + k;
    const Real xl = box.lo[l], xh = box.hi[l];
    const Real zl = box.lo[box.num_bool + k], zh = box.hi[box.num_bool + k];
    lo_piece += zl * x_point[l] + xl * z_point[k] - xl * zl;
    hi_piece += zh * x_point[l] + xh * z_point[k] - xh * zh;
  }
  return std::max(lo_piece, hi_piece);
}

namespace {

// Normalized channel rows: h / sqrt(W*N0), so the in-cone noise constant is
// exactly 1.  Keeps SOC rows at comparable magnitudes.
MatXc normalized_channels(const Instance& inst) {
  return inst.channels.h / std::sqrt(inst.noise_w());
}

}  // namespace

ConeProgram build_bound_program(const Box& box, const Instance& inst, Real cbo) {
  const int B = inst.B(), M = inst.M(), K = inst.K();
  const int BK = B * K;
  if (box.num_bool != BK || box.dim() != BK + K || !box.valid())
    throw std::invalid_argument("build_bound_program: malformed box");

  const MatXc hn = normalized_channels(inst);
  const Real pbar = inst.params.power_budget_w;
  const Real cbar = inst.params.backhaul_cap;
  const Real s_gamma = std::sqrt(inst.params.sinr_target);

  const int wlen = 2 * B * M;  // per user
  const int n = wlen * K + 2 * BK + K;
  const int x0 = wlen * K;
  const int u0 = x0 + BK;
  const int z0 = u0 + BK;

  // Tangent cuts on z_k <= log(1 + |h_k w_k|^2 / (W N0)): the right side is
  // concave in the (rotated, real) signal wherever the signal level implied
  // by the rate floor is at least the noise level, i.e. e^{z_lo} - 1 >= 1.
  // Each valid user contributes one cut per anchor; anchors at the floor,
  // midpoint and ceiling of the box's rate edge.
  constexpr int kTangentsPerUser = 3;
  std::vector<int> tangent_users;
  for (int k = 0; k < K; ++k)
    if (std::expm1(box.lo[B * K + k]) >= 1.0) tangent_users.push_back(k);

  const int rows_zero = K;
  const int rows_nn = B + BK + K + 2 * BK + 2 * K + 2 + 2 * B +
                      kTangentsPerUser * static_cast<int>(tangent_users.size());
  const int soc_user = 2 * K;      // leading entry + 2(K-1) interference + noise
  const int soc_link = 2 * M + 2;
  const int m = rows_zero + rows_nn + 2 * K * soc_user + BK * soc_link;

  ConeProgram prog;
  prog.c = VecX::Zero(n);
  prog.c.segment(z0, K).setConstant(-1.0);  // maximize sum z
  prog.A = MatX::Zero(m, n);
  prog.b = VecX::Zero(m);

  prog.vars.B = B;
  prog.vars.M = M;
  prog.vars.K = K;
  prog.vars.w_offset.assign(BK, -1);
  prog.vars.u_offset.assign(BK, -1);
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      prog.vars.w_offset[link_index(b, k, K)] = k * wlen + b * 2 * M;
      prog.vars.u_offset[link_index(b, k, K)] = u0 + link_index(b, k, K);
    }
  prog.vars.x_offset = x0;
  prog.vars.z_offset = z0;

  // Realified channel rows per user.
  std::vector<VecX> a_re(K), a_im(K);
  for (int k = 0; k < K; ++k)
    std::tie(a_re[k], a_im[k]) = realify_inner_product(hn.row(k));

  int r = 0;
  // Im(h_k w_k) = 0
  for (int k = 0; k < K; ++k, ++r) prog.A.row(r).segment(k * wlen, wlen) = a_im[k];
  prog.cones.push_back({ConeKind::Zero, K});

  // Nonnegative rows.
  const int nn_begin = r;
  for (int b = 0; b < B; ++b, ++r) {  // per-BS power
    for (int k = 0; k < K; ++k) prog.A(r, u0 + link_index(b, k, K)) = 1.0;
    prog.b[r] = pbar;
  }
  for (int l = 0; l < BK; ++l, ++r) prog.A(r, u0 + l) = -1.0;  // u >= 0
  for (int k = 0; k < K; ++k, ++r) {                           // connectivity
    for (int b = 0; b < B; ++b) prog.A(r, x0 + link_index(b, k, K)) = -1.0;
    prog.b[r] = -1.0;
  }
  for (int l = 0; l < BK; ++l, ++r) {  // x >= lo
    prog.A(r, x0 + l) = -1.0;
    prog.b[r] = -box.lo[l];
  }
  for (int l = 0; l < BK; ++l, ++r) {  // x <= hi
    prog.A(r, x0 + l) = 1.0;
    prog.b[r] = box.hi[l];
  }
  for (int k = 0; k < K; ++k, ++r) {  // z >= lo
    prog.A(r, z0 + k) = -1.0;
    prog.b[r] = -box.lo[BK + k];
  }
  for (int k = 0; k < K; ++k, ++r) {  // z <= hi
    prog.A(r, z0 + k) = 1.0;
    prog.b[r] = box.hi[BK + k];
  }
  {  // cbo <= sum z <= sum z_hi
    for (int k = 0; k < K; ++k) prog.A(r, z0 + k) = -1.0;
    prog.b[r] = -cbo;
    ++r;
    for (int k = 0; k < K; ++k) prog.A(r, z0 + k) = 1.0;
    prog.b[r] = box.cont_hi().sum();
    ++r;
  }
  for (int b = 0; b < B; ++b) {  // envelope cuts, lower then upper piece
    Real off_lo = 0.0, off_hi = 0.0;
    for (int k = 0; k < K; ++k) {
      const int l = link_index(b, k, K);
      prog.A(r, x0 + l) = box.lo[BK + k];
      prog.A(r, z0 + k) = box.lo[l];
      off_lo += box.lo[l] * box.lo[BK + k];
      prog.A(r + 1, x0 + l) = box.hi[BK + k];
      prog.A(r + 1, z0 + k) = box.hi[l];
      off_hi += box.hi[l] * box.hi[BK + k];
    }
    prog.b[r] = cbar + off_lo;
    prog.b[r + 1] = cbar + off_hi;
    r += 2;
  }
  for (int k : tangent_users) {
    const Real zl = box.lo[BK + k], zh = box.hi[BK + k];
    const Real anchors[kTangentsPerUser] = {zl, 0.5 * (zl + zh), zh};
    for (Real zt : anchors) {
      const Real tt = std::sqrt(std::expm1(zt));      // signal at the anchor
      const Real slope = 2.0 * tt / std::exp(zt);     // d/dt log(1 + t^2)
      // z_k - slope * Re(h_k w_k) <= zt - slope * tt
      prog.A(r, z0 + k) = 1.0;
      prog.A.row(r).segment(k * wlen, wlen) = -slope * a_re[k];
      prog.b[r] = zt - slope * tt;
      ++r;
    }
  }
  prog.cones.push_back({ConeKind::NonNeg, r - nn_begin});

  // SINR cone, then rate-bound cone, per user.
  auto emit_user_soc = [&](int k, Real factor) {
    prog.A.row(r).segment(k * wlen, wlen) = -a_re[k];
    ++r;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      prog.A.row(r).segment(j * wlen, wlen) = -factor * a_re[k];
      ++r;
      prog.A.row(r).segment(j * wlen, wlen) = -factor * a_im[k];
      ++r;
    }
    prog.b[r] = factor;  // normalized noise
    ++r;
    prog.cones.push_back({ConeKind::Soc, soc_user});
  };
  for (int k = 0; k < K; ++k) emit_user_soc(k, s_gamma);
  for (int k = 0; k < K; ++k)
    emit_user_soc(k, std::sqrt(std::expm1(box.lo[BK + k])));

  // Soft-power cone per link: ||(w_{b,k}, (x-u)/2)|| <= (x+u)/2.
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      const int l = link_index(b, k, K);
      prog.A(r, x0 + l) = -0.5;
      prog.A(r, u0 + l) = -0.5;
      ++r;
      for (int i = 0; i < 2 * M; ++i, ++r)
        prog.A(r, k * wlen + b * 2 * M + i) = -1.0;
      prog.A(r, x0 + l) = -0.5;
      prog.A(r, u0 + l) = 0.5;
      ++r;
      prog.cones.push_back({ConeKind::Soc, soc_link});
    }

  prog.validate();
  return prog;
}

ConeProgram build_feasibility_program(const SelectionVector& x_sel,
                                      const RateVector& z_lower,
                                      const Instance& inst,
                                      FeasObjective objective) {
  const int B = inst.B(), M = inst.M(), K = inst.K();
  const int BK = B * K;
  if (x_sel.size() != BK || z_lower.size() != K)
    throw std::invalid_argument("build_feasibility_program: shape mismatch");

  const MatXc hn = normalized_channels(inst);
  const Real pbar = inst.params.power_budget_w;

  // Active links, user-major variable layout.
  std::vector<int> active;  // link indices with x=1
  for (int l = 0; l < BK; ++l)
    if (x_sel[l] != 0) active.push_back(l);

  ConeProgram prog;
  prog.vars.B = B;
  prog.vars.M = M;
  prog.vars.K = K;
  prog.vars.w_offset.assign(BK, -1);
  prog.vars.u_offset.assign(BK, -1);

  int n = 0;
  for (int k = 0; k < K; ++k)
    for (int b = 0; b < B; ++b) {
      const int l = link_index(b, k, K);
      if (x_sel[l] != 0) {
        prog.vars.w_offset[l] = n;
        n += 2 * M;
      }
    }
  for (int l : active) {
    prog.vars.u_offset[l] = n;
    ++n;
  }

  std::vector<int> users_served;  // users with at least one active link
  std::vector<char> served(K, 0);
  for (int l : active) served[link_user(l, K)] = 1;
  for (int k = 0; k < K; ++k)
    if (served[k]) users_served.push_back(k);
  std::vector<char> bs_active(B, 0);
  for (int l : active) bs_active[link_bs(l, K)] = 1;
  int n_bs_active = 0;
  for (int b = 0; b < B; ++b) n_bs_active += bs_active[b];

  const int na = static_cast<int>(active.size());
  const int soc_user = 2 * K;
  const int soc_link = 2 * M + 2;
  const int m = static_cast<int>(users_served.size()) + (n_bs_active + na) +
                K * soc_user + na * soc_link;

  prog.c = VecX::Zero(n);
  if (objective == FeasObjective::MinPower)
    for (int l : active) prog.c[prog.vars.u_offset[l]] = 1.0;
  prog.A = MatX::Zero(m, n);
  prog.b = VecX::Zero(m);

  // Realified rows of user k's channel against user j's active beamformer.
  auto fill_inner = [&](int r, int k, int j, bool imag, Real scale) {
    for (int b = 0; b < B; ++b) {
      const int l = link_index(b, j, K);
      const int off = prog.vars.w_offset[l];
      if (off < 0) continue;
      for (int t = 0; t < M; ++t) {
        const Complex hv = hn(k, b * M + t);
        if (!imag) {
          prog.A(r, off + 2 * t) += scale * hv.real();
          prog.A(r, off + 2 * t + 1) += scale * -hv.imag();
        } else {
          prog.A(r, off + 2 * t) += scale * hv.imag();
          prog.A(r, off + 2 * t + 1) += scale * hv.real();
        }
      }
    }
  };

  int r = 0;
  for (int k : users_served) fill_inner(r++, k, k, true, 1.0);  // Im(h_k w_k) = 0
  if (!users_served.empty())
    prog.cones.push_back({ConeKind::Zero, static_cast<int>(users_served.size())});

  const int nn_begin = r;
  for (int b = 0; b < B; ++b) {
    if (!bs_active[b]) continue;
    for (int k = 0; k < K; ++k) {
      const int l = link_index(b, k, K);
      if (prog.vars.u_offset[l] >= 0) prog.A(r, prog.vars.u_offset[l]) = 1.0;
    }
    prog.b[r] = pbar;
    ++r;
  }
  for (int l : active) {
    prog.A(r, prog.vars.u_offset[l]) = -1.0;
    ++r;
  }
  if (r > nn_begin) prog.cones.push_back({ConeKind::NonNeg, r - nn_begin});

  for (int k = 0; k < K; ++k) {
    const Real factor = std::sqrt(std::expm1(z_lower[k]));
    fill_inner(r, k, k, false, -1.0);
    ++r;
    for (int j = 0; j < K; ++j) {
      if (j == k) continue;
      fill_inner(r, k, j, false, -factor);
      ++r;
      fill_inner(r, k, j, true, -factor);
      ++r;
    }
    prog.b[r] = factor;
    ++r;
    prog.cones.push_back({ConeKind::Soc, soc_user});
  }

  for (int l : active) {
    const int uoff = prog.vars.u_offset[l];
    const int woff = prog.vars.w_offset[l];
    prog.A(r, uoff) = -0.5;
    prog.b[r] = 0.5;  // (1 + u)/2
    ++r;
    for (int i = 0; i < 2 * M; ++i, ++r) prog.A(r, woff + i) = -1.0;
    prog.A(r, uoff) = 0.5;
    prog.b[r] = 0.5;  // (1 - u)/2
    ++r;
    prog.cones.push_back({ConeKind::Soc, soc_link});
  }

  prog.validate();
  return prog;
}

}  // namespace combeam
