// SPDX-License-Identifier: Apache-2.0
#include "combeam/scenario.hpp"

#include <cmath>
#include <stdexcept>

#include "combeam/rng.hpp"

namespace combeam {

namespace {
constexpr Real kPi = 3.14159265358979323846;
// Users falling essentially on top of a BS are clamped to 10 m so the
// pathloss model stays in its domain.
constexpr Real kMinDistanceKm = 0.01;

enum Stream : std::uint64_t { kGeometry = 1, kShadowing = 2, kFading = 3 };
}  // namespace

void SystemParams::validate() const {
  if (num_bs < 1 || antennas_per_bs < 1 || num_users < 1)
    throw std::invalid_argument("counts B, M, K must all be >= 1");
  if (!(power_budget_w > 0)) throw std::invalid_argument("power budget must be > 0");
  if (!(backhaul_cap > 0)) throw std::invalid_argument("backhaul capacity must be > 0");
  if (!(sinr_target > 0)) throw std::invalid_argument("SINR target must be > 0");
  if (!(bandwidth_hz > 0)) throw std::invalid_argument("bandwidth must be > 0");
  if (!(noise_density_w_per_hz > 0)) throw std::invalid_argument("noise density must be > 0");
  if (!(inter_site_distance_km > 0)) throw std::invalid_argument("inter-site distance must be > 0");
  if (shadowing_std_db < 0) throw std::invalid_argument("shadowing std must be >= 0");
}

Real pathloss_db(Real distance_km) {
  if (!(distance_km > 0)) throw std::domain_error("pathloss_db: distance must be > 0");
  return 128.1 + 37.6 * std::log10(distance_km);
}

Real noise_power(Real noise_density_w_per_hz, Real bandwidth_hz) {
  if (!(noise_density_w_per_hz > 0) || !(bandwidth_hz > 0))
    throw std::domain_error("noise_power: arguments must be > 0");
  return noise_density_w_per_hz * bandwidth_hz;
}

ChannelSet generate_scenario(const SystemParams& params, std::uint64_t seed) {
  params.validate();
  const int B = params.num_bs;
  const int M = params.antennas_per_bs;
  const int K = params.num_users;
  const Real d = params.inter_site_distance_km;

  ChannelSet cs;
  cs.seed = seed;
  cs.bs_xy.resize(B, 2);
  cs.user_xy.resize(K, 2);
  cs.pathloss_db_bk.resize(B, K);
  cs.shadow_db_bk.resize(B, K);
  cs.h.resize(K, B * M);

  // Fixed site geometry: adjacent sites d apart on a circle centred at the
  // origin; coverage disk is the circle through the sites.
  Real site_radius = (B >= 2) ? d / (2.0 * std::sin(kPi / B)) : 0.0;
  Real coverage_radius = (B >= 2) ? site_radius : d / 2.0;
  for (int b = 0; b < B; ++b) {
    Real ang = 2.0 * kPi * b / B + kPi / 2.0;
    cs.bs_xy(b, 0) = site_radius * std::cos(ang);
    cs.bs_xy(b, 1) = site_radius * std::sin(ang);
  }

  Rng geom(substream_seed(seed, kGeometry));
  for (int k = 0; k < K; ++k) {
    Real r = coverage_radius * std::sqrt(geom.uniform());
    Real ang = 2.0 * kPi * geom.uniform();
    cs.user_xy(k, 0) = r * std::cos(ang);
    cs.user_xy(k, 1) = r * std::sin(ang);
  }

  Rng shadow(substream_seed(seed, kShadowing));
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      Real dist = std::max(kMinDistanceKm,
                           (cs.bs_xy.row(b) - cs.user_xy.row(k)).norm());
      cs.pathloss_db_bk(b, k) = pathloss_db(dist);
      cs.shadow_db_bk(b, k) = params.shadowing_std_db * shadow.normal();
    }

  Rng fade(substream_seed(seed, kFading));
  for (int b = 0; b < B; ++b)
    for (int k = 0; k < K; ++k) {
      Real loss_db = cs.pathloss_db_bk(b, k) + cs.shadow_db_bk(b, k);
      Real amp = std::sqrt(std::pow(10.0, -loss_db / 10.0));
      for (int m = 0; m < M; ++m) {
        Real re = fade.normal() * std::sqrt(0.5);
        Real im = fade.normal() * std::sqrt(0.5);
        cs.h(k, b * M + m) = amp * Complex(re, im);
      }
    }

  return cs;
}

nlohmann::json scenario_to_json(const SystemParams& params, const ChannelSet& channels) {
  nlohmann::json j;
  j["params"] = {
      {"num_bs", params.num_bs},
      {"antennas_per_bs", params.antennas_per_bs},
      {"num_users", params.num_users},
      {"power_budget_w", params.power_budget_w},
      {"backhaul_cap_nats_per_use", params.backhaul_cap},
      {"sinr_target_linear", params.sinr_target},
      {"bandwidth_hz", params.bandwidth_hz},
      {"noise_density_w_per_hz", params.noise_density_w_per_hz},
      {"inter_site_distance_km", params.inter_site_distance_km},
      {"shadowing_std_db", params.shadowing_std_db},
  };
  j["seed"] = channels.seed;

  auto mat_to_json = [](const MatX& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
      rows.push_back(row);
    }
    return rows;
  };
  j["bs_xy_km"] = mat_to_json(channels.bs_xy);
  j["user_xy_km"] = mat_to_json(channels.user_xy);
  j["pathloss_db"] = mat_to_json(channels.pathloss_db_bk);
  j["shadow_db"] = mat_to_json(channels.shadow_db_bk);

  nlohmann::json hs = nlohmann::json::array();
  for (int k = 0; k < channels.h.rows(); ++k) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < channels.h.cols(); ++c)
      row.push_back({channels.h(k, c).real(), channels.h(k, c).imag()});
    hs.push_back(row);
  }
  j["channels"] = hs;
  return j;
}

std::pair<SystemParams, ChannelSet> scenario_from_json(const nlohmann::json& j) {
  SystemParams p;
  const auto& jp = j.at("params");
  p.num_bs = jp.at("num_bs").get<int>();
  p.antennas_per_bs = jp.at("antennas_per_bs").get<int>();
  p.num_users = jp.at("num_users").get<int>();
  p.power_budget_w = jp.at("power_budget_w").get<Real>();
  p.backhaul_cap = jp.at("backhaul_cap_nats_per_use").get<Real>();
  p.sinr_target = jp.at("sinr_target_linear").get<Real>();
  p.bandwidth_hz = jp.at("bandwidth_hz").get<Real>();
  p.noise_density_w_per_hz = jp.at("noise_density_w_per_hz").get<Real>();
  p.inter_site_distance_km = jp.at("inter_site_distance_km").get<Real>();
  p.shadowing_std_db = jp.at("shadowing_std_db").get<Real>();
  p.validate();

  ChannelSet cs;
  cs.seed = j.at("seed").get<std::uint64_t>();
  auto mat_from_json = [](const nlohmann::json& rows) {
    MatX m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c].get<Real>();
    return m;
  };
  cs.bs_xy = mat_from_json(j.at("bs_xy_km"));
  cs.user_xy = mat_from_json(j.at("user_xy_km"));
  cs.pathloss_db_bk = mat_from_json(j.at("pathloss_db"));
  cs.shadow_db_bk = mat_from_json(j.at("shadow_db"));

  const auto& hs = j.at("channels");
  cs.h.resize(hs.size(), hs.empty() ? 0 : hs[0].size());
  for (int k = 0; k < cs.h.rows(); ++k)
    for (int c = 0; c < cs.h.cols(); ++c)
      cs.h(k, c) = Complex(hs[k][c][0].get<Real>(), hs[k][c][1].get<Real>());

  if (cs.h.rows() != p.num_users || cs.h.cols() != p.num_bs * p.antennas_per_bs)
    throw std::invalid_argument("scenario_from_json: channel shape mismatch");
  for (int k = 0; k < cs.h.rows(); ++k) {
    if (!cs.h.row(k).allFinite())
      throw std::invalid_argument("scenario_from_json: non-finite channel entry");
    if (!(cs.h.row(k).norm() > 0))
      throw std::invalid_argument("scenario_from_json: degenerate zero channel");
  }
  return {p, cs};
}

}  // namespace combeam
