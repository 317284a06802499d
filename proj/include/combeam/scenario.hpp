// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "combeam/types.hpp"
#include "json.hpp"

namespace combeam {

// All scalar system constants.  Rates and the backhaul cap are kept in
// nats per channel use internally; conversions from I/O units (dBm, MHz,
// Mnats/s) happen once in the config layer.
struct SystemParams {
  int num_bs = 3;              // B
  int antennas_per_bs = 4;     // M
  int num_users = 6;           // K
  Real power_budget_w = 39.810717055349734;  // P-bar, 46 dBm
  Real backhaul_cap = 20.0;    // C-bar [nats/use]
  Real sinr_target = 1.0;      // gamma0-bar, linear
  Real bandwidth_hz = 1e7;     // W
  Real noise_density_w_per_hz = 3.9810717055349695e-21;  // N0, -174 dBm/Hz
  Real inter_site_distance_km = 1.0;
  Real shadowing_std_db = 8.0;

  int num_links() const { return num_bs * num_users; }
  Real noise_power_w() const { return bandwidth_hz * noise_density_w_per_hz; }
  void validate() const;  // throws std::invalid_argument on bad values
};

// Channel realization for one instance.  Row k of `h` is the aggregate
// 1 x (B*M) channel of user k, blocks of M per BS in BS order.
struct ChannelSet {
  MatXc h;            // K x (B*M)
  std::uint64_t seed = 0;
  MatX bs_xy;         // B x 2 [km]
  MatX user_xy;       // K x 2 [km]
  MatX pathloss_db_bk;  // B x K [dB]
  MatX shadow_db_bk;    // B x K [dB]

  Real user_channel_norm_sq(int k) const { return h.row(k).squaredNorm(); }
};

// PL(dB) = 128.1 + 37.6 log10(d), d in km.  Throws std::domain_error for
// nonpositive distance.
Real pathloss_db(Real distance_km);

// W * N0 in watts.  Throws std::domain_error unless both are positive.
Real noise_power(Real noise_density_w_per_hz, Real bandwidth_hz);

// Deterministic instance generation.  BS sites sit on a circle with adjacent
// spacing equal to the inter-site distance (an equilateral triangle for B=3,
// a segment for B=2, the origin for B=1); users are uniform in the disk
// through the sites.  Geometry, shadowing and fading use independent
// substreams of `seed`, so identical (params, seed) reproduce the ChannelSet
// bit for bit on any platform.
ChannelSet generate_scenario(const SystemParams& params, std::uint64_t seed);

// JSON round trip, SI units, channel entries as (re, im) pairs.
nlohmann::json scenario_to_json(const SystemParams& params, const ChannelSet& channels);
std::pair<SystemParams, ChannelSet> scenario_from_json(const nlohmann::json& j);

}  // namespace combeam
