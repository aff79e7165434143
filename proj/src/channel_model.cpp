// SPDX-License-Identifier: Apache-2.0
#include "mamc/channel_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace mamc {

int SystemConfig::num_users() const {
  int k = 0;
  for (int g : group_sizes) k += g;
  return k;
}

double SystemConfig::noise(int k) const {
  return noise_override.empty() ? noise_w : noise_override.at(static_cast<std::size_t>(k));
}

double SystemConfig::weight_of(int k) const {
  return weight_override.empty() ? weight : weight_override.at(static_cast<std::size_t>(k));
}

GridShape tx_grid_shape(int num_tx) {
  GridShape g;
  g.cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(num_tx)) - 1e-12));
  g.cols = std::max(g.cols, 1);
  g.rows = (num_tx + g.cols - 1) / g.cols;
  return g;
}

void SystemConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("invalid config: " + what); };
  if (num_tx < 1) fail("M must be >= 1");
  if (group_sizes.empty()) fail("at least one group is required");
  for (int g : group_sizes) {
    if (g < 1) fail("every group needs at least one user");
  }
  if (num_paths < 1) fail("L must be >= 1");
  if (!(region_size > 0.0)) fail("A must be positive");
  if (!(min_distance > 0.0)) fail("D must be positive");
  if (!(pmax_w > 0.0)) fail("Pmax must be positive");
  if (!(noise_w > 0.0)) fail("noise power must be positive");
  if (!(weight > 0.0)) fail("weights must be positive");
  const auto k = static_cast<std::size_t>(num_users());
  if (!noise_override.empty()) {
    if (noise_override.size() != k) fail("noise_override must have K entries");
    for (double s : noise_override) {
      if (!(s > 0.0)) fail("noise power must be positive");
    }
  }
  if (!weight_override.empty()) {
    if (weight_override.size() != k) fail("weight_override must have K entries");
    for (double g : weight_override) {
      if (!(g > 0.0)) fail("weights must be positive");
    }
  }
  if (!(c0 > 0.0)) fail("C0 must be positive");
  if (!(pathloss_exponent >= 0.0)) fail("path-loss exponent must be non-negative");
  if (!(user_disk_radius >= 0.0)) fail("user disk radius must be non-negative");
  if (!(epsilon > 0.0)) fail("epsilon must be positive");
  const GridShape g = tx_grid_shape(num_tx);
  const double spacing = std::max(min_distance, 0.5 * kWavelength);
  if ((g.cols - 1) * spacing > region_size + 1e-12 || (g.rows - 1) * spacing > region_size + 1e-12) {
    fail("M = " + std::to_string(num_tx) + " antennas at spacing " + std::to_string(spacing) +
         " do not fit in region A = " + std::to_string(region_size));
  }
}

Vec2 unit_direction(double theta, double phi) {
  return Vec2(std::cos(theta) * std::sin(phi), std::sin(theta));
}

void UserChannel::refresh_directions() {
  tx_dirs.clear();
  rx_dirs.clear();
  for (const auto& a : tx_angles) tx_dirs.push_back(unit_direction(a.theta, a.phi));
  for (const auto& a : rx_angles) rx_dirs.push_back(unit_direction(a.theta, a.phi));
}

void Scenario::rebuild_groups() {
  groups.assign(static_cast<std::size_t>(config.num_groups()), {});
  for (int k = 0; k < num_users(); ++k) {
    const int g = users[static_cast<std::size_t>(k)].group;
    if (g < 0 || g >= config.num_groups()) {
      throw ConfigError("user " + std::to_string(k) + " has invalid group " + std::to_string(g));
    }
    groups[static_cast<std::size_t>(g)].push_back(k);
  }
}

CVector field_response(const Vec2& pos, const std::vector<Vec2>& dirs) {
  CVector g(static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double ph = kTwoPi / kWavelength * pos.dot(dirs[i]);
    g[static_cast<Eigen::Index>(i)] = cdouble(std::cos(ph), std::sin(ph));
  }
  return g;
}

CVector channel_row(const Scenario& sc, const PositionState& pos, int k) {
  const UserChannel& u = sc.users[static_cast<std::size_t>(k)];
  const CVector f = rx_field_response(pos.rx[static_cast<std::size_t>(k)], u);
  // b^H = f^H Sigma
  const CVector b_conj = (f.adjoint() * u.path_response).transpose();
  CVector row(sc.num_tx());
  for (int m = 0; m < sc.num_tx(); ++m) {
    row[m] = b_conj.cwiseProduct(tx_field_response(pos.tx[static_cast<std::size_t>(m)], u)).sum();
  }
  return row;
}

CVector channel_vector(const Scenario& sc, const PositionState& pos, int k) {
  return channel_row(sc, pos, k).conjugate();
}

SinrReport compute_min_weighted_sinr(const Scenario& sc, const PositionState& pos,
                                     const Beamformers& w) {
  const int K = sc.num_users();
  SinrReport rep;
  rep.sinr.resize(static_cast<std::size_t>(K));
  rep.signal.resize(static_cast<std::size_t>(K));
  rep.interference.resize(static_cast<std::size_t>(K));
  rep.objective = std::numeric_limits<double>::infinity();
  for (int k = 0; k < K; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const CVector row = channel_row(sc, pos, k);
    const int n = sc.users[ku].group;
    double interference = 0.0;
    double signal = 0.0;
    for (int q = 0; q < static_cast<int>(w.size()); ++q) {
      // h^H w = row^T w
      const double p = std::norm(row.cwiseProduct(w[static_cast<std::size_t>(q)]).sum());
      if (q == n) {
        signal = p;
      } else {
        interference += p;
      }
    }
    rep.signal[ku] = signal;
    rep.interference[ku] = interference;
    rep.sinr[ku] = signal / (interference + sc.config.noise(k));
    rep.objective = std::min(rep.objective, rep.sinr[ku] / sc.config.weight_of(k));
  }
  if (K == 0) rep.objective = 0.0;
  return rep;
}

std::uint64_t Rng::derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  std::mt19937_64 engine(seq);
  return engine();
}

Rng Rng::substream(std::uint64_t master, std::uint64_t index, std::uint64_t tag) {
  return Rng(derive_seed(master, index, tag));
}

double average_gain(const SystemConfig& cfg, double distance) {
  return cfg.c0 * std::pow(distance, -cfg.pathloss_exponent);
}

Scenario sample_scenario(const SystemConfig& cfg, Rng& rng) {
  cfg.validate();
  Scenario sc;
  sc.config = cfg;
  const int L = cfg.num_paths;
  const double half_pi = 0.5 * std::numbers::pi;
  int group = 0;
  int left_in_group = cfg.group_sizes.front();
  for (int k = 0; k < cfg.num_users(); ++k) {
    while (left_in_group == 0) {
      ++group;
      left_in_group = cfg.group_sizes[static_cast<std::size_t>(group)];
    }
    --left_in_group;

    UserChannel u;
    u.group = group;
    double d = 0.0;
    do {
      const double rad = cfg.user_disk_radius * std::sqrt(rng.uniform(0.0, 1.0));
      const double ang = rng.uniform(0.0, kTwoPi);
      u.location = cfg.user_disk_center + rad * Vec2(std::cos(ang), std::sin(ang));
      d = (u.location - cfg.bs_location).norm();
    } while (!(d > 0.0));
    u.distance = d;

    u.tx_angles.resize(static_cast<std::size_t>(L));
    u.rx_angles.resize(static_cast<std::size_t>(L));
    for (auto& a : u.tx_angles) {
      a.theta = rng.uniform(-half_pi, half_pi);
      a.phi = rng.uniform(-half_pi, half_pi);
    }
    for (auto& a : u.rx_angles) {
      a.theta = rng.uniform(-half_pi, half_pi);
      a.phi = rng.uniform(-half_pi, half_pi);
    }
    u.refresh_directions();

    const double var = average_gain(cfg, d) / L;
    const double sd = std::sqrt(0.5 * var);
    u.path_response = CMatrix::Zero(L, L);
    for (int l = 0; l < L; ++l) {
      const double re = rng.normal(sd);
      const double im = rng.normal(sd);
      u.path_response(l, l) = cdouble(re, im);
    }
    sc.users.push_back(std::move(u));
  }
  sc.rebuild_groups();
  return sc;
}

FeasibilityReport check_positions(const SystemConfig& cfg, const PositionState& pos, double tol,
                                  bool check_tx_region, bool check_rx_region) {
  FeasibilityReport rep;
  const double half = 0.5 * cfg.region_size;
  for (const auto& t : pos.tx) rep.max_tx_coord = std::max(rep.max_tx_coord, t.cwiseAbs().maxCoeff());
  for (const auto& r : pos.rx) rep.max_rx_coord = std::max(rep.max_rx_coord, r.cwiseAbs().maxCoeff());
  rep.min_tx_distance = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < pos.tx.size(); ++m) {
    for (std::size_t p = m + 1; p < pos.tx.size(); ++p) {
      rep.min_tx_distance = std::min(rep.min_tx_distance, (pos.tx[m] - pos.tx[p]).norm());
    }
  }
  if (check_tx_region && rep.max_tx_coord > half + tol) rep.ok = false;
  if (check_rx_region && rep.max_rx_coord > half + tol) rep.ok = false;
  if (pos.tx.size() > 1 && rep.min_tx_distance < cfg.min_distance - tol) rep.ok = false;
  return rep;
}

double total_power(const Beamformers& w) {
  double p = 0.0;
  for (const auto& v : w) p += v.squaredNorm();
  return p;
}

}  // namespace mamc
