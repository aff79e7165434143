// SPDX-License-Identifier: Apache-2.0
//
// Field-response channel model for a base station with M movable transmit
// antennas serving K single-antenna users, each with one movable receive
// antenna. Positions are 2-D and measured in wavelengths; path-loss distances
// are in meters and enter only through the path-response gains.
#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "mamc/types.hpp"

namespace mamc {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// System parameters. Everything is linear-domain; dB/dBm conversion happens
/// in the JSON reader/writer.
struct SystemConfig {
  int num_tx = 4;                       // M
  std::vector<int> group_sizes{3};      // |G_n|, N = group_sizes.size()
  int num_paths = 5;                    // L (same on both ends)
  double region_size = 3.0;             // A, wavelengths
  double min_distance = 0.5;            // D, wavelengths
  double pmax_w = 0.031622776601683791; // 15 dBm
  double noise_w = 1e-11;               // -80 dBm, every user unless overridden
  std::vector<double> noise_override;   // per-user sigma_k^2, empty = uniform
  double weight = 1.0;                  // gamma_k, every user unless overridden
  std::vector<double> weight_override;
  double c0 = 1e-4;                     // -40 dB at 1 m
  double pathloss_exponent = 2.8;
  Vec2 bs_location{0.0, 0.0};
  Vec2 user_disk_center{60.0, 0.0};
  double user_disk_radius = 20.0;
  double epsilon = 1e-4;
  std::uint64_t rng_seed = 1;

  int num_groups() const { return static_cast<int>(group_sizes.size()); }
  int num_users() const;
  double noise(int k) const;
  double weight_of(int k) const;

  /// Throws ConfigError when an invariant fails, including the check that M
  /// antennas fit on a grid with spacing max(D, 1/2) inside the region.
  void validate() const;
};

/// Side length (in grid cells) of the initial transmit layout.
struct GridShape {
  int cols = 0;
  int rows = 0;
};
GridShape tx_grid_shape(int num_tx);

struct PathAngles {
  double theta = 0.0;  // elevation
  double phi = 0.0;    // azimuth
};

/// Unit propagation direction [cos(theta) sin(phi), sin(theta)].
Vec2 unit_direction(double theta, double phi);

/// One user's channel parameters.
struct UserChannel {
  std::vector<PathAngles> tx_angles;  // AoDs, size L_t
  std::vector<PathAngles> rx_angles;  // AoAs, size L_r
  std::vector<Vec2> tx_dirs;          // derived from tx_angles
  std::vector<Vec2> rx_dirs;          // derived from rx_angles
  CMatrix path_response;              // Sigma_k, L_r x L_t
  Vec2 location{0.0, 0.0};            // meters
  double distance = 1.0;              // meters
  int group = 0;

  void refresh_directions();
  int tx_paths() const { return static_cast<int>(tx_dirs.size()); }
  int rx_paths() const { return static_cast<int>(rx_dirs.size()); }
};

struct Scenario {
  SystemConfig config;
  std::vector<UserChannel> users;
  std::vector<std::vector<int>> groups;  // member users per group

  int num_users() const { return static_cast<int>(users.size()); }
  int num_groups() const { return static_cast<int>(groups.size()); }
  int num_tx() const { return config.num_tx; }

  /// Rebuilds `groups` from each user's group index and checks the partition.
  void rebuild_groups();
};

struct PositionState {
  std::vector<Vec2> tx;  // t_m
  std::vector<Vec2> rx;  // r_k
};

using Beamformers = std::vector<CVector>;

/// Field-response vector g_k(t) (or f_k(r) with receive directions).
CVector field_response(const Vec2& pos, const std::vector<Vec2>& dirs);
inline CVector tx_field_response(const Vec2& t, const UserChannel& u) {
  return field_response(t, u.tx_dirs);
}
inline CVector rx_field_response(const Vec2& r, const UserChannel& u) {
  return field_response(r, u.rx_dirs);
}

/// Channel vector h_k such that the received amplitude is h_k^H w.
CVector channel_vector(const Scenario& sc, const PositionState& pos, int k);

/// The row f_k^H Sigma_k G_k(t), i.e. h_k^H.
CVector channel_row(const Scenario& sc, const PositionState& pos, int k);

struct SinrReport {
  std::vector<double> sinr;         // per user
  std::vector<double> signal;       // |h_k^H w_n|^2
  std::vector<double> interference; // sum over q != n of |h_k^H w_q|^2
  double objective = 0.0;           // min_k sinr_k / gamma_k
};

SinrReport compute_min_weighted_sinr(const Scenario& sc, const PositionState& pos,
                                     const Beamformers& w);

/// Seeded generator plus substream derivation. One instance per realization.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  static Rng substream(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0);
  /// The seed substream() would use.
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0);

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double stddev) { return std::normal_distribution<double>(0.0, stddev)(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Draws one scenario: users uniform in the disk, angles uniform on
/// [-pi/2, pi/2], diagonal Sigma_k with CN(0, c_k^2 / L) entries,
/// c_k^2 = C0 d_k^-alpha.
Scenario sample_scenario(const SystemConfig& cfg, Rng& rng);

/// Average channel power gain c_k^2 at distance d (meters).
double average_gain(const SystemConfig& cfg, double distance);

/// Checks region bounds and minimum distance. `check_tx_region` is off for
/// fixed-position layouts.
struct FeasibilityReport {
  double max_tx_coord = 0.0;
  double max_rx_coord = 0.0;
  double min_tx_distance = 0.0;
  bool ok = true;
};
FeasibilityReport check_positions(const SystemConfig& cfg, const PositionState& pos,
                                  double tol = 1e-9, bool check_tx_region = true,
                                  bool check_rx_region = true);

double total_power(const Beamformers& w);

}  // namespace mamc
