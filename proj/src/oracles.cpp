// SPDX-License-Identifier: Apache-2.0
#include "mamc/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace mamc::oracle {

Vec2 finite_diff_gradient(const ScalarField& f, const Vec2& x, double h) {
  const Vec2 ex(h, 0.0), ey(0.0, h);
  return Vec2((f(x + ex) - f(x - ex)) / (2.0 * h), (f(x + ey) - f(x - ey)) / (2.0 * h));
}

Mat2 finite_diff_hessian(const ScalarField& f, const Vec2& x, double h) {
  const Vec2 ex(h, 0.0), ey(0.0, h);
  const double f0 = f(x);
  const double hxx = (f(x + ex) - 2.0 * f0 + f(x - ex)) / (h * h);
  const double hyy = (f(x + ey) - 2.0 * f0 + f(x - ey)) / (h * h);
  const double hxy = (f(x + ex + ey) - f(x + ex - ey) - f(x - ex + ey) + f(x - ex - ey)) / (4.0 * h * h);
  Mat2 H;
  H << hxx, hxy, hxy, hyy;
  return H;
}

namespace {

struct Lattice {
  std::size_t nx = 0;
  std::size_t ny = 0;
};

Lattice make_lattice(const Region& region, double resolution, std::size_t cell_cap) {
  if (!(resolution > 0.0)) throw std::invalid_argument("grid_search_position: resolution must be positive");
  const Vec2 span = region.hi - region.lo;
  if (!(span.x() >= 0.0) || !(span.y() >= 0.0) || !span.allFinite()) {
    throw std::invalid_argument("grid_search_position: region must be bounded with lo <= hi");
  }
  const double cx = std::floor(span.x() / resolution + 1e-9) + 1.0;
  const double cy = std::floor(span.y() / resolution + 1e-9) + 1.0;
  if (cx * cy > static_cast<double>(cell_cap)) {
    throw GridTooLarge("grid_search_position: lattice exceeds the cell cap");
  }
  return {static_cast<std::size_t>(cx), static_cast<std::size_t>(cy)};
}

// Runs `column(i, best)` for every x index, sharded across threads. Shards are
// contiguous and merged in order with a strict comparison, so the tie-break
// matches a single-threaded scan.
template <typename ColumnFn>
GridResult scan(const Lattice& lat, int threads, ColumnFn column) {
  const std::size_t shards = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, lat.nx);
  std::vector<GridResult> best(shards);
  for (auto& b : best) b.max = -std::numeric_limits<double>::infinity();
  auto work = [&](std::size_t s) {
    const std::size_t begin = lat.nx * s / shards;
    const std::size_t end = lat.nx * (s + 1) / shards;
    for (std::size_t i = begin; i < end; ++i) column(i, best[s]);
  };
  if (shards == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t s = 0; s < shards; ++s) pool.emplace_back(work, s);
    for (auto& t : pool) t.join();
  }
  GridResult out = best[0];
  for (std::size_t s = 1; s < shards; ++s) {
    if (best[s].max > out.max) out = best[s];
  }
  out.cells = lat.nx * lat.ny;
  return out;
}

}  // namespace

GridResult grid_search_position(const ScalarField& f, const Region& region, double resolution,
                                std::size_t cell_cap, int threads) {
  const Lattice lat = make_lattice(region, resolution, cell_cap);
  return scan(lat, threads, [&](std::size_t i, GridResult& best) {
    const double x = region.lo.x() + resolution * static_cast<double>(i);
    for (std::size_t j = 0; j < lat.ny; ++j) {
      const Vec2 p(x, region.lo.y() + resolution * static_cast<double>(j));
      const double v = f(p);
      if (v > best.max) {
        best.max = v;
        best.argmax = p;
      }
    }
  });
}

GridResult grid_search_position(const BatchField& eval, const Region& region, double resolution,
                                std::size_t cell_cap, int threads) {
  const Lattice lat = make_lattice(region, resolution, cell_cap);
  return scan(lat, threads, [&](std::size_t i, GridResult& best) {
    const double x = region.lo.x() + resolution * static_cast<double>(i);
    std::vector<double> xs(lat.ny, x), ys(lat.ny), out(lat.ny);
    for (std::size_t j = 0; j < lat.ny; ++j) ys[j] = region.lo.y() + resolution * static_cast<double>(j);
    eval(xs, ys, out);
    for (std::size_t j = 0; j < lat.ny; ++j) {
      if (out[j] > best.max) {
        best.max = out[j];
        best.argmax = Vec2(x, ys[j]);
      }
    }
  });
}

double mrt_value(const CVector& h, double pmax, double sigma2) {
  return pmax * h.squaredNorm() / sigma2;
}

double scalar_beamformer_value(const std::vector<cdouble>& h, const std::vector<double>& gamma,
                               double pmax, const std::vector<double>& sigma2) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < h.size(); ++k) {
    best = std::min(best, pmax * std::norm(h[k]) / (gamma[k] * sigma2[k]));
  }
  return h.empty() ? 0.0 : best;
}

double orthogonal_power_split(const std::vector<double>& gains, double pmax) {
  // Level eta is achievable iff sum_n eta / g_n <= Pmax.
  auto power_needed = [&](double eta) {
    double p = 0.0;
    for (double g : gains) p += eta / g;
    return p;
  };
  double lo = 0.0;
  double hi = pmax * *std::max_element(gains.begin(), gains.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (power_needed(mid) <= pmax) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double direct_signal_power(const UserChannel& u, const std::vector<Vec2>& tx, const Vec2& rx,
                           const CVector& w) {
  // sum_m sum_{j,i} conj(f_j) Sigma_ji g_i(t_m) w_m with f_j, g_i written out.
  cdouble amp(0.0, 0.0);
  const auto Lr = u.rx_angles.size();
  const auto Lt = u.tx_angles.size();
  for (std::size_t m = 0; m < tx.size(); ++m) {
    for (std::size_t j = 0; j < Lr; ++j) {
      const double ar_x = std::cos(u.rx_angles[j].theta) * std::sin(u.rx_angles[j].phi);
      const double ar_y = std::sin(u.rx_angles[j].theta);
      const double rho = 2.0 * M_PI * (rx.x() * ar_x + rx.y() * ar_y);
      const cdouble f_conj = std::polar(1.0, -rho);
      for (std::size_t i = 0; i < Lt; ++i) {
        const double at_x = std::cos(u.tx_angles[i].theta) * std::sin(u.tx_angles[i].phi);
        const double at_y = std::sin(u.tx_angles[i].theta);
        const double phase = 2.0 * M_PI * (tx[m].x() * at_x + tx[m].y() * at_y);
        amp += f_conj * u.path_response(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) *
               std::polar(1.0, phase) * w[static_cast<Eigen::Index>(m)];
      }
    }
  }
  return std::norm(amp);
}

}  // namespace mamc::oracle
