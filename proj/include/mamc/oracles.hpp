// SPDX-License-Identifier: Apache-2.0
//
// Brute-force and closed-form reference values. Nothing here uses the cosine
// expansions or the conic solver, so agreement with them is real evidence.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mamc/channel_model.hpp"

namespace mamc::oracle {

using ScalarField = std::function<double(const Vec2&)>;

/// Central differences, step h in wavelengths.
Vec2 finite_diff_gradient(const ScalarField& f, const Vec2& x, double h = 1e-6);
Mat2 finite_diff_hessian(const ScalarField& f, const Vec2& x, double h = 1e-4);

struct Region {
  Vec2 lo{-1.0, -1.0};
  Vec2 hi{1.0, 1.0};
};

struct GridResult {
  Vec2 argmax{0.0, 0.0};
  double max = 0.0;
  std::size_t cells = 0;
};

class GridTooLarge : public std::length_error {
 public:
  using std::length_error::length_error;
};

inline constexpr std::size_t kDefaultCellCap = 50'000'000;

/// Exhaustive scan of lo + resolution * (i, j). Ties go to the
/// lexicographically smallest point (x first, then y).
GridResult grid_search_position(const ScalarField& f, const Region& region, double resolution,
                                std::size_t cell_cap = kDefaultCellCap, int threads = 1);

/// Same scan with a batched evaluator: `eval(xs, ys, out)` fills one column.
using BatchField = std::function<void(std::span<const double>, std::span<const double>, std::span<double>)>;
GridResult grid_search_position(const BatchField& eval, const Region& region, double resolution,
                                std::size_t cell_cap = kDefaultCellCap, int threads = 1);

/// K = 1 optimum for fixed positions: Pmax ||h||^2 / sigma^2.
double mrt_value(const CVector& h, double pmax, double sigma2);

/// M = 1 optimum: Pmax min_k |h_k|^2 / (gamma_k sigma_k^2).
double scalar_beamformer_value(const std::vector<cdouble>& h, const std::vector<double>& gamma,
                               double pmax, const std::vector<double>& sigma2);

/// Max-min weighted SNR for users with mutually orthogonal channels, one per
/// group: maximize min_n p_n g_n subject to sum p_n <= Pmax, where
/// g_n = ||h_n||^2 / (gamma_n sigma_n^2). Solved by bisection on the level.
double orthogonal_power_split(const std::vector<double>& gains, double pmax);

/// |f(r)^H Sigma G(t) w|^2 assembled term by term with explicit phases.
double direct_signal_power(const UserChannel& u, const std::vector<Vec2>& tx, const Vec2& rx,
                           const CVector& w);

}  // namespace mamc::oracle
