// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

namespace mamc {

using cdouble = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Wavelength is normalized; all positions and region sizes are in wavelengths.
inline constexpr double kWavelength = 1.0;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Phase convention: arg(0) is taken as 0.
inline double safe_arg(cdouble z) {
  return (z.real() == 0.0 && z.imag() == 0.0) ? 0.0 : std::arg(z);
}

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace mamc
