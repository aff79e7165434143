// SPDX-License-Identifier: Apache-2.0
#include "mamc/kernels/trig_sum.hpp"

#include <cassert>
#include <cmath>

namespace mamc::kernels {

void TrigTerms::reserve(std::size_t n) {
  amp.reserve(n);
  kx.reserve(n);
  ky.reserve(n);
  phase.reserve(n);
}

void TrigTerms::push(double a, double wave_x, double wave_y, double ph) {
  amp.push_back(a);
  kx.push_back(wave_x);
  ky.push_back(wave_y);
  phase.push_back(ph);
}

namespace scalar {

TrigEval evaluate(const TrigTerms& terms, double x, double y) {
  TrigEval r;
  r.value = terms.constant;
  const std::size_t n = terms.size();
  for (std::size_t p = 0; p < n; ++p) {
    const double arg = terms.kx[p] * x + terms.ky[p] * y + terms.phase[p];
    const double c = std::cos(arg);
    const double s = std::sin(arg);
    const double a = terms.amp[p];
    const double kx = terms.kx[p];
    const double ky = terms.ky[p];
    r.value += a * c;
    r.grad_x -= a * s * kx;
    r.grad_y -= a * s * ky;
    r.hess_xx -= a * c * kx * kx;
    r.hess_xy -= a * c * kx * ky;
    r.hess_yy -= a * c * ky * ky;
  }
  return r;
}

void values_batch(const TrigTerms& terms, std::span<const double> xs,
                  std::span<const double> ys, std::span<double> out) {
  assert(xs.size() == ys.size() && out.size() == xs.size());
  const std::size_t n = terms.size();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double acc = terms.constant;
    for (std::size_t p = 0; p < n; ++p) {
      acc += terms.amp[p] * std::cos(terms.kx[p] * xs[i] + terms.ky[p] * ys[i] + terms.phase[p]);
    }
    out[i] = acc;
  }
}

void sincos(std::span<const double> in, std::span<double> s, std::span<double> c) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    s[i] = std::sin(in[i]);
    c[i] = std::cos(in[i]);
  }
}

}  // namespace scalar
}  // namespace mamc::kernels
