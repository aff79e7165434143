// SPDX-License-Identifier: Apache-2.0
//
// Cosine-sum kernels.
//
// Every signal-power expansion used by the position updates has the form
//
//   f(x) = c0 + sum_p amp[p] * cos(kx[p] * x + ky[p] * y + phase[p])
//
// with amp[p] >= 0. The kernels evaluate f, its gradient and Hessian at one
// point (vectorized over terms) or the value at many points (vectorized over
// points). A scalar reference implementation is always available; an AVX2+FMA
// variant is selected at runtime when the CPU supports it.
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mamc::kernels {

/// Structure-of-arrays term list. All four arrays have equal length.
struct TrigTerms {
  std::vector<double> amp;
  std::vector<double> kx;
  std::vector<double> ky;
  std::vector<double> phase;
  double constant = 0.0;

  std::size_t size() const { return amp.size(); }
  void reserve(std::size_t n);
  void push(double a, double wave_x, double wave_y, double ph);
};

struct TrigEval {
  double value = 0.0;
  double grad_x = 0.0;
  double grad_y = 0.0;
  double hess_xx = 0.0;
  double hess_xy = 0.0;
  double hess_yy = 0.0;
};

enum class Backend { Scalar, Avx2 };

std::string_view backend_name(Backend b);

/// True when the running CPU and the build both support `b`.
bool backend_available(Backend b);

/// Backend used by the dispatching entry points. Initialized from the CPU
/// features on first use; the environment variable MAMC_SIMD=scalar forces
/// the scalar path.
Backend active_backend();
void set_active_backend(Backend b);

// Dispatching entry points.
TrigEval evaluate(const TrigTerms& terms, double x, double y);
double value(const TrigTerms& terms, double x, double y);
void values_batch(const TrigTerms& terms, std::span<const double> xs,
                  std::span<const double> ys, std::span<double> out);

// Fixed-backend entry points (used by equivalence tests).
namespace scalar {
TrigEval evaluate(const TrigTerms& terms, double x, double y);
void values_batch(const TrigTerms& terms, std::span<const double> xs,
                  std::span<const double> ys, std::span<double> out);
void sincos(std::span<const double> in, std::span<double> s, std::span<double> c);
}  // namespace scalar

#if defined(MAMC_HAVE_AVX2)
namespace avx2 {
TrigEval evaluate(const TrigTerms& terms, double x, double y);
void values_batch(const TrigTerms& terms, std::span<const double> xs,
                  std::span<const double> ys, std::span<double> out);
void sincos(std::span<const double> in, std::span<double> s, std::span<double> c);
}  // namespace avx2
#endif

}  // namespace mamc::kernels
