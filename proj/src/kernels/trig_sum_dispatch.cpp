// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string>

#include "mamc/kernels/trig_sum.hpp"

namespace mamc::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(MAMC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() {
  if (const char* env = std::getenv("MAMC_SIMD"); env && std::string(env) == "scalar") {
    return Backend::Scalar;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{detect()};
  return slot;
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  return b == Backend::Scalar || (b == Backend::Avx2 && cpu_has_avx2());
}

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

void set_active_backend(Backend b) {
  if (!backend_available(b)) b = Backend::Scalar;
  backend_slot().store(b, std::memory_order_relaxed);
}

TrigEval evaluate(const TrigTerms& terms, double x, double y) {
#if defined(MAMC_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::evaluate(terms, x, y);
#endif
  return scalar::evaluate(terms, x, y);
}

double value(const TrigTerms& terms, double x, double y) { return evaluate(terms, x, y).value; }

void values_batch(const TrigTerms& terms, std::span<const double> xs,
                  std::span<const double> ys, std::span<double> out) {
#if defined(MAMC_HAVE_AVX2)
  if (active_backend() == Backend::Avx2) return avx2::values_batch(terms, xs, ys, out);
#endif
  scalar::values_batch(terms, xs, ys, out);
}

}  // namespace mamc::kernels
