// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"
#include "mamc/kernels/trig_sum.hpp"

using namespace mamc::kernels;

namespace {

TrigTerms random_terms(std::size_t n, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> a(0.0, 2.0), k(-12.0, 12.0), ph(-3.2, 3.2);
  TrigTerms t;
  for (std::size_t i = 0; i < n; ++i) t.push(a(gen), k(gen), k(gen), ph(gen));
  t.constant = a(gen);
  return t;
}

TrigEval naive(const TrigTerms& t, double x, double y) {
  TrigEval e;
  e.value = t.constant;
  for (std::size_t p = 0; p < t.size(); ++p) {
    const double arg = t.kx[p] * x + t.ky[p] * y + t.phase[p];
    const double c = std::cos(arg), s = std::sin(arg);
    e.value += t.amp[p] * c;
    e.grad_x -= t.amp[p] * t.kx[p] * s;
    e.grad_y -= t.amp[p] * t.ky[p] * s;
    e.hess_xx -= t.amp[p] * t.kx[p] * t.kx[p] * c;
    e.hess_xy -= t.amp[p] * t.kx[p] * t.ky[p] * c;
    e.hess_yy -= t.amp[p] * t.ky[p] * t.ky[p] * c;
  }
  return e;
}

double scale_of(const TrigTerms& t) {
  double s = std::abs(t.constant);
  for (std::size_t p = 0; p < t.size(); ++p) s += t.amp[p] * (1.0 + t.kx[p] * t.kx[p] + t.ky[p] * t.ky[p]);
  return s;
}

void check_close(const TrigEval& a, const TrigEval& b, double tol) {
  CHECK(std::abs(a.value - b.value) <= tol);
  CHECK(std::abs(a.grad_x - b.grad_x) <= tol);
  CHECK(std::abs(a.grad_y - b.grad_y) <= tol);
  CHECK(std::abs(a.hess_xx - b.hess_xx) <= tol);
  CHECK(std::abs(a.hess_xy - b.hess_xy) <= tol);
  CHECK(std::abs(a.hess_yy - b.hess_yy) <= tol);
}

}  // namespace

TEST_CASE("scalar kernel matches the naive sum") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u}) {
    const TrigTerms t = random_terms(n, gen);
    for (int i = 0; i < 20; ++i) {
      const double x = pos(gen), y = pos(gen);
      check_close(scalar::evaluate(t, x, y), naive(t, x, y), 1e-12 * scale_of(t));
    }
  }
}

TEST_CASE("scalar sincos matches the standard library") {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> d(-200.0, 200.0);
  std::vector<double> in(257), s(257), c(257);
  for (auto& v : in) v = d(gen);
  scalar::sincos(in, s, c);
  for (std::size_t i = 0; i < in.size(); ++i) {
    CHECK(std::abs(s[i] - std::sin(in[i])) <= 1e-14);
    CHECK(std::abs(c[i] - std::cos(in[i])) <= 1e-14);
  }
}

#if defined(MAMC_HAVE_AVX2)
TEST_CASE("AVX2 kernels match the scalar kernels") {
  if (!backend_available(Backend::Avx2)) {
    MESSAGE("AVX2 not supported by this CPU; equivalence test skipped");
    return;
  }
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> pos(-5.0, 5.0);
  SUBCASE("evaluate") {
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 8u, 15u, 64u}) {
      const TrigTerms t = random_terms(n, gen);
      for (int i = 0; i < 50; ++i) {
        const double x = pos(gen), y = pos(gen);
        check_close(avx2::evaluate(t, x, y), scalar::evaluate(t, x, y), 1e-12 * scale_of(t));
      }
    }
  }
  SUBCASE("values_batch including ragged tails") {
    for (std::size_t n : {1u, 6u, 21u}) {
      const TrigTerms t = random_terms(n, gen);
      for (std::size_t pts : {1u, 3u, 4u, 9u, 130u}) {
        std::vector<double> xs(pts), ys(pts), a(pts), b(pts);
        for (std::size_t i = 0; i < pts; ++i) {
          xs[i] = pos(gen);
          ys[i] = pos(gen);
        }
        avx2::values_batch(t, xs, ys, a);
        scalar::values_batch(t, xs, ys, b);
        for (std::size_t i = 0; i < pts; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12 * scale_of(t));
      }
    }
  }
  SUBCASE("sincos") {
    std::uniform_real_distribution<double> d(-1e3, 1e3);
    std::vector<double> in(1001), s1(1001), c1(1001), s2(1001), c2(1001);
    for (auto& v : in) v = d(gen);
    in[0] = 0.0;
    in[1] = -0.0;
    avx2::sincos(in, s1, c1);
    scalar::sincos(in, s2, c2);
    for (std::size_t i = 0; i < in.size(); ++i) {
      CHECK(std::abs(s1[i] - s2[i]) <= 1e-14);
      CHECK(std::abs(c1[i] - c2[i]) <= 1e-14);
    }
  }
}
#endif

TEST_CASE("dispatch follows the selected backend") {
  const Backend before = active_backend();
  set_active_backend(Backend::Scalar);
  CHECK(active_backend() == Backend::Scalar);
  std::mt19937_64 gen(4);
  const TrigTerms t = random_terms(9, gen);
  const TrigEval e = evaluate(t, 0.3, -1.1);
  const TrigEval r = scalar::evaluate(t, 0.3, -1.1);
  CHECK(e.value == r.value);
  CHECK(value(t, 0.3, -1.1) == doctest::Approx(r.value).epsilon(1e-14));
  set_active_backend(before);
  CHECK(backend_name(Backend::Scalar) == "scalar");
}
