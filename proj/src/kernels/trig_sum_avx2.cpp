// SPDX-License-Identifier: Apache-2.0
//
// AVX2 + FMA variants of the cosine-sum kernels. Compiled with -mavx2 -mfma;
// only reached through the dispatcher after a CPU feature check.
#include "mamc/kernels/trig_sum.hpp"

#include <immintrin.h>

#include <array>
#include <cassert>
#include <cmath>

namespace mamc::kernels::avx2 {
namespace {

// pi/2 split so that q * kPio2Hi is exact inside an FMA.
constexpr double kTwoOverPi = 0.63661977236758134308;
constexpr double kPio2Hi = 1.57079632679489655800e+00;
constexpr double kPio2Lo = 6.12323399573676603587e-17;

// Minimax coefficients on [-pi/4, pi/4] (fdlibm __kernel_sin / __kernel_cos).
constexpr double S1 = -1.66666666666666324348e-01;
constexpr double S2 = 8.33333333332248946124e-03;
constexpr double S3 = -1.98412698298579493134e-04;
constexpr double S4 = 2.75573137070700676789e-06;
constexpr double S5 = -2.50507602534068634195e-08;
constexpr double S6 = 1.58969099521155010221e-10;
constexpr double C1 = 4.16666666666666019037e-02;
constexpr double C2 = -1.38888888888741095749e-03;
constexpr double C3 = 2.48015872894767294178e-05;
constexpr double C4 = -2.75573143513906633035e-07;
constexpr double C5 = 2.08757232129817482790e-09;
constexpr double C6 = -1.13596475577881948265e-11;

inline void sincos_pd(__m256d x, __m256d& out_sin, __m256d& out_cos) {
  const __m256d q = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Hi), x);
  r = _mm256_fnmadd_pd(q, _mm256_set1_pd(kPio2Lo), r);

  const __m256d z = _mm256_mul_pd(r, r);

  __m256d ps = _mm256_set1_pd(S6);
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(S5));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(S4));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(S3));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(S2));
  ps = _mm256_fmadd_pd(ps, z, _mm256_set1_pd(S1));
  const __m256d s = _mm256_fmadd_pd(_mm256_mul_pd(z, r), ps, r);

  __m256d pc = _mm256_set1_pd(C6);
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(C5));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(C4));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(C3));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(C2));
  pc = _mm256_fmadd_pd(pc, z, _mm256_set1_pd(C1));
  const __m256d c = _mm256_fmadd_pd(_mm256_mul_pd(z, z), pc,
                                    _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, _mm256_set1_pd(1.0)));

  // quadrant = q mod 4, kept in floating point
  const __m256d quad = _mm256_fnmadd_pd(
      _mm256_set1_pd(4.0),
      _mm256_floor_pd(_mm256_mul_pd(q, _mm256_set1_pd(0.25))), q);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d two = _mm256_set1_pd(2.0);
  const __m256d three = _mm256_set1_pd(3.0);
  const __m256d is1 = _mm256_cmp_pd(quad, one, _CMP_EQ_OQ);
  const __m256d is2 = _mm256_cmp_pd(quad, two, _CMP_EQ_OQ);
  const __m256d is3 = _mm256_cmp_pd(quad, three, _CMP_EQ_OQ);
  const __m256d swap = _mm256_or_pd(is1, is3);
  const __m256d sin_neg = _mm256_or_pd(is2, is3);
  const __m256d cos_neg = _mm256_or_pd(is1, is2);
  const __m256d sign_bit = _mm256_set1_pd(-0.0);

  const __m256d sb = _mm256_blendv_pd(s, c, swap);
  const __m256d cb = _mm256_blendv_pd(c, s, swap);
  out_sin = _mm256_xor_pd(sb, _mm256_and_pd(sin_neg, sign_bit));
  out_cos = _mm256_xor_pd(cb, _mm256_and_pd(cos_neg, sign_bit));
}

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

TrigEval evaluate(const TrigTerms& terms, double x, double y) {
  const std::size_t n = terms.size();
  const __m256d vx = _mm256_set1_pd(x);
  const __m256d vy = _mm256_set1_pd(y);
  __m256d acc_v = _mm256_setzero_pd();
  __m256d acc_gx = _mm256_setzero_pd();
  __m256d acc_gy = _mm256_setzero_pd();
  __m256d acc_hxx = _mm256_setzero_pd();
  __m256d acc_hxy = _mm256_setzero_pd();
  __m256d acc_hyy = _mm256_setzero_pd();

  auto step = [&](__m256d a, __m256d kx, __m256d ky, __m256d ph) {
    const __m256d arg = _mm256_fmadd_pd(kx, vx, _mm256_fmadd_pd(ky, vy, ph));
    __m256d s, c;
    sincos_pd(arg, s, c);
    const __m256d ac = _mm256_mul_pd(a, c);
    const __m256d as = _mm256_mul_pd(a, s);
    acc_v = _mm256_add_pd(acc_v, ac);
    acc_gx = _mm256_fnmadd_pd(as, kx, acc_gx);
    acc_gy = _mm256_fnmadd_pd(as, ky, acc_gy);
    const __m256d ackx = _mm256_mul_pd(ac, kx);
    acc_hxx = _mm256_fnmadd_pd(ackx, kx, acc_hxx);
    acc_hxy = _mm256_fnmadd_pd(ackx, ky, acc_hxy);
    acc_hyy = _mm256_fnmadd_pd(_mm256_mul_pd(ac, ky), ky, acc_hyy);
  };

  std::size_t p = 0;
  for (; p + 4 <= n; p += 4) {
    step(_mm256_loadu_pd(&terms.amp[p]), _mm256_loadu_pd(&terms.kx[p]),
         _mm256_loadu_pd(&terms.ky[p]), _mm256_loadu_pd(&terms.phase[p]));
  }
  if (p < n) {
    alignas(32) std::array<double, 4> a{}, kx{}, ky{}, ph{};
    for (std::size_t i = 0; p + i < n; ++i) {
      a[i] = terms.amp[p + i];
      kx[i] = terms.kx[p + i];
      ky[i] = terms.ky[p + i];
      ph[i] = terms.phase[p + i];
    }
    step(_mm256_load_pd(a.data()), _mm256_load_pd(kx.data()), _mm256_load_pd(ky.data()),
         _mm256_load_pd(ph.data()));
  }

  TrigEval r;
  r.value = terms.constant + hsum(acc_v);
  r.grad_x = hsum(acc_gx);
  r.grad_y = hsum(acc_gy);
  r.hess_xx = hsum(acc_hxx);
  r.hess_xy = hsum(acc_hxy);
  r.hess_yy = hsum(acc_hyy);
  return r;
}

void values_batch(const TrigTerms& terms, std::span<const double> xs,
                  std::span<const double> ys, std::span<double> out) {
  assert(xs.size() == ys.size() && out.size() == xs.size());
  const std::size_t n = terms.size();
  const std::size_t count = xs.size();
  std::size_t i = 0;
  for (; i + 4 <= count; i += 4) {
    const __m256d vx = _mm256_loadu_pd(&xs[i]);
    const __m256d vy = _mm256_loadu_pd(&ys[i]);
    __m256d acc = _mm256_set1_pd(terms.constant);
    for (std::size_t p = 0; p < n; ++p) {
      const __m256d arg = _mm256_fmadd_pd(
          _mm256_set1_pd(terms.kx[p]), vx,
          _mm256_fmadd_pd(_mm256_set1_pd(terms.ky[p]), vy, _mm256_set1_pd(terms.phase[p])));
      __m256d s, c;
      sincos_pd(arg, s, c);
      acc = _mm256_fmadd_pd(_mm256_set1_pd(terms.amp[p]), c, acc);
    }
    _mm256_storeu_pd(&out[i], acc);
  }
  for (; i < count; ++i) {
    out[i] = avx2::evaluate(terms, xs[i], ys[i]).value;
  }
}

void sincos(std::span<const double> in, std::span<double> s, std::span<double> c) {
  std::size_t i = 0;
  for (; i + 4 <= in.size(); i += 4) {
    __m256d vs, vc;
    sincos_pd(_mm256_loadu_pd(&in[i]), vs, vc);
    _mm256_storeu_pd(&s[i], vs);
    _mm256_storeu_pd(&c[i], vc);
  }
  if (i < in.size()) {
    alignas(32) std::array<double, 4> buf{}, bs{}, bc{};
    for (std::size_t j = 0; i + j < in.size(); ++j) buf[j] = in[i + j];
    __m256d vs, vc;
    sincos_pd(_mm256_load_pd(buf.data()), vs, vc);
    _mm256_store_pd(bs.data(), vs);
    _mm256_store_pd(bc.data(), vc);
    for (std::size_t j = 0; i + j < in.size(); ++j) {
      s[i + j] = bs[j];
      c[i + j] = bc[j];
    }
  }
}

}  // namespace mamc::kernels::avx2
