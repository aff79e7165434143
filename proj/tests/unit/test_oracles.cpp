// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"
#include "mamc/oracles.hpp"
#include "mamc/surrogate_math.hpp"
#include "test_helpers.hpp"

using namespace mamc;

TEST_CASE("finite differences on a quadratic") {
  const auto f = [](const Vec2& x) { return x.squaredNorm(); };
  const Vec2 x(0.3, -1.7);
  CHECK((oracle::finite_diff_gradient(f, x) - 2.0 * x).norm() <= 1e-9);
  CHECK((oracle::finite_diff_hessian(f, x) - 2.0 * Mat2::Identity()).norm() <= 1e-6);
}

TEST_CASE("grid search") {
  const oracle::Region box{Vec2(-1.0, -1.0), Vec2(1.0, 1.0)};
  SUBCASE("constant field picks the smallest lattice point") {
    const auto r = oracle::grid_search_position([](const Vec2&) { return 1.0; }, box, 0.1);
    CHECK((r.argmax - Vec2(-1.0, -1.0)).norm() == 0.0);
    CHECK(r.cells == 21u * 21u);
  }
  SUBCASE("negative squared norm peaks at the origin") {
    const auto r = oracle::grid_search_position([](const Vec2& x) { return -x.squaredNorm(); }, box, 0.01);
    CHECK(r.argmax.norm() <= 1e-12);
  }
  SUBCASE("threads do not change the answer") {
    const auto f = [](const Vec2& x) { return std::cos(3.0 * x(0)) * std::sin(2.0 * x(1) + 0.3); };
    const auto a = oracle::grid_search_position(f, box, 0.01, oracle::kDefaultCellCap, 1);
    const auto b = oracle::grid_search_position(f, box, 0.01, oracle::kDefaultCellCap, 3);
    CHECK(a.max == b.max);
    CHECK((a.argmax - b.argmax).norm() == 0.0);
  }
  SUBCASE("cell cap is enforced") {
    CHECK_THROWS_AS(oracle::grid_search_position([](const Vec2&) { return 0.0; }, box, 1e-4, 1000),
                    oracle::GridTooLarge);
  }
  SUBCASE("grid maximum bounds every receive surrogate step") {
    const SystemConfig cfg = test::small_config(2, {1}, 3, 2.0);
    const Scenario sc = test::draw(cfg, 21);
    std::mt19937_64 gen(21);
    const PositionState pos = test::random_positions(cfg, 1, gen);
    const Beamformers w = test::random_beamformers(1, 2, gen);
    const RxExpansionContext ctx = build_rx_context(sc, pos, w, 0, 0);
    const oracle::Region reg{Vec2(-1.0, -1.0), Vec2(1.0, 1.0)};
    const auto g = oracle::grid_search_position([&](const Vec2& r) { return v_value(ctx, r); }, reg, 0.005);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const Vec2 a(d(gen), d(gen));
      const QuadraticSurrogate s = lower_surrogate_rx(ctx, a);
      Vec2 next = a + s.gradient / std::max(s.curvature, 1e-300);
      next = next.cwiseMax(reg.lo).cwiseMin(reg.hi);
      CHECK(v_value(ctx, next) <= g.max * (1.0 + 1e-3));
    }
  }
}

TEST_CASE("mrt value") {
  CHECK(oracle::mrt_value(CVector::Zero(3), 1.0, 1.0) == 0.0);
  CVector h(2);
  h << cdouble(0.6, 0.0), cdouble(0.0, 0.8);
  CHECK(oracle::mrt_value(h, 2.0, 1.0) == doctest::Approx(2.0));
  SUBCASE("random unit beamformers never beat it") {
    // M = 2: a uniform unit vector lands within 2% of the optimum with
    // probability 0.02, so 1e5 draws are conclusive.
    std::mt19937_64 gen(31);
    std::normal_distribution<double> n(0.0, 1.0);
    CVector g(2);
    for (int i = 0; i < 2; ++i) g(i) = cdouble(n(gen), n(gen));
    const double opt = oracle::mrt_value(g, 1.0, 1.0);
    double best = 0.0;
    for (int s = 0; s < 100'000; ++s) {
      CVector w(2);
      for (int i = 0; i < 2; ++i) w(i) = cdouble(n(gen), n(gen));
      w /= w.norm();
      best = std::max(best, std::norm(g.dot(w)));
    }
    CHECK(best <= opt * (1.0 + 1e-12));
    CHECK(best >= 0.98 * opt);
  }
}

TEST_CASE("scalar beamformer value") {
  CHECK(oracle::scalar_beamformer_value({cdouble(2.0, 0.0), cdouble(1.0, 0.0)}, {1.0, 1.0}, 1.0, {1.0, 1.0}) ==
        doctest::Approx(1.0));
  const cdouble h(0.3, -0.4);
  CVector hv(1);
  hv << h;
  CHECK(oracle::scalar_beamformer_value({h}, {1.0}, 2.0, {0.5}) ==
        doctest::Approx(oracle::mrt_value(hv, 2.0, 0.5)));
  SUBCASE("matches a power and phase scan") {
    const std::vector<cdouble> hs{{0.3, 0.1}, {-0.2, 0.5}, {0.05, -0.4}};
    const std::vector<double> gam{1.0, 2.0, 0.5}, sig{1.0, 0.5, 2.0};
    double best = 0.0;
    for (int p = 0; p <= 200; ++p) {
      for (int a = 0; a < 64; ++a) {
        const cdouble w = std::polar(std::sqrt(p / 200.0), a * kTwoPi / 64);
        double mn = 1e300;
        for (int k = 0; k < 3; ++k) mn = std::min(mn, std::norm(std::conj(hs[k]) * w) / (gam[k] * sig[k]));
        best = std::max(best, mn);
      }
    }
    CHECK(std::abs(oracle::scalar_beamformer_value(hs, gam, 1.0, sig) - best) <= 1e-3);
  }
}

TEST_CASE("orthogonal power split") {
  const double eta = oracle::orthogonal_power_split({2.0, 0.5}, 1.0);
  // p1 + p2 = 1 with 2 p1 = 0.5 p2
  CHECK(eta == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(oracle::orthogonal_power_split({3.0}, 2.0) == doctest::Approx(6.0).epsilon(1e-9));
}
