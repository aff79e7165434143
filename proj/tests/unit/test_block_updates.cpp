// SPDX-License-Identifier: Apache-2.0
#include <random>

#include "doctest.h"
#include "mamc/block_updates.hpp"
#include "mamc/oracles.hpp"
#include "mamc/surrogate_math.hpp"
#include "test_helpers.hpp"

using namespace mamc;

namespace {

double min_pairwise(const std::vector<Vec2>& t) {
  double d = 1e300;
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i + 1; j < t.size(); ++j) d = std::min(d, (t[i] - t[j]).norm());
  return d;
}

// Two single-user groups whose channels are orthogonal at the given layout:
// antennas half a wavelength apart along x, transmit directions differing by 1 in x.
Scenario orthogonal_pair(cdouble s1, cdouble s2) {
  SystemConfig cfg = test::small_config(2, {1, 1}, 1, 2.0, 20.0);
  Scenario sc = test::draw(cfg, 1);
  const Vec2 dirs[2] = {Vec2(0.5, 0.0), Vec2(-0.5, 0.0)};
  const cdouble gains[2] = {s1, s2};
  for (int k = 0; k < 2; ++k) {
    auto& u = sc.users[static_cast<std::size_t>(k)];
    u.tx_dirs = {dirs[k]};
    u.rx_dirs = {Vec2(0.2, 0.3)};
    u.path_response = CMatrix::Constant(1, 1, gains[k]);
  }
  return sc;
}

const PositionState kPairLayout{{Vec2(-0.25, 0.0), Vec2(0.25, 0.0)}, {Vec2(0.0, 0.0), Vec2(0.0, 0.0)}};

}  // namespace

TEST_CASE("single-group beamformer") {
  SUBCASE("one user converges to matched filtering") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SystemConfig cfg = test::small_config(4, {1}, 5, 3.0);
      const Scenario sc = test::draw(cfg, seed);
      AlgorithmState st = initialize(sc);
      // Start away from the matched filter.
      std::mt19937_64 gen(seed);
      st.beamformers = test::random_beamformers(1, 4, gen);
      st.beamformers[0] *= std::sqrt(cfg.pmax_w) / st.beamformers[0].norm();
      for (int i = 0; i < 50; ++i) update_beamformer_single(st, sc);
      const double opt = oracle::mrt_value(channel_vector(sc, st.positions, 0), cfg.pmax_w, cfg.noise(0));
      CHECK(st.objective >= 0.99 * opt);
      CHECK(st.objective <= opt * (1.0 + 1e-9));
    }
  }
  SUBCASE("one antenna reaches the scalar optimum in one call") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SystemConfig cfg = test::small_config(1, {3}, 4, 2.0);
      const Scenario sc = test::draw(cfg, seed);
      AlgorithmState st = initialize(sc);
      st.beamformers[0] *= 0.3;
      update_beamformer_single(st, sc);
      std::vector<cdouble> h;
      std::vector<double> g, s;
      for (int k = 0; k < 3; ++k) {
        h.push_back(channel_vector(sc, st.positions, k)(0));
        g.push_back(cfg.weight_of(k));
        s.push_back(cfg.noise(k));
      }
      const double opt = oracle::scalar_beamformer_value(h, g, cfg.pmax_w, s);
      CHECK(test::rel_err(st.objective, opt) <= 1e-6);
    }
  }
  SUBCASE("stationary incumbent is not lowered") {
    const SystemConfig cfg = test::small_config(4, {3}, 5, 3.0);
    const Scenario sc = test::draw(cfg, 9);
    AlgorithmState st = initialize(sc);
    for (int i = 0; i < 30; ++i) update_beamformer_single(st, sc);
    const double before = st.objective;
    const BlockResult r = update_beamformer_single(st, sc);
    CHECK(r.objective_after >= before - 1e-9 * before);
    CHECK(total_power(st.beamformers) <= cfg.pmax_w * (1.0 + 1e-12));
    CHECK(r.surrogate_eta <= st.objective * (1.0 + 1e-6));
  }
  SUBCASE("zero beamformer is reported") {
    const SystemConfig cfg = test::small_config(2, {2}, 3, 2.0);
    const Scenario sc = test::draw(cfg, 2);
    AlgorithmState st = initialize(sc);
    st.beamformers[0].setZero();
    CHECK(update_beamformer_single(st, sc).status == BlockStatus::ZeroIncumbent);
  }
}

TEST_CASE("multi-group beamformer") {
  SUBCASE("orthogonal groups match the power-split oracle") {
    const Scenario sc = orthogonal_pair(cdouble(3e-5, 1e-5), cdouble(-1e-5, 0.5e-5));
    AlgorithmState st = initialize_with_positions(sc, kPairLayout);
    REQUIRE(std::norm(channel_row(sc, st.positions, 0).dot(channel_row(sc, st.positions, 1))) <= 1e-30);
    for (int i = 0; i < 100; ++i) update_beamformers_multi(st, sc);
    std::vector<double> gains;
    for (int k = 0; k < 2; ++k) {
      gains.push_back(channel_vector(sc, st.positions, k).squaredNorm() /
                      (sc.config.weight_of(k) * sc.config.noise(k)));
    }
    const double opt = oracle::orthogonal_power_split(gains, sc.config.pmax_w);
    CHECK(test::rel_err(st.objective, opt) <= 0.01);
  }
  SUBCASE("iterate satisfies the original constraint at the reported level") {
    const SystemConfig cfg = test::small_config(4, {2, 2}, 5, 4.0, 20.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Scenario sc = test::draw(cfg, seed);
      AlgorithmState st = initialize(sc);
      for (int i = 0; i < 5; ++i) {
        const BlockResult r = update_beamformers_multi(st, sc);
        REQUIRE(r.solver == SolveStatus::Optimal);
        const SinrReport rep = compute_min_weighted_sinr(sc, st.positions, st.beamformers);
        if (r.status == BlockStatus::Updated) {
          for (int k = 0; k < sc.num_users(); ++k) {
            CHECK(rep.sinr[k] / cfg.weight_of(k) >= r.surrogate_eta * (1.0 - 1e-6));
          }
        }
        CHECK(total_power(st.beamformers) <= cfg.pmax_w + 1e-9);
      }
    }
  }
  SUBCASE("single group through the multi-group form agrees after convergence") {
    const SystemConfig cfg = test::small_config(3, {3}, 4, 3.0);
    const Scenario sc = test::draw(cfg, 4);
    AlgorithmState a = initialize(sc), b = a;
    for (int i = 0; i < 60; ++i) {
      update_beamformer_single(a, sc);
      update_beamformers_multi(b, sc);
    }
    CHECK(test::rel_err(b.objective, a.objective) <= 1e-3);
  }
}

TEST_CASE("transmit position") {
  SUBCASE("single antenna single path stays put") {
    const SystemConfig cfg = test::small_config(1, {1}, 1, 2.0);
    const Scenario sc = test::draw(cfg, 1);
    AlgorithmState st = initialize(sc);
    const Vec2 before = st.positions.tx[0];
    const BlockResult r = update_tx_position(st, sc, 0);
    CHECK(r.status == BlockStatus::Unchanged);
    CHECK((st.positions.tx[0] - before).norm() == 0.0);
  }
  SUBCASE("minimum distance holds after every call") {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      const bool multi = seed % 2 == 1;
      const SystemConfig cfg = multi ? test::small_config(4, {2, 2}, 5, 2.0, 20.0) : test::small_config(4, {3}, 5, 1.5);
      const Scenario sc = test::draw(cfg, seed);
      AlgorithmState st = initialize(sc);
      for (int it = 0; it < 10; ++it) {
        for (int m = 0; m < cfg.num_tx; ++m) {
          const double before = st.objective;
          update_tx_position(st, sc, m);
          CHECK(min_pairwise(st.positions.tx) >= cfg.min_distance - 1e-9);
          CHECK(check_positions(cfg, st.positions).ok);
          CHECK(st.objective >= before * (1.0 - 1e-12));
        }
      }
    }
  }
  SUBCASE("single antenna two paths reaches the grid maximum") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SystemConfig cfg = test::small_config(1, {1}, 2, 2.0);
      const Scenario sc = test::draw(cfg, seed);
      const AlgorithmState st0 = initialize(sc);
      const TxExpansionContext ctx = build_tx_context(sc, st0.positions, st0.beamformers, 0, 0, 0);
      const oracle::Region reg{Vec2(-1.0, -1.0), Vec2(1.0, 1.0)};
      const auto grid = oracle::grid_search_position([&](const Vec2& t) { return u_value(ctx, t); }, reg, 0.005);
      std::mt19937_64 gen(seed);
      std::uniform_real_distribution<double> d(-1.0, 1.0);
      double best = 0.0;
      for (int restart = 0; restart < 5; ++restart) {
        AlgorithmState st = initialize_with_positions(sc, PositionState{{Vec2(d(gen), d(gen))}, st0.positions.rx});
        st.beamformers = st0.beamformers;
        for (int i = 0; i < 100; ++i) update_tx_position(st, sc, 0);
        best = std::max(best, u_value(ctx, st.positions.tx[0]));
      }
      CHECK(best >= 0.99 * grid.max);
    }
  }
  SUBCASE("infeasible anchor is reported") {
    const SystemConfig cfg = test::small_config(2, {1}, 3, 2.0);
    const Scenario sc = test::draw(cfg, 3);
    AlgorithmState st = initialize_with_positions(sc, PositionState{{Vec2(0.0, 0.0), Vec2(0.1, 0.0)}, {Vec2(0.0, 0.0)}});
    CHECK(update_tx_position(st, sc, 0).status == BlockStatus::InfeasibleAnchor);
  }
}

TEST_CASE("receive positions") {
  SUBCASE("single path leaves receivers unchanged") {
    const SystemConfig cfg = test::small_config(2, {2}, 1, 2.0);
    const Scenario sc = test::draw(cfg, 1);
    AlgorithmState st = initialize(sc);
    const auto before = st.positions.rx;
    for (RxMode mode : {RxMode::Sequential, RxMode::Parallel, RxMode::Collective}) {
      BlockOptions opt;
      opt.rx_mode = mode;
      CHECK(update_rx_positions(st, sc, opt).status == BlockStatus::Unchanged);
      for (std::size_t k = 0; k < before.size(); ++k) CHECK((st.positions.rx[k] - before[k]).norm() == 0.0);
    }
  }
  SUBCASE("interior maximizer is the closed form") {
    const SystemConfig cfg = test::small_config(2, {1}, 4, 20.0);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Scenario sc = test::draw(cfg, seed);
      AlgorithmState st = initialize(sc);
      const RxExpansionContext ctx = build_rx_context(sc, st.positions, st.beamformers, 0, 0);
      const QuadraticSurrogate lb = lower_surrogate_rx(ctx, st.positions.rx[0]);
      const Vec2 expect = st.positions.rx[0] + lb.gradient / lb.curvature;
      CHECK((rx_closed_form(st.positions.rx[0], lb.gradient, lb.curvature) - expect).norm() == 0.0);
      REQUIRE(expect.cwiseAbs().maxCoeff() < 10.0);
      update_rx_positions(st, sc);
      CHECK((st.positions.rx[0] - expect).norm() == 0.0);
    }
    CHECK((rx_closed_form(Vec2(0.3, 0.2), Vec2(1.0, 1.0), 0.0) - Vec2(0.3, 0.2)).norm() == 0.0);
  }
  SUBCASE("three modes reach the same surrogate level") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const bool multi = seed % 2 == 1;
      const SystemConfig cfg = multi ? test::small_config(4, {2, 2}, 5, 4.0, 20.0) : test::small_config(4, {3}, 5, 3.0);
      const Scenario sc = test::draw(cfg, seed);
      AlgorithmState base = initialize(sc);
      if (multi) {
        update_beamformers_multi(base, sc);
      } else {
        update_beamformer_single(base, sc);
      }
      double eta[3];
      AlgorithmState after[3];
      const RxMode modes[3] = {RxMode::Sequential, RxMode::Parallel, RxMode::Collective};
      for (int i = 0; i < 3; ++i) {
        AlgorithmState st = base;
        BlockOptions opt;
        opt.rx_mode = modes[i];
        opt.rx_threads = 2;
        const BlockResult r = update_rx_positions(st, sc, opt);
        REQUIRE(r.solver == SolveStatus::Optimal);
        eta[i] = r.surrogate_eta;
        after[i] = st;
      }
      CHECK(std::abs(eta[0] - eta[1]) <= 1e-9 * std::max(1.0, eta[0]));
      CHECK(std::abs(eta[0] - eta[2]) <= 1e-6 * std::max(1.0, eta[0]));
      for (std::size_t k = 0; k < after[0].positions.rx.size(); ++k) {
        CHECK((after[0].positions.rx[k] - after[1].positions.rx[k]).norm() == 0.0);
      }
    }
  }
  SUBCASE("never lowers the objective and stays in the region") {
    const SystemConfig cfg = test::small_config(3, {2, 2}, 6, 1.0, 20.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Scenario sc = test::draw(cfg, seed);
      AlgorithmState st = initialize(sc);
      for (int i = 0; i < 10; ++i) {
        const double before = st.objective;
        BlockOptions opt;
        opt.rx_mode = i % 2 ? RxMode::Collective : RxMode::Sequential;
        update_rx_positions(st, sc, opt);
        CHECK(st.objective >= before);
        CHECK(check_positions(cfg, st.positions).ok);
      }
    }
  }
}

TEST_CASE("status and mode names") {
  CHECK(block_status_name(BlockStatus::Updated) == "updated");
  CHECK(block_status_name(BlockStatus::Rejected) == "rejected");
  CHECK(rx_mode_name(RxMode::Sequential) == "seq");
  CHECK(rx_mode_name(RxMode::Parallel) == "par");
  CHECK(rx_mode_name(RxMode::Collective) == "collective");
}
