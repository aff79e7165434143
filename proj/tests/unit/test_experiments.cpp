// SPDX-License-Identifier: Apache-2.0
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mamc/experiments.hpp"
#include "mamc/serialization.hpp"
#include "test_helpers.hpp"

using namespace mamc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mamc_test_" + name);
  fs::remove_all(p);
  return p;
}

SweepSpec small_sweep(const fs::path& out) {
  SweepSpec s;
  s.parameter = "Pmax";
  s.values = {5.0, 10.0, 15.0};
  s.realizations = 3;
  s.base = test::small_config(4, {3}, 5, 3.0);
  s.schemes = {Scheme::Proposed, Scheme::Fpa};
  s.out_dir = out;
  s.master_seed = 42;
  s.rx_mode = RxMode::Sequential;
  s.criterion.max_iterations = 10;
  s.threads = 1;
  return s;
}

}  // namespace

TEST_CASE("scheme names round trip") {
  for (Scheme s : all_schemes()) CHECK(parse_scheme(scheme_name(s)) == s);
  CHECK(parse_scheme("receive_ma") == Scheme::ReceiveMa);
  CHECK_THROWS_AS(parse_scheme("nope"), std::invalid_argument);
}

TEST_CASE("layouts") {
  const auto ula = ula_layout(4);
  REQUIRE(ula.size() == 4u);
  CHECK(ula[0].x() == doctest::Approx(-0.75));
  CHECK(ula[3].x() == doctest::Approx(0.75));
  for (std::size_t m = 1; m < 4; ++m) CHECK((ula[m] - ula[m - 1]).norm() == doctest::Approx(0.5));

  const SystemConfig cfg = test::small_config(4, {2}, 3, 1.5);
  Rng rng(3);
  for (int i = 0; i < 50; ++i) CHECK(check_positions(cfg, random_layout(cfg, rng, 10'000)).ok);
  SystemConfig crowded = cfg;
  crowded.min_distance = 5.0;
  CHECK_THROWS_AS(random_layout(crowded, rng, 100), SchemeError);
}

TEST_CASE("schemes fix the blocks they should") {
  const SystemConfig cfg = test::small_config(4, {3}, 5, 3.0);
  const Scenario sc = test::draw(cfg, 5);
  SchemeOptions opt;
  opt.run.criterion.max_iterations = 10;
  opt.run.rx_mode = RxMode::Sequential;

  SUBCASE("TRANSMIT_MA never moves a receiver") {
    bool rx_fixed = true;
    opt.run.observer = [&](BlockKind, const AlgorithmState& st, const BlockResult&) {
      for (const auto& r : st.positions.rx) rx_fixed = rx_fixed && r.norm() == 0.0;
    };
    const SchemeResult r = run_scheme(Scheme::TransmitMa, sc, opt);
    CHECK(rx_fixed);
    CHECK(r.iterations >= 1);
  }
  SUBCASE("RECEIVE_MA and FPA keep the ULA") {
    const auto ula = ula_layout(4);
    for (Scheme s : {Scheme::ReceiveMa, Scheme::Fpa}) {
      bool tx_fixed = true, rx_fixed = true;
      opt.run.observer = [&](BlockKind, const AlgorithmState& st, const BlockResult&) {
        for (int m = 0; m < 4; ++m) tx_fixed = tx_fixed && (st.positions.tx[m] - ula[m]).norm() == 0.0;
        for (const auto& r : st.positions.rx) rx_fixed = rx_fixed && r.norm() == 0.0;
      };
      run_scheme(s, sc, opt);
      CHECK(tx_fixed);
      if (s == Scheme::Fpa) CHECK(rx_fixed);
    }
  }
  SUBCASE("RANDOM_POSITION with the FPA layout injected equals FPA") {
    opt.injected_samples = {PositionState{ula_layout(4), std::vector<Vec2>(3, Vec2::Zero())}};
    const SchemeResult a = run_scheme(Scheme::RandomPosition, sc, opt);
    const SchemeResult b = run_scheme(Scheme::Fpa, sc, opt);
    CHECK(a.objective == b.objective);
  }
  SUBCASE("RANDOM_POSITION samples are feasible and seeded") {
    opt.random_samples = 4;
    opt.seed = 9;
    const SchemeResult a = run_scheme(Scheme::RandomPosition, sc, opt);
    const SchemeResult b = run_scheme(Scheme::RandomPosition, sc, opt);
    CHECK(a.objective == b.objective);
    CHECK(check_positions(cfg, a.state.positions).ok);
  }
}

TEST_CASE("sweep parameter application") {
  const SystemConfig base = test::small_config(4, {2, 2}, 5, 4.0);
  CHECK(apply_sweep_value(base, "A", 5.0).region_size == 5.0);
  CHECK(apply_sweep_value(base, "L", 7.0).num_paths == 7);
  CHECK(apply_sweep_value(base, "M", 2.0).num_tx == 2);
  CHECK(apply_sweep_value(base, "Pmax", 20.0).pmax_w == doctest::Approx(0.1));
  CHECK(apply_sweep_value(base, "K", 5.0).num_users() == 5);
  CHECK(apply_sweep_value(base, "K", 5.0).num_groups() == 2);
  CHECK(apply_sweep_value(base, "N", 3.0).num_groups() == 3);
  CHECK_THROWS_AS(apply_sweep_value(base, "L", 2.5), std::invalid_argument);
  CHECK_THROWS_AS(apply_sweep_value(base, "Q", 1.0), std::invalid_argument);
}

TEST_CASE("sweep validation") {
  SweepSpec s = small_sweep(scratch("invalid"));
  s.realizations = 0;
  CHECK_THROWS_AS(run_sweep(s), std::invalid_argument);
  s.realizations = 1;
  s.values.clear();
  CHECK_THROWS_AS(run_sweep(s), std::invalid_argument);
  s.values = {5.0};
  s.schemes.clear();
  CHECK_THROWS_AS(run_sweep(s), std::invalid_argument);
}

TEST_CASE("sweep output files") {
  const fs::path out = scratch("sweep_a");
  const SweepSpec spec = small_sweep(out);
  const SweepResult res = run_sweep(spec);

  SUBCASE("mean objective rises with power for every scheme") {
    for (Scheme s : spec.schemes) {
      std::vector<double> means;
      for (const auto& a : res.agg)
        if (a.scheme == s) means.push_back(a.mean_objective);
      REQUIRE(means.size() == 3u);
      CHECK(means[1] > means[0]);
      CHECK(means[2] > means[1]);
    }
  }
  SUBCASE("agg.csv schema") {
    const auto rows = read_csv(out / "agg.csv");
    REQUIRE(rows.size() == 1 + 3 * 2);
    std::ostringstream header;
    for (std::size_t i = 0; i < rows[0].size(); ++i) header << (i ? "," : "") << rows[0][i];
    CHECK(header.str() == kAggHeader);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      REQUIRE(rows[i].size() == 9u);
      CHECK(rows[i][0] == std::to_string(kCsvSchemaVersion));
      CHECK(rows[i][1] == "Pmax");
      CHECK((rows[i][3] == "PROPOSED" || rows[i][3] == "FPA"));
      CHECK(rows[i][4] == "3");
      const double lin = std::stod(rows[i][5]);
      CHECK(std::stod(rows[i][6]) == doctest::Approx(10.0 * std::log10(lin)).epsilon(1e-12));
      CHECK(std::stod(rows[i][8]) >= 1.0);
    }
  }
  SUBCASE("raw.csv has one row per run") {
    const auto rows = read_csv(out / "raw.csv");
    REQUIRE(rows.size() == 1 + 3 * 3 * 2);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      REQUIRE(rows[i].size() == 10u);
      CHECK(std::stod(rows[i][7]) == doctest::Approx(10.0 * std::log10(std::stod(rows[i][6]))).epsilon(1e-12));
    }
    CHECK(fs::exists(out / "timing.csv"));
    const auto meta = read_json_file(out / "meta.json");
    CHECK(meta["schema_version"] == kCsvSchemaVersion);
    CHECK(meta["parameter"] == "Pmax");
  }
  SUBCASE("one trace per run with the documented layout") {
    for (const char* v : {"5", "10", "15"}) {
      for (const char* s : {"PROPOSED", "FPA"}) {
        for (int r = 0; r < 3; ++r) {
          const fs::path p = out / "traces" / (std::string("Pmax=") + v + "_" + s + "_r" + std::to_string(r) + ".csv");
          REQUIRE(fs::exists(p));
          const auto rows = read_csv(p);
          REQUIRE(rows.size() >= 3u);
          std::ostringstream header;
          for (std::size_t i = 0; i < rows[0].size(); ++i) header << (i ? "," : "") << rows[0][i];
          CHECK(header.str() == kTraceHeader);
          CHECK(rows[1][0] == "0");
          CHECK(rows[1][3] == "initial");
          double last = 0.0;
          for (std::size_t i = 1; i < rows.size(); ++i) {
            REQUIRE(rows[i].size() == 6u);
            CHECK(std::stoi(rows[i][0]) == static_cast<int>(i - 1));
            const double obj = std::stod(rows[i][1]);
            CHECK(obj >= last * (1.0 - 1e-7));
            last = obj;
          }
        }
      }
    }
  }
  SUBCASE("rerun is byte identical, also with more threads") {
    const fs::path out2 = scratch("sweep_b");
    SweepSpec again = spec;
    again.out_dir = out2;
    again.threads = 3;
    run_sweep(again);
    CHECK(slurp(out / "raw.csv") == slurp(out2 / "raw.csv"));
    CHECK(slurp(out / "agg.csv") == slurp(out2 / "agg.csv"));
    CHECK(slurp(out / "traces" / "Pmax=10_PROPOSED_r1.csv") == slurp(out2 / "traces" / "Pmax=10_PROPOSED_r1.csv"));
    fs::remove_all(out2);
  }
}

TEST_CASE("aggregation arithmetic") {
  std::vector<RawRow> raw(2);
  raw[0].parameter = raw[1].parameter = "A";
  raw[0].value = raw[1].value = 2.0;
  raw[0].objective = 10.0;
  raw[1].objective = 1000.0;
  raw[0].iterations = 4;
  raw[1].iterations = 6;
  raw[1].realization = 1;
  const auto agg = aggregate(raw);
  REQUIRE(agg.size() == 1u);
  CHECK(agg[0].realizations == 2);
  CHECK(agg[0].mean_objective == doctest::Approx(505.0));
  CHECK(agg[0].mean_objective_db == doctest::Approx(10.0 * std::log10(505.0)));
  CHECK(agg[0].mean_of_db == doctest::Approx(20.0));
  CHECK(agg[0].mean_iterations == doctest::Approx(5.0));
  CHECK(agg_csv(agg).rfind(std::string(kAggHeader) + "\n", 0) == 0);
  CHECK(raw_csv(raw).rfind(std::string(kRawHeader) + "\n", 0) == 0);
}
