// SPDX-License-Identifier: Apache-2.0
#include "mamc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <thread>

#include "mamc/kernels/trig_sum.hpp"
#include "mamc/serialization.hpp"

namespace mamc {

std::string_view scheme_name(Scheme s) {
  switch (s) {
    case Scheme::Proposed:
      return "PROPOSED";
    case Scheme::ReceiveMa:
      return "RECEIVE_MA";
    case Scheme::TransmitMa:
      return "TRANSMIT_MA";
    case Scheme::Fpa:
      return "FPA";
    case Scheme::RandomPosition:
      return "RANDOM_POSITION";
  }
  return "UNKNOWN";
}

std::vector<Scheme> all_schemes() {
  return {Scheme::Proposed, Scheme::ReceiveMa, Scheme::TransmitMa, Scheme::Fpa, Scheme::RandomPosition};
}

Scheme parse_scheme(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Scheme s : all_schemes()) {
    if (scheme_name(s) == up) return s;
  }
  throw std::invalid_argument("unknown scheme '" + std::string(name) + "'");
}

std::vector<Vec2> ula_layout(int num_tx) {
  std::vector<Vec2> pos;
  for (int m = 0; m < num_tx; ++m) pos.emplace_back((m - 0.5 * (num_tx - 1)) * 0.5 * kWavelength, 0.0);
  return pos;
}

PositionState random_layout(const SystemConfig& cfg, Rng& rng, int cap) {
  const double half = 0.5 * cfg.region_size;
  PositionState pos;
  for (int attempt = 0; attempt < cap; ++attempt) {
    pos.tx.clear();
    for (int m = 0; m < cfg.num_tx; ++m) pos.tx.emplace_back(rng.uniform(-half, half), rng.uniform(-half, half));
    bool ok = true;
    for (std::size_t m = 0; m < pos.tx.size() && ok; ++m) {
      for (std::size_t p = m + 1; p < pos.tx.size() && ok; ++p) {
        ok = (pos.tx[m] - pos.tx[p]).norm() >= cfg.min_distance;
      }
    }
    if (!ok) continue;
    pos.rx.clear();
    for (int k = 0; k < cfg.num_users(); ++k) pos.rx.emplace_back(rng.uniform(-half, half), rng.uniform(-half, half));
    return pos;
  }
  throw SchemeError("random_layout: no feasible layout after " + std::to_string(cap) +
                    " attempts; D is too large for A");
}

SchemeResult run_scheme(Scheme scheme, const Scenario& sc, const SchemeOptions& opt) {
  RunOptions run = opt.run;
  PositionState fixed;
  fixed.rx.assign(static_cast<std::size_t>(sc.num_users()), Vec2::Zero());
  SchemeResult out;
  auto finish = [&](RunResult&& r) {
    out.objective = r.state.objective;
    out.iterations = r.trace.iterations();
    out.state = std::move(r.state);
    out.trace = std::move(r.trace);
  };
  switch (scheme) {
    case Scheme::Proposed:
      finish(run_from(sc, initialize(sc), run));
      break;
    case Scheme::ReceiveMa:
      fixed.tx = ula_layout(sc.num_tx());
      run.optimize_tx = false;
      finish(run_from(sc, initialize_with_positions(sc, fixed), run));
      break;
    case Scheme::TransmitMa:
      run.optimize_rx = false;
      finish(run_from(sc, initialize(sc), run));
      break;
    case Scheme::Fpa:
      fixed.tx = ula_layout(sc.num_tx());
      run.optimize_tx = false;
      run.optimize_rx = false;
      finish(run_from(sc, initialize_with_positions(sc, fixed), run));
      break;
    case Scheme::RandomPosition: {
      run.optimize_tx = false;
      run.optimize_rx = false;
      std::vector<PositionState> samples = opt.injected_samples;
      if (samples.empty()) {
        if (opt.random_samples < 1) throw std::invalid_argument("random_samples must be >= 1");
        Rng rng = Rng::substream(opt.seed, 0, 0x5241);
        for (int s = 0; s < opt.random_samples; ++s) samples.push_back(random_layout(sc.config, rng, opt.rejection_cap));
      }
      bool have = false;
      for (const auto& pos : samples) {
        RunResult r = run_from(sc, initialize_with_positions(sc, pos), run);
        if (!have || r.state.objective > out.objective) {
          finish(std::move(r));
          have = true;
        }
      }
      break;
    }
  }
  return out;
}

void SweepSpec::validate() const {
  if (values.empty()) throw std::invalid_argument("sweep needs at least one value");
  if (realizations < 1) throw std::invalid_argument("sweep needs at least one realization");
  if (schemes.empty()) throw std::invalid_argument("sweep needs at least one scheme");
  if (random_samples < 1) throw std::invalid_argument("random_samples must be >= 1");
  for (double v : values) apply_sweep_value(base, parameter, v).validate();
}

SystemConfig apply_sweep_value(const SystemConfig& base, std::string_view parameter, double value) {
  SystemConfig cfg = base;
  auto as_int = [&]() {
    const double r = std::round(value);
    if (std::abs(r - value) > 1e-9 || r < 1.0) {
      throw std::invalid_argument("sweep parameter " + std::string(parameter) + " needs positive integers");
    }
    return static_cast<int>(r);
  };
  if (parameter == "A") {
    cfg.region_size = value;
  } else if (parameter == "D") {
    cfg.min_distance = value;
  } else if (parameter == "L") {
    cfg.num_paths = as_int();
  } else if (parameter == "Pmax") {
    cfg.pmax_w = dbm_to_watt(value);
  } else if (parameter == "M") {
    cfg.num_tx = as_int();
  } else if (parameter == "K") {
    const int K = as_int();
    const int N = base.num_groups();
    if (K < N) throw std::invalid_argument("K must be at least the number of groups");
    cfg.group_sizes.assign(static_cast<std::size_t>(N), K / N);
    for (int n = 0; n < K % N; ++n) ++cfg.group_sizes[static_cast<std::size_t>(n)];
  } else if (parameter == "N") {
    cfg.group_sizes.assign(static_cast<std::size_t>(as_int()), base.group_sizes.front());
  } else {
    throw std::invalid_argument("unknown sweep parameter '" + std::string(parameter) + "' (A, D, L, Pmax, M, K, N)");
  }
  return cfg;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double to_db(double x) { return x > 0.0 ? linear_to_db(x) : -std::numeric_limits<double>::infinity(); }

}  // namespace

std::vector<AggRow> aggregate(const std::vector<RawRow>& raw) {
  // Preserve first-appearance order of (value, scheme).
  std::vector<AggRow> out;
  std::map<std::pair<double, int>, std::size_t> index;
  std::vector<double> sum_db;
  for (const auto& r : raw) {
    const auto key = std::make_pair(r.value, static_cast<int>(r.scheme));
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, out.size()).first;
      AggRow a;
      a.parameter = r.parameter;
      a.value = r.value;
      a.scheme = r.scheme;
      out.push_back(a);
      sum_db.push_back(0.0);
    }
    AggRow& a = out[it->second];
    ++a.realizations;
    a.mean_objective += r.objective;
    sum_db[it->second] += to_db(r.objective);
    a.mean_iterations += r.iterations;
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    AggRow& a = out[i];
    a.mean_objective /= a.realizations;
    a.mean_iterations /= a.realizations;
    a.mean_of_db = sum_db[i] / a.realizations;
    a.mean_objective_db = to_db(a.mean_objective);
  }
  return out;
}

std::string raw_csv(const std::vector<RawRow>& raw) {
  std::ostringstream os;
  os << kRawHeader << '\n';
  for (const auto& r : raw) {
    os << kCsvSchemaVersion << ',' << r.parameter << ',' << num(r.value) << ',' << scheme_name(r.scheme) << ','
       << r.realization << ',' << r.seed << ',' << num(r.objective) << ',' << num(to_db(r.objective)) << ','
       << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string agg_csv(const std::vector<AggRow>& agg) {
  std::ostringstream os;
  os << kAggHeader << '\n';
  for (const auto& a : agg) {
    os << kCsvSchemaVersion << ',' << a.parameter << ',' << num(a.value) << ',' << scheme_name(a.scheme) << ','
       << a.realizations << ',' << num(a.mean_objective) << ',' << num(a.mean_objective_db) << ','
       << num(a.mean_of_db) << ',' << num(a.mean_iterations) << '\n';
  }
  return os.str();
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec) throw IoError("cannot create '" + spec.out_dir.string() + "': " + ec.message());
  const fs::path trace_dir = spec.out_dir / "traces";
  if (spec.write_traces) {
    fs::create_directories(trace_dir, ec);
    if (ec) throw IoError("cannot create '" + trace_dir.string() + "': " + ec.message());
  }

  const std::size_t n_values = spec.values.size();
  const auto n_reps = static_cast<std::size_t>(spec.realizations);
  const std::size_t n_schemes = spec.schemes.size();
  std::vector<RawRow> rows(n_values * n_reps * n_schemes);
  std::vector<std::string> errors(n_values * n_reps);

  auto task = [&](std::size_t idx) {
    const std::size_t vi = idx / n_reps;
    const std::size_t r = idx % n_reps;
    const double value = spec.values[vi];
    SystemConfig cfg = apply_sweep_value(spec.base, spec.parameter, value);
    const std::uint64_t seed = Rng::derive_seed(spec.master_seed, r);
    cfg.rng_seed = seed;
    Rng rng(seed);
    const Scenario sc = sample_scenario(cfg, rng);
    for (std::size_t si = 0; si < n_schemes; ++si) {
      const Scheme scheme = spec.schemes[si];
      SchemeOptions so;
      so.run.criterion = spec.criterion;
      so.run.rx_mode = spec.rx_mode;
      so.random_samples = spec.random_samples;
      so.seed = Rng::derive_seed(spec.master_seed, r, 1);
      const auto t0 = std::chrono::steady_clock::now();
      const SchemeResult res = run_scheme(scheme, sc, so);
      RawRow& row = rows[(vi * n_reps + r) * n_schemes + si];
      row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      row.parameter = spec.parameter;
      row.value = value;
      row.scheme = scheme;
      row.realization = static_cast<int>(r);
      row.seed = seed;
      row.objective = res.objective;
      row.iterations = res.iterations;
      row.converged = res.trace.converged;
      if (spec.write_traces) {
        const std::string name = spec.parameter + "=" + short_num(value) + "_" + std::string(scheme_name(scheme)) +
                                 "_r" + std::to_string(r) + ".csv";
        write_trace_csv(res.trace, trace_dir / name);
      }
    }
  };

  const std::size_t n_tasks = n_values * n_reps;
  unsigned workers = spec.threads > 0 ? static_cast<unsigned>(spec.threads) : std::thread::hardware_concurrency();
  workers = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(n_tasks));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n_tasks; i = next++) {
      try {
        task(i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw SchemeError(e);
  }

  SweepResult out;
  out.raw = rows;
  out.agg = aggregate(rows);
  write_text_file(spec.out_dir / "raw.csv", raw_csv(out.raw));
  write_text_file(spec.out_dir / "agg.csv", agg_csv(out.agg));

  std::ostringstream timing;
  timing << "parameter,value,scheme,realization,wall_seconds\n";
  for (const auto& r : out.raw) {
    timing << r.parameter << ',' << num(r.value) << ',' << scheme_name(r.scheme) << ',' << r.realization << ','
           << num(r.wall_seconds) << '\n';
  }
  write_text_file(spec.out_dir / "timing.csv", timing.str());

  nlohmann::json meta;
  meta["schema_version"] = kCsvSchemaVersion;
  meta["parameter"] = spec.parameter;
  meta["values"] = spec.values;
  meta["realizations"] = spec.realizations;
  std::vector<std::string> names;
  for (Scheme s : spec.schemes) names.emplace_back(scheme_name(s));
  meta["schemes"] = names;
  meta["master_seed"] = spec.master_seed;
  meta["rx_mode"] = std::string(rx_mode_name(spec.rx_mode));
  meta["epsilon"] = spec.criterion.epsilon;
  meta["max_iterations"] = spec.criterion.max_iterations;
  meta["random_samples"] = spec.random_samples;
  meta["base_config"] = config_to_json(spec.base);
  meta["objective_db_definition"] = "mean_objective_db = 10 log10(mean of linear objectives)";
  meta["note"] = "sweep grid and realization count are run settings chosen by the caller, not fixed reference values";
  write_text_file(spec.out_dir / "meta.json", meta.dump(2) + "\n");
  return out;
}

}  // namespace mamc
