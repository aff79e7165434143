// SPDX-License-Identifier: Apache-2.0
//
// Benchmark schemes and Monte Carlo sweeps with CSV output.
//
// Output files written by run_sweep into the output directory:
//   raw.csv     one row per (scheme, sweep value, realization)
//   agg.csv     per (scheme, sweep value) means
//   timing.csv  wall time per run (kept apart so raw/agg are reproducible)
//   meta.json   schema version, sweep settings, defaults in effect
//   traces/     one iteration trace per run
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mamc/ao_driver.hpp"

namespace mamc {

enum class Scheme { Proposed, ReceiveMa, TransmitMa, Fpa, RandomPosition };

std::string_view scheme_name(Scheme s);
/// Accepts the names printed by scheme_name (case-insensitive).
Scheme parse_scheme(std::string_view name);
std::vector<Scheme> all_schemes();

class SchemeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SchemeOptions {
  RunOptions run;
  int random_samples = 100;
  int rejection_cap = 10'000;
  std::uint64_t seed = 0;  // drives RANDOM_POSITION sampling
  /// When non-empty, RANDOM_POSITION evaluates exactly these layouts.
  std::vector<PositionState> injected_samples;
};

struct SchemeResult {
  double objective = 0.0;
  AlgorithmState state;
  IterationTrace trace;
  int iterations = 0;
};

/// M fixed antennas at half-wavelength spacing along x, centered on the origin.
std::vector<Vec2> ula_layout(int num_tx);

/// Draws a layout satisfying the region and minimum-distance constraints by
/// rejection (whole-layout redraw, at most `cap` attempts).
PositionState random_layout(const SystemConfig& cfg, Rng& rng, int cap);

SchemeResult run_scheme(Scheme scheme, const Scenario& sc, const SchemeOptions& opt = {});

inline constexpr int kCsvSchemaVersion = 1;

struct SweepSpec {
  std::string parameter;        // A, L, Pmax, K, N, M
  std::vector<double> values;
  int realizations = 1;
  SystemConfig base;
  std::vector<Scheme> schemes{Scheme::Proposed};
  std::filesystem::path out_dir = "out";
  std::uint64_t master_seed = 1;
  RxMode rx_mode = RxMode::Parallel;
  ConvergenceCriterion criterion;
  int random_samples = 100;
  int threads = 0;              // 0 = hardware concurrency
  bool write_traces = true;

  /// Throws std::invalid_argument when the sweep settings are invalid.
  void validate() const;
};

/// Applies one sweep value to a copy of `base`.
SystemConfig apply_sweep_value(const SystemConfig& base, std::string_view parameter, double value);

struct RawRow {
  std::string parameter;
  double value = 0.0;
  Scheme scheme = Scheme::Proposed;
  int realization = 0;
  std::uint64_t seed = 0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_seconds = 0.0;
};

struct AggRow {
  std::string parameter;
  double value = 0.0;
  Scheme scheme = Scheme::Proposed;
  int realizations = 0;
  double mean_objective = 0.0;      // linear
  double mean_objective_db = 0.0;   // 10 log10 of the linear mean
  double mean_of_db = 0.0;          // average of per-run dB values
  double mean_iterations = 0.0;
};

struct SweepResult {
  std::vector<RawRow> raw;
  std::vector<AggRow> agg;
};

inline constexpr const char* kRawHeader =
    "schema_version,parameter,value,scheme,realization,seed,objective,objective_db,iterations,converged";
inline constexpr const char* kAggHeader =
    "schema_version,parameter,value,scheme,realizations,mean_objective,mean_objective_db,mean_of_db,mean_iterations";

/// Runs every (value, realization, scheme) and writes the output files.
/// Realization r of every sweep point uses scenario seed substream(master, r).
SweepResult run_sweep(const SweepSpec& spec);

std::vector<AggRow> aggregate(const std::vector<RawRow>& raw);
std::string raw_csv(const std::vector<RawRow>& raw);
std::string agg_csv(const std::vector<AggRow>& agg);

}  // namespace mamc
