// SPDX-License-Identifier: Apache-2.0
//
// Alternating optimization loop: beamformers, then each transmit antenna in
// turn, then the receive antennas, repeated until the fractional increase of
// the max-min weighted SINR drops below epsilon.
#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mamc/block_updates.hpp"

namespace mamc {

class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct ConvergenceCriterion {
  double epsilon = 1e-4;
  int max_iterations = 200;
};

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  std::vector<double> sinr;
  double beam_seconds = 0.0;
  double tx_seconds = 0.0;
  double rx_seconds = 0.0;
  BlockStatus beam_status = BlockStatus::Unchanged;
  std::vector<BlockStatus> tx_status;
  BlockStatus rx_status = BlockStatus::Unchanged;
};

struct IterationTrace {
  std::vector<IterationRecord> records;  // records[0] is the initial point
  bool converged = false;

  std::vector<double> objectives() const;
  int iterations() const { return records.empty() ? 0 : static_cast<int>(records.size()) - 1; }
};

enum class BlockKind { Initial, Beamformer, TxPosition, RxPositions };

/// Called after initialization and after every block update.
using BlockObserver = std::function<void(BlockKind, const AlgorithmState&, const BlockResult&)>;

struct RunOptions {
  ConvergenceCriterion criterion;
  RxMode rx_mode = RxMode::Sequential;
  int rx_threads = 0;
  SolverSettings solver;
  bool optimize_beamformers = true;
  bool optimize_tx = true;
  bool optimize_rx = true;
  BlockObserver observer;
};

struct RunResult {
  AlgorithmState state;
  IterationTrace trace;
};

/// Parallel when more than one hardware thread is available.
RxMode default_rx_mode();

/// Centered square grid with spacing max(D, 1/2).
std::vector<Vec2> initial_tx_grid(const SystemConfig& cfg);

/// Grid transmit layout, receive antennas at their reference points, and
/// w_n = sqrt(Pmax / N) hbar_n / ||hbar_n|| with hbar_n the group's channel sum.
AlgorithmState initialize(const Scenario& sc);
AlgorithmState initialize_with_positions(const Scenario& sc, const PositionState& pos);

RunResult run_single_group(const Scenario& sc, const ConvergenceCriterion& criterion, RxMode rx_mode);
RunResult run_multi_group(const Scenario& sc, const ConvergenceCriterion& criterion, RxMode rx_mode);

/// Runs from a given state; picks the single- or multi-group blocks by N.
RunResult run_from(const Scenario& sc, AlgorithmState state, const RunOptions& opt);
RunResult run_single_group(const Scenario& sc, const RunOptions& opt);
RunResult run_multi_group(const Scenario& sc, const RunOptions& opt);

}  // namespace mamc
