// SPDX-License-Identifier: Apache-2.0
//
// One SCA step for each block of the alternating loop: beamformers, a single
// transmit position, and the receive positions. Every update either improves
// (or keeps) the true max-min weighted SINR or leaves the block untouched.
#pragma once

#include <string_view>
#include <vector>

#include "mamc/channel_model.hpp"
#include "mamc/conic_kernel.hpp"

namespace mamc {

struct AlgorithmState {
  Beamformers beamformers;
  PositionState positions;
  double eta_anchor = 1e-12;          // eta^r, current objective floored at 1e-12
  std::vector<double> slack_anchor;   // z_k^r = interference + sigma_k^2, watts
  double objective = 0.0;             // min_k SINR_k / gamma_k
  int iteration = 0;

  /// Recomputes objective and anchors from the current iterate.
  void refresh(const Scenario& sc);
};

enum class BlockStatus {
  Updated,           // new iterate accepted
  Unchanged,         // nothing to optimize (e.g. constant surrogate)
  Fallback,          // solver failed; incumbent kept
  Rejected,          // solver point lowered the true objective; incumbent kept
  ZeroIncumbent,     // all beamformers are zero; caller must re-initialize
  InfeasibleAnchor,  // incumbent violates the minimum distance
};

std::string_view block_status_name(BlockStatus s);

struct BlockResult {
  BlockStatus status = BlockStatus::Unchanged;
  double objective_before = 0.0;
  double objective_after = 0.0;
  /// Optimal value of the surrogate subproblem (a lower bound on the true
  /// objective at the returned iterate).
  double surrogate_eta = 0.0;
  SolveStatus solver = SolveStatus::Optimal;
  int newton_steps = 0;
};

enum class RxMode { Sequential, Parallel, Collective };

std::string_view rx_mode_name(RxMode m);

struct BlockOptions {
  SolverSettings solver;
  RxMode rx_mode = RxMode::Sequential;
  int rx_threads = 0;  // 0 = one worker per user
};

/// N = 1 beamformer step: linearized w^H H_k w >= eta gamma_k sigma_k^2 with
/// ||w||^2 <= Pmax.
BlockResult update_beamformer_single(AlgorithmState& state, const Scenario& sc,
                                     const BlockOptions& opt = {});

/// Multi-group beamformer step using the affine under-estimator of
/// |h^H w_n|^2 / eta around (w_n^r, eta^r).
BlockResult update_beamformers_multi(AlgorithmState& state, const Scenario& sc,
                                     const BlockOptions& opt = {});

/// Moves antenna m with the others fixed. Uses the single-group or the slack
/// form depending on the number of groups.
BlockResult update_tx_position(AlgorithmState& state, const Scenario& sc, int m,
                               const BlockOptions& opt = {});

/// Moves every receive antenna. In single-group mode each user maximizes its
/// own lower surrogate (closed form when the maximizer is inside the region).
/// The three modes give the same surrogate max-min value.
BlockResult update_rx_positions(AlgorithmState& state, const Scenario& sc,
                                const BlockOptions& opt = {});

/// Closed-form maximizer r + grad / psi of a concave isotropic surrogate.
/// Returns r unchanged when psi is zero.
Vec2 rx_closed_form(const Vec2& anchor, const Vec2& gradient, double psi);

}  // namespace mamc
