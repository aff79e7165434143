// SPDX-License-Identifier: Apache-2.0
#include "mamc/ao_driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

namespace mamc {

std::vector<double> IterationTrace::objectives() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.objective);
  return out;
}

RxMode default_rx_mode() {
  return std::thread::hardware_concurrency() > 1 ? RxMode::Parallel : RxMode::Sequential;
}

std::vector<Vec2> initial_tx_grid(const SystemConfig& cfg) {
  const GridShape g = tx_grid_shape(cfg.num_tx);
  const double spacing = std::max(cfg.min_distance, 0.5 * kWavelength);
  std::vector<Vec2> pos;
  pos.reserve(static_cast<std::size_t>(cfg.num_tx));
  for (int m = 0; m < cfg.num_tx; ++m) {
    const int r = m / g.cols;
    const int c = m % g.cols;
    pos.emplace_back((c - 0.5 * (g.cols - 1)) * spacing, (r - 0.5 * (g.rows - 1)) * spacing);
  }
  return pos;
}

AlgorithmState initialize_with_positions(const Scenario& sc, const PositionState& pos) {
  AlgorithmState st;
  st.positions = pos;
  const int N = sc.num_groups();
  const double amp = std::sqrt(sc.config.pmax_w / N);
  for (int n = 0; n < N; ++n) {
    CVector hbar = CVector::Zero(sc.num_tx());
    for (int k : sc.groups[static_cast<std::size_t>(n)]) hbar += channel_vector(sc, pos, k);
    const double nrm = hbar.norm();
    if (nrm > 0.0) {
      st.beamformers.push_back(amp * hbar / nrm);
    } else {
      CVector e = CVector::Zero(sc.num_tx());
      e[0] = 1.0;
      st.beamformers.push_back(amp * e);
    }
  }
  st.refresh(sc);
  return st;
}

AlgorithmState initialize(const Scenario& sc) {
  sc.config.validate();
  PositionState pos;
  pos.tx = initial_tx_grid(sc.config);
  pos.rx.assign(static_cast<std::size_t>(sc.num_users()), Vec2::Zero());
  return initialize_with_positions(sc, pos);
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

IterationRecord snapshot(const Scenario& sc, const AlgorithmState& st) {
  IterationRecord rec;
  rec.iteration = st.iteration;
  const SinrReport rep = compute_min_weighted_sinr(sc, st.positions, st.beamformers);
  rec.objective = rep.objective;
  rec.sinr = rep.sinr;
  return rec;
}

}  // namespace

RunResult run_from(const Scenario& sc, AlgorithmState state, const RunOptions& opt) {
  const bool multi = sc.num_groups() > 1;
  BlockOptions bo;
  bo.solver = opt.solver;
  bo.rx_mode = opt.rx_mode;
  bo.rx_threads = opt.rx_threads;
  auto notify = [&](BlockKind kind, const BlockResult& r) {
    if (opt.observer) opt.observer(kind, state, r);
  };

  RunResult out;
  state.iteration = 0;
  state.refresh(sc);
  out.trace.records.push_back(snapshot(sc, state));
  {
    BlockResult init;
    init.objective_before = init.objective_after = state.objective;
    notify(BlockKind::Initial, init);
  }

  for (int it = 1; it <= opt.criterion.max_iterations; ++it) {
    const double before = state.objective;
    state.iteration = it;
    IterationRecord rec;
    if (opt.optimize_beamformers) {
      const auto t0 = std::chrono::steady_clock::now();
      const BlockResult r = multi ? update_beamformers_multi(state, sc, bo) : update_beamformer_single(state, sc, bo);
      rec.beam_seconds = seconds_since(t0);
      rec.beam_status = r.status;
      notify(BlockKind::Beamformer, r);
    }
    if (opt.optimize_tx) {
      const auto t0 = std::chrono::steady_clock::now();
      for (int m = 0; m < sc.num_tx(); ++m) {
        const BlockResult r = update_tx_position(state, sc, m, bo);
        rec.tx_status.push_back(r.status);
        notify(BlockKind::TxPosition, r);
      }
      rec.tx_seconds = seconds_since(t0);
    }
    if (opt.optimize_rx) {
      const auto t0 = std::chrono::steady_clock::now();
      const BlockResult r = update_rx_positions(state, sc, bo);
      rec.rx_seconds = seconds_since(t0);
      rec.rx_status = r.status;
      notify(BlockKind::RxPositions, r);
    }
    state.refresh(sc);
    IterationRecord snap = snapshot(sc, state);
    rec.iteration = it;
    rec.objective = snap.objective;
    rec.sinr = std::move(snap.sinr);
    out.trace.records.push_back(std::move(rec));

    const double gain = (state.objective - before) / std::max(before, 1e-12);
    if (gain < opt.criterion.epsilon) {
      out.trace.converged = true;
      break;
    }
  }
  out.state = std::move(state);
  return out;
}

RunResult run_single_group(const Scenario& sc, const RunOptions& opt) {
  if (sc.num_groups() != 1) throw UsageError("run_single_group requires exactly one group");
  return run_from(sc, initialize(sc), opt);
}

RunResult run_multi_group(const Scenario& sc, const RunOptions& opt) {
  if (sc.num_groups() < 2) throw UsageError("run_multi_group requires at least two groups; use run_single_group");
  return run_from(sc, initialize(sc), opt);
}

RunResult run_single_group(const Scenario& sc, const ConvergenceCriterion& criterion, RxMode rx_mode) {
  RunOptions opt;
  opt.criterion = criterion;
  opt.rx_mode = rx_mode;
  return run_single_group(sc, opt);
}

RunResult run_multi_group(const Scenario& sc, const ConvergenceCriterion& criterion, RxMode rx_mode) {
  RunOptions opt;
  opt.criterion = criterion;
  opt.rx_mode = rx_mode;
  return run_multi_group(sc, opt);
}

}  // namespace mamc
