// SPDX-License-Identifier: Apache-2.0
#include "mamc/block_updates.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <cmath>
#include <thread>

#include "mamc/serialization.hpp"
#include "mamc/surrogate_math.hpp"

namespace mamc {

void AlgorithmState::refresh(const Scenario& sc) {
  const SinrReport rep = compute_min_weighted_sinr(sc, positions, beamformers);
  objective = rep.objective;
  eta_anchor = std::max(objective, 1e-12);
  slack_anchor.resize(static_cast<std::size_t>(sc.num_users()));
  for (int k = 0; k < sc.num_users(); ++k) {
    slack_anchor[static_cast<std::size_t>(k)] = rep.interference[static_cast<std::size_t>(k)] + sc.config.noise(k);
  }
}

std::string_view block_status_name(BlockStatus s) {
  switch (s) {
    case BlockStatus::Updated:
      return "updated";
    case BlockStatus::Unchanged:
      return "unchanged";
    case BlockStatus::Fallback:
      return "fallback";
    case BlockStatus::Rejected:
      return "rejected";
    case BlockStatus::ZeroIncumbent:
      return "zero_incumbent";
    case BlockStatus::InfeasibleAnchor:
      return "infeasible_anchor";
  }
  return "unknown";
}

std::string_view rx_mode_name(RxMode m) {
  switch (m) {
    case RxMode::Sequential:
      return "seq";
    case RxMode::Parallel:
      return "par";
    case RxMode::Collective:
      return "collective";
  }
  return "unknown";
}

Vec2 rx_closed_form(const Vec2& anchor, const Vec2& gradient, double psi) {
  if (!(psi > 0.0)) return anchor;
  return anchor + gradient / psi;
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kFlatTol = 1e-12;

double gamma_sigma(const Scenario& sc, int k) { return sc.config.weight_of(k) * sc.config.noise(k); }

VectorXd stack(const CVector& w) {
  VectorXd x(2 * w.size());
  x.head(w.size()) = w.real();
  x.tail(w.size()) = w.imag();
  return x;
}

CVector unstack(const VectorXd& x, Index offset, Index M) {
  CVector w(M);
  for (Index i = 0; i < M; ++i) w[i] = cdouble(x[offset + i], x[offset + M + i]);
  return w;
}

// Real-stacked coefficient of Re{c^T w}: c^T w = sum (cr + j ci)(xr + j xi).
VectorXd re_coeffs(const CVector& c) {
  VectorXd v(2 * c.size());
  v.head(c.size()) = c.real();
  v.tail(c.size()) = -c.imag();
  return v;
}

VectorXd im_coeffs(const CVector& c) {
  VectorXd v(2 * c.size());
  v.head(c.size()) = c.imag();
  v.tail(c.size()) = c.real();
  return v;
}

// Convex quadratic constraint assembled in place.
struct Quad {
  MatrixXd Q;
  VectorXd q;
  double c = 0.0;
  explicit Quad(Index n) : Q(MatrixXd::Zero(n, n)), q(VectorXd::Zero(n)) {}
};

void add_surrogate(Quad& f, const QuadraticSurrogate& s, Index at, double scale, double sign) {
  // sign * s(anchor + delta) * scale, delta stored at [at, at + 1]
  f.c += sign * scale * s.value_at_anchor;
  f.q.segment<2>(at) += sign * scale * s.gradient;
  const double curv = sign * scale * s.sign() * s.curvature;
  f.Q(at, at) += curv;
  f.Q(at + 1, at + 1) += curv;
}

bool flat(const QuadraticSurrogate& s, double scale) {
  const double ref = kFlatTol * std::max(1.0, std::abs(s.value_at_anchor) * scale);
  return s.gradient.norm() * scale <= ref && s.curvature * scale <= ref;
}

void box_delta(MaxEtaProblem& p, Index at, const Vec2& anchor, double half) {
  p.set_bounds(at, -half - anchor.x(), half - anchor.x());
  p.set_bounds(at + 1, -half - anchor.y(), half - anchor.y());
}

bool accept(AlgorithmState& state, const Scenario& sc, const AlgorithmState& candidate_in,
            BlockResult& res) {
  AlgorithmState candidate = candidate_in;
  candidate.refresh(sc);
  if (!(candidate.objective >= res.objective_before)) {
    res.status = BlockStatus::Rejected;
    res.objective_after = res.objective_before;
    return false;
  }
  const int it = state.iteration;
  state = std::move(candidate);
  state.iteration = it;
  res.status = BlockStatus::Updated;
  res.objective_after = state.objective;
  return true;
}

// Solves and, when MAMC_DUMP_DIR is set, writes every non-optimal problem
// there for offline inspection.
SolveResult solve_block(const MaxEtaProblem& prob, const SolverSettings& settings, const VectorXd& warm) {
  SolveResult sol = solve(prob, settings, warm);
  if (sol.status != SolveStatus::Optimal) {
    if (const char* dir = std::getenv("MAMC_DUMP_DIR"); dir != nullptr && *dir != '\0') {
      static std::atomic<int> counter{0};
      nlohmann::json j = problem_to_json(prob);
      j["warm_start"] = std::vector<double>(warm.data(), warm.data() + warm.size());
      j["status"] = std::string(status_name(sol.status));
      const auto path = std::filesystem::path(dir) / ("problem_" + std::to_string(counter++) + ".json");
      try {
        write_text_file(path, j.dump(2) + "\n");
      } catch (const IoError&) {
        // debugging aid only
      }
    }
  }
  return sol;
}

template <typename Fn>
void parallel_for(int count, int threads, Fn fn) {
  int workers = threads > 0 ? threads : count;
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

BlockResult update_beamformer_single(AlgorithmState& state, const Scenario& sc, const BlockOptions& opt) {
  state.refresh(sc);
  BlockResult res;
  res.objective_before = res.objective_after = state.objective;
  const CVector& w = state.beamformers.at(0);
  if (w.squaredNorm() == 0.0) {
    res.status = BlockStatus::ZeroIncumbent;
    return res;
  }
  const double P = sc.config.pmax_w;
  const Index M = sc.num_tx();
  const Index n = 2 * M + 1;
  const Index eta = 2 * M;
  const CVector wt = w / std::sqrt(P);

  // eta <= (P / gamma sigma^2) (2 Re{a^* h^H w} - |a|^2), a = h^H w^l
  MaxEtaProblem prob(n, eta);
  for (int k = 0; k < sc.num_users(); ++k) {
    const CVector row = channel_row(sc, state.positions, k);
    const cdouble a = row.cwiseProduct(wt).sum();
    const double s = P / gamma_sigma(sc, k);
    VectorXd coef = VectorXd::Zero(n);
    coef.head(2 * M) = -2.0 * s * re_coeffs(std::conj(a) * row);
    coef[eta] = 1.0;
    prob.add_affine(coef, s * std::norm(a));
  }
  MatrixXd S = MatrixXd::Zero(2 * M, n);
  S.leftCols(2 * M).setIdentity();
  prob.add_norm(S, VectorXd::Zero(2 * M), 1.0);

  VectorXd warm(n);
  warm.head(2 * M) = stack(wt);
  warm[eta] = state.objective;
  const SolveResult sol = solve_block(prob, opt.solver, warm);
  res.solver = sol.status;
  res.newton_steps = sol.newton_steps;
  if (sol.status != SolveStatus::Optimal) {
    res.status = BlockStatus::Fallback;
    return res;
  }
  res.surrogate_eta = sol.eta;
  CVector wn = unstack(sol.x, 0, M) * std::sqrt(P);
  const double pw = wn.squaredNorm();
  if (pw > P) wn *= std::sqrt(P / pw);
  AlgorithmState cand = state;
  cand.beamformers[0] = wn;
  accept(state, sc, cand, res);
  return res;
}

BlockResult update_beamformers_multi(AlgorithmState& state, const Scenario& sc, const BlockOptions& opt) {
  state.refresh(sc);
  BlockResult res;
  res.objective_before = res.objective_after = state.objective;
  if (total_power(state.beamformers) == 0.0) {
    res.status = BlockStatus::ZeroIncumbent;
    return res;
  }
  const double P = sc.config.pmax_w;
  const Index M = sc.num_tx();
  const int N = sc.num_groups();
  const Index nw = 2 * M * N;
  const Index n = nw + 1;
  const Index eta = nw;
  const double eta_r = state.eta_anchor;
  std::vector<CVector> wt(static_cast<std::size_t>(N));
  for (int q = 0; q < N; ++q) wt[static_cast<std::size_t>(q)] = state.beamformers[static_cast<std::size_t>(q)] / std::sqrt(P);

  // (P / sigma^2) sum_{q != n} |h^H w_q|^2 + 1
  //   <= s (2 Re{a_r^* h^H w_n} / eta_r - |a_r|^2 eta / eta_r^2),  s = P / (gamma sigma^2)
  MaxEtaProblem prob(n, eta);
  for (int k = 0; k < sc.num_users(); ++k) {
    const int g = sc.users[static_cast<std::size_t>(k)].group;
    const CVector row = channel_row(sc, state.positions, k);
    const double s = P / gamma_sigma(sc, k);
    const double s_int = P / sc.config.noise(k);
    const VectorXd pr = re_coeffs(row);
    const VectorXd pi = im_coeffs(row);
    const MatrixXd gram = 2.0 * s_int * (pr * pr.transpose() + pi * pi.transpose());
    Quad f(n);
    for (int q = 0; q < N; ++q) {
      if (q == g) continue;
      f.Q.block(2 * M * q, 2 * M * q, 2 * M, 2 * M) = gram;
    }
    const cdouble a = row.cwiseProduct(wt[static_cast<std::size_t>(g)]).sum();
    f.q.segment(2 * M * g, 2 * M) = -(2.0 * s / eta_r) * re_coeffs(std::conj(a) * row);
    f.q[eta] = s * std::norm(a) / (eta_r * eta_r);
    f.c = 1.0;
    prob.add_quadratic(f.Q, f.q, f.c);
  }
  MatrixXd S = MatrixXd::Zero(nw, n);
  S.leftCols(nw).setIdentity();
  prob.add_norm(S, VectorXd::Zero(nw), 1.0);

  VectorXd warm(n);
  for (int q = 0; q < N; ++q) warm.segment(2 * M * q, 2 * M) = stack(wt[static_cast<std::size_t>(q)]);
  warm[eta] = eta_r;
  const SolveResult sol = solve_block(prob, opt.solver, warm);
  res.solver = sol.status;
  res.newton_steps = sol.newton_steps;
  if (sol.status != SolveStatus::Optimal) {
    res.status = BlockStatus::Fallback;
    return res;
  }
  res.surrogate_eta = sol.eta;
  AlgorithmState cand = state;
  for (int q = 0; q < N; ++q) {
    cand.beamformers[static_cast<std::size_t>(q)] = unstack(sol.x, 2 * M * q, M) * std::sqrt(P);
  }
  const double pw = total_power(cand.beamformers);
  if (pw > P) {
    for (auto& v : cand.beamformers) v *= std::sqrt(P / pw);
  }
  accept(state, sc, cand, res);
  return res;
}

BlockResult update_tx_position(AlgorithmState& state, const Scenario& sc, int m, const BlockOptions& opt) {
  state.refresh(sc);
  BlockResult res;
  res.objective_before = res.objective_after = state.objective;
  const auto& tx = state.positions.tx;
  const Vec2 anchor = tx.at(static_cast<std::size_t>(m));
  const double D = sc.config.min_distance;
  for (int p = 0; p < sc.num_tx(); ++p) {
    if (p == m) continue;
    if ((anchor - tx[static_cast<std::size_t>(p)]).norm() < D - 1e-9) {
      res.status = BlockStatus::InfeasibleAnchor;
      return res;
    }
  }
  const int K = sc.num_users();
  const int N = sc.num_groups();
  const bool multi = N > 1;
  const Index n = multi ? 3 + K : 3;
  const Index eta = 2;
  MaxEtaProblem prob(n, eta);
  bool all_flat = true;
  for (int k = 0; k < K; ++k) {
    const int g = sc.users[static_cast<std::size_t>(k)].group;
    const double gs = gamma_sigma(sc, k);
    const TxExpansionContext own = build_tx_context(sc, state.positions, state.beamformers, k, g, m);
    const QuadraticSurrogate lb = lower_surrogate_tx(own, anchor);
    all_flat = all_flat && flat(lb, 1.0 / gs);
    Quad f(n);
    if (!multi) {
      // eta - u_lb / (gamma sigma^2) <= 0
      add_surrogate(f, lb, 0, 1.0 / gs, -1.0);
      f.q[eta] = 1.0;
      prob.add_quadratic(f.Q, f.q, f.c);
      continue;
    }
    // chi(eta, z_k) - u_lb / (gamma sigma^2) <= 0, z scaled by sigma_k^2
    const double sigma2 = sc.config.noise(k);
    const Index z = 3 + k;
    const double z_r = state.slack_anchor[static_cast<std::size_t>(k)] / sigma2;
    const double eta_r = state.eta_anchor;
    add_surrogate(f, lb, 0, 1.0 / gs, -1.0);
    f.Q(eta, eta) += z_r / eta_r;
    f.Q(z, z) += eta_r / z_r;
    prob.add_quadratic(f.Q, f.q, f.c);
    // sum_{q != g} u_ub / sigma^2 + 1 - z_k <= 0
    Quad h(n);
    for (int q = 0; q < N; ++q) {
      if (q == g) continue;
      const TxExpansionContext other = build_tx_context(sc, state.positions, state.beamformers, k, q, m);
      const QuadraticSurrogate ub = upper_surrogate_tx(other, anchor);
      all_flat = all_flat && flat(ub, 1.0 / sigma2);
      add_surrogate(h, ub, 0, 1.0 / sigma2, 1.0);
    }
    h.c += 1.0;
    h.q[z] = -1.0;
    prob.add_quadratic(h.Q, h.q, h.c);
  }
  if (all_flat) {
    res.status = BlockStatus::Unchanged;
    res.surrogate_eta = state.objective;
    return res;
  }
  // ||anchor - t_p||^2 + 2 (anchor - t_p)^T delta >= D^2
  for (int p = 0; p < sc.num_tx(); ++p) {
    if (p == m) continue;
    const Vec2 d = anchor - tx[static_cast<std::size_t>(p)];
    VectorXd a = VectorXd::Zero(n);
    a.head<2>() = -2.0 * d;
    prob.add_affine(a, D * D - d.squaredNorm());
  }
  box_delta(prob, 0, anchor, 0.5 * sc.config.region_size);

  VectorXd warm = VectorXd::Zero(n);
  if (multi) {
    warm[eta] = state.eta_anchor;
    for (int k = 0; k < K; ++k) warm[3 + k] = state.slack_anchor[static_cast<std::size_t>(k)] / sc.config.noise(k);
  } else {
    warm[eta] = state.objective;
  }
  const SolveResult sol = solve_block(prob, opt.solver, warm);
  res.solver = sol.status;
  res.newton_steps = sol.newton_steps;
  if (sol.status != SolveStatus::Optimal) {
    res.status = BlockStatus::Fallback;
    return res;
  }
  res.surrogate_eta = sol.eta;
  AlgorithmState cand = state;
  Vec2 t_new = anchor + sol.x.head<2>();
  const double half = 0.5 * sc.config.region_size;
  t_new = t_new.cwiseMax(-half).cwiseMin(half);
  cand.positions.tx[static_cast<std::size_t>(m)] = t_new;
  for (int p = 0; p < sc.num_tx(); ++p) {
    if (p != m && (t_new - tx[static_cast<std::size_t>(p)]).norm() < D - 1e-9) {
      res.status = BlockStatus::Rejected;
      return res;
    }
  }
  accept(state, sc, cand, res);
  return res;
}

namespace {

// Per-user receive subproblem pieces. The delta variables of user k sit at
// `at`, its slack (multi-group) at `z`.
struct RxUserModel {
  bool flat = true;
  Quad own{0};
  Quad inter{0};
  bool has_inter = false;
  double z_anchor = 1.0;
};

RxUserModel build_rx_model(const AlgorithmState& state, const Scenario& sc, int k, Index n, Index at,
                           Index eta, Index z) {
  RxUserModel mdl;
  const int g = sc.users[static_cast<std::size_t>(k)].group;
  const double gs = gamma_sigma(sc, k);
  const Vec2 anchor = state.positions.rx[static_cast<std::size_t>(k)];
  const RxExpansionContext own = build_rx_context(sc, state.positions, state.beamformers, k, g);
  const QuadraticSurrogate lb = lower_surrogate_rx(own, anchor);
  mdl.flat = flat(lb, 1.0 / gs);
  mdl.own = Quad(n);
  add_surrogate(mdl.own, lb, at, 1.0 / gs, -1.0);
  if (sc.num_groups() == 1) {
    mdl.own.q[eta] += 1.0;
    return mdl;
  }
  const double sigma2 = sc.config.noise(k);
  mdl.z_anchor = state.slack_anchor[static_cast<std::size_t>(k)] / sigma2;
  const double eta_r = state.eta_anchor;
  mdl.own.Q(eta, eta) += mdl.z_anchor / eta_r;
  mdl.own.Q(z, z) += eta_r / mdl.z_anchor;
  mdl.inter = Quad(n);
  mdl.has_inter = true;
  for (int q = 0; q < sc.num_groups(); ++q) {
    if (q == g) continue;
    const RxExpansionContext other = build_rx_context(sc, state.positions, state.beamformers, k, q);
    const QuadraticSurrogate ub = upper_surrogate_rx(other, anchor);
    mdl.flat = mdl.flat && flat(ub, 1.0 / sigma2);
    add_surrogate(mdl.inter, ub, at, 1.0 / sigma2, 1.0);
  }
  mdl.inter.c += 1.0;
  mdl.inter.q[z] = -1.0;
  return mdl;
}

struct RxUserOutcome {
  Vec2 position{0.0, 0.0};
  double eta = 0.0;
  SolveStatus solver = SolveStatus::Optimal;
  int newton_steps = 0;
  bool moved = false;
};

RxUserOutcome solve_rx_user(const AlgorithmState& state, const Scenario& sc, int k, const SolverSettings& settings) {
  RxUserOutcome out;
  const Vec2 anchor = state.positions.rx[static_cast<std::size_t>(k)];
  out.position = anchor;
  const bool multi = sc.num_groups() > 1;
  const double half = 0.5 * sc.config.region_size;
  const Index n = multi ? 4 : 3;
  const Index eta = 2;
  const Index z = 3;
  const RxUserModel mdl = build_rx_model(state, sc, k, n, 0, eta, z);

  if (!multi) {
    const int g = sc.users[static_cast<std::size_t>(k)].group;
    const RxExpansionContext ctx = build_rx_context(sc, state.positions, state.beamformers, k, g);
    const QuadraticSurrogate lb = lower_surrogate_rx(ctx, anchor);
    const double gs = gamma_sigma(sc, k);
    if (mdl.flat) {
      out.eta = lb.value_at_anchor / gs;
      return out;
    }
    const Vec2 r_star = rx_closed_form(anchor, lb.gradient, lb.curvature);
    if (lb.curvature > 0.0 && r_star.cwiseAbs().maxCoeff() <= half) {
      out.position = r_star;
      out.eta = lb.evaluate(r_star) / gs;
      out.moved = true;
      return out;
    }
  } else if (mdl.flat) {
    out.eta = state.eta_anchor;
    return out;
  }

  MaxEtaProblem prob(n, eta);
  prob.add_quadratic(mdl.own.Q, mdl.own.q, mdl.own.c);
  if (mdl.has_inter) prob.add_quadratic(mdl.inter.Q, mdl.inter.q, mdl.inter.c);
  box_delta(prob, 0, anchor, half);
  VectorXd warm = VectorXd::Zero(n);
  warm[eta] = multi ? state.eta_anchor : -mdl.own.c;
  if (multi) warm[z] = mdl.z_anchor;
  const SolveResult sol = solve_block(prob, settings, warm);
  out.solver = sol.status;
  out.newton_steps = sol.newton_steps;
  if (sol.status != SolveStatus::Optimal) {
    out.eta = warm[eta];
    return out;
  }
  out.eta = sol.eta;
  out.position = (anchor + sol.x.head<2>()).cwiseMax(-half).cwiseMin(half);
  out.moved = true;
  return out;
}

}  // namespace

BlockResult update_rx_positions(AlgorithmState& state, const Scenario& sc, const BlockOptions& opt) {
  state.refresh(sc);
  BlockResult res;
  res.objective_before = res.objective_after = state.objective;
  const int K = sc.num_users();
  const bool multi = sc.num_groups() > 1;
  const double half = 0.5 * sc.config.region_size;
  AlgorithmState cand = state;
  bool moved = false;
  bool failed = false;

  if (opt.rx_mode == RxMode::Collective) {
    // Shared eta: [delta_1 .. delta_K, eta, z_1 .. z_K]
    const Index eta = 2 * K;
    const Index n = multi ? 3 * K + 1 : 2 * K + 1;
    MaxEtaProblem prob(n, eta);
    VectorXd warm = VectorXd::Zero(n);
    std::vector<bool> flat_user(static_cast<std::size_t>(K));
    double warm_eta = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const Index at = 2 * k;
      const Index z = 2 * K + 1 + k;
      const RxUserModel mdl = build_rx_model(state, sc, k, n, at, eta, multi ? z : eta);
      flat_user[static_cast<std::size_t>(k)] = mdl.flat;
      prob.add_quadratic(mdl.own.Q, mdl.own.q, mdl.own.c);
      if (mdl.has_inter) prob.add_quadratic(mdl.inter.Q, mdl.inter.q, mdl.inter.c);
      const Vec2 anchor = state.positions.rx[static_cast<std::size_t>(k)];
      // Flat users have no position dependence; their deltas stay at zero.
      if (!mdl.flat) box_delta(prob, at, anchor, half);
      if (multi) {
        warm[z] = mdl.z_anchor;
      } else {
        warm_eta = std::min(warm_eta, -mdl.own.c);
      }
    }
    warm[eta] = multi ? state.eta_anchor : warm_eta;
    const SolveResult sol = solve_block(prob, opt.solver, warm);
    res.solver = sol.status;
    res.newton_steps = sol.newton_steps;
    if (sol.status != SolveStatus::Optimal) {
      res.status = BlockStatus::Fallback;
      res.surrogate_eta = warm[eta];
      return res;
    }
    res.surrogate_eta = sol.eta;
    for (int k = 0; k < K; ++k) {
      if (flat_user[static_cast<std::size_t>(k)]) continue;
      Vec2& r = cand.positions.rx[static_cast<std::size_t>(k)];
      r = (r + sol.x.segment<2>(2 * k)).cwiseMax(-half).cwiseMin(half);
      moved = true;
    }
  } else {
    std::vector<RxUserOutcome> outs(static_cast<std::size_t>(K));
    auto work = [&](int k) { outs[static_cast<std::size_t>(k)] = solve_rx_user(state, sc, k, opt.solver); };
    if (opt.rx_mode == RxMode::Parallel) {
      parallel_for(K, opt.rx_threads, work);
    } else {
      for (int k = 0; k < K; ++k) work(k);
    }
    double eta = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
      const RxUserOutcome& o = outs[static_cast<std::size_t>(k)];
      eta = std::min(eta, o.eta);
      res.newton_steps += o.newton_steps;
      if (o.solver != SolveStatus::Optimal) {
        failed = true;
        res.solver = o.solver;
      }
      if (o.moved) {
        cand.positions.rx[static_cast<std::size_t>(k)] = o.position;
        moved = true;
      }
    }
    res.surrogate_eta = K > 0 ? eta : 0.0;
  }

  if (!moved) {
    res.status = failed ? BlockStatus::Fallback : BlockStatus::Unchanged;
    return res;
  }
  accept(state, sc, cand, res);
  return res;
}

}  // namespace mamc
