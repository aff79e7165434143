// SPDX-License-Identifier: Apache-2.0
#include "mamc/conic_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace mamc {

MaxEtaProblem::MaxEtaProblem(Eigen::Index n, Eigen::Index eta)
    : n_vars(n),
      eta_index(eta),
      lower(Eigen::VectorXd::Constant(n, -std::numeric_limits<double>::infinity())),
      upper(Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity())) {}

void MaxEtaProblem::add_affine(Eigen::VectorXd a, double b) { affine.push_back({std::move(a), b}); }

void MaxEtaProblem::add_quadratic(Eigen::MatrixXd Q, Eigen::VectorXd q, double c) {
  quadratic.push_back({std::move(Q), std::move(q), c});
}

void MaxEtaProblem::add_norm(Eigen::MatrixXd S, Eigen::VectorXd s, double rho) {
  norm.push_back({std::move(S), std::move(s), rho});
}

void MaxEtaProblem::set_bounds(Eigen::Index i, double lo, double hi) {
  lower[i] = lo;
  upper[i] = hi;
}

double MaxEtaProblem::max_violation(const Eigen::VectorXd& x) const {
  double v = 0.0;
  for (const auto& c : affine) v = std::max(v, c.a.dot(x) + c.b);
  for (const auto& c : quadratic) v = std::max(v, 0.5 * x.dot(c.Q * x) + c.q.dot(x) + c.c);
  for (const auto& c : norm) v = std::max(v, (c.S * x + c.s).norm() - c.rho);
  for (Eigen::Index i = 0; i < n_vars; ++i) {
    v = std::max(v, lower[i] - x[i]);
    v = std::max(v, x[i] - upper[i]);
  }
  return v;
}

void MaxEtaProblem::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("MaxEtaProblem: " + what); };
  if (n_vars < 1) fail("no variables");
  if (eta_index < 0 || eta_index >= n_vars) fail("eta_index out of range");
  if (lower.size() != n_vars || upper.size() != n_vars) fail("bound vectors have wrong size");
  for (const auto& c : affine) {
    if (c.a.size() != n_vars) fail("affine constraint has wrong size");
  }
  for (const auto& c : quadratic) {
    if (c.Q.rows() != n_vars || c.Q.cols() != n_vars || c.q.size() != n_vars) {
      fail("quadratic constraint has wrong size");
    }
    const double scale = std::max(1.0, c.Q.cwiseAbs().maxCoeff());
    if ((c.Q - c.Q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) fail("Q is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.Q, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9 * scale) fail("Q is not positive semidefinite");
  }
  for (const auto& c : norm) {
    if (c.S.cols() != n_vars || c.S.rows() != c.s.size()) fail("norm constraint has wrong size");
    if (!(c.rho >= 0.0)) fail("norm radius must be non-negative");
  }
}

std::string_view status_name(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::NumericalFailure:
      return "numerical_failure";
  }
  return "unknown";
}

namespace {

// f(y) = 1/2 y^T Q y + q^T y + c, Q omitted when affine.
struct Smooth {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  double c = 0.0;
  bool quadratic = false;

  double value(const Eigen::VectorXd& y) const {
    double v = q.dot(y) + c;
    if (quadratic) v += 0.5 * y.dot(Q * y);
    return v;
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& y) const { return quadratic ? Eigen::VectorXd(Q * y + q) : q; }
};

struct BarrierProblem {
  std::vector<Smooth> cons;
  Eigen::VectorXd cost;  // minimize cost^T y

  double max_value(const Eigen::VectorXd& y) const {
    double v = -std::numeric_limits<double>::infinity();
    for (const auto& f : cons) v = std::max(v, f.value(y));
    return v;
  }

  // t cost^T y - sum log(-f_i(y)); +inf outside the strict interior
  double potential(const Eigen::VectorXd& y, double t) const {
    double phi = t * cost.dot(y);
    for (const auto& f : cons) {
      const double v = f.value(y);
      if (!(v < 0.0)) return std::numeric_limits<double>::infinity();
      phi -= std::log(-v);
    }
    return phi;
  }
};

enum class CenterOutcome { Converged, IterationCap, Stalled, EarlyStop };

constexpr double kCenterTol = 1e-9;  // Newton decrement squared
constexpr double kNoiseTol = 1e-5;

CenterOutcome center(const BarrierProblem& bp, Eigen::VectorXd& y, double t, int max_iter,
                     int& steps, const std::function<bool(const Eigen::VectorXd&)>& early_stop) {
  const Eigen::Index n = y.size();
  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd g = t * bp.cost;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (const auto& f : bp.cons) {
      const double v = f.value(y);
      const double inv = -1.0 / v;
      const Eigen::VectorXd gf = f.grad(y);
      g.noalias() += inv * gf;
      H.noalias() += (inv * inv) * gf * gf.transpose();
      if (f.quadratic) H.noalias() += inv * f.Q;
    }
    Eigen::VectorXd dy;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() == Eigen::Success) dy = ldlt.solve(-g);
    if (dy.size() != n || !dy.allFinite()) {
      const double reg = 1e-12 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
      H.diagonal().array() += reg;
      dy = H.ldlt().solve(-g);
      if (!dy.allFinite()) return CenterOutcome::Stalled;
    }
    const double lambda2 = -g.dot(dy);
    ++steps;
    if (lambda2 <= kCenterTol) return CenterOutcome::Converged;

    // Potential change measured as t c^T (s dy) - sum log(f_i(new) / f_i(old)),
    // which avoids cancelling the large t c^T y term.
    std::vector<double> f_old(bp.cons.size());
    for (std::size_t i = 0; i < bp.cons.size(); ++i) f_old[i] = bp.cons[i].value(y);
    const double slope = t * bp.cost.dot(dy);
    double step = 1.0;
    bool accepted = false;
    while (step > 1e-16) {
      const Eigen::VectorXd cand = y + step * dy;
      double delta = step * slope;
      bool inside = true;
      for (std::size_t i = 0; i < bp.cons.size() && inside; ++i) {
        const double v = bp.cons[i].value(cand);
        inside = v < 0.0;
        if (inside) delta -= std::log(v / f_old[i]);
      }
      if (inside && delta <= -0.01 * step * lambda2) {
        y = cand;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || step < 1e-3) {
      // Roundoff dominates once the decrement is this small.
      if (lambda2 < kNoiseTol) return CenterOutcome::Converged;
      if (!accepted) return CenterOutcome::Stalled;
    }
    if (early_stop && early_stop(y)) return CenterOutcome::EarlyStop;
  }
  return CenterOutcome::IterationCap;
}

constexpr double kMu = 20.0;
constexpr int kMaxOuter = 80;

}  // namespace

SolveResult solve(const MaxEtaProblem& problem, const SolverSettings& settings,
                  const Eigen::VectorXd& warm_start) {
  problem.validate();
  const Eigen::Index n = problem.n_vars;
  SolveResult result;

  // Collect constraints in smooth form, each scaled to unit coefficient size.
  BarrierProblem bp;
  auto push = [&](Smooth f) {
    double scale = f.q.size() ? f.q.cwiseAbs().maxCoeff() : 0.0;
    if (f.quadratic) scale = std::max(scale, f.Q.cwiseAbs().maxCoeff());
    if (scale == 0.0) {
      return f.c <= settings.feasibility_tol;  // constant constraint
    }
    f.q /= scale;
    f.c /= scale;
    if (f.quadratic) f.Q /= scale;
    bp.cons.push_back(std::move(f));
    return true;
  };
  bool consistent = true;
  for (const auto& c : problem.affine) consistent &= push(Smooth{{}, c.a, c.b, false});
  for (const auto& c : problem.quadratic) {
    const bool is_quad = c.Q.cwiseAbs().maxCoeff() > 0.0;
    consistent &= push(Smooth{c.Q, c.q, c.c, is_quad});
  }
  for (const auto& c : problem.norm) {
    Smooth f;
    f.Q = 2.0 * c.S.transpose() * c.S;
    f.q = 2.0 * c.S.transpose() * c.s;
    f.c = c.s.squaredNorm() - c.rho * c.rho;
    f.quadratic = true;
    consistent &= push(std::move(f));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isfinite(problem.upper[i])) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
      a[i] = 1.0;
      consistent &= push(Smooth{{}, a, -problem.upper[i], false});
    }
    if (std::isfinite(problem.lower[i])) {
      Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
      a[i] = -1.0;
      consistent &= push(Smooth{{}, a, problem.lower[i], false});
    }
  }
  if (!consistent) {
    result.status = SolveStatus::Infeasible;
    return result;
  }
  bp.cost = Eigen::VectorXd::Zero(n);
  bp.cost[problem.eta_index] = -1.0;

  const bool have_warm = warm_start.size() == n && warm_start.allFinite();
  Eigen::VectorXd x = have_warm ? warm_start : Eigen::VectorXd::Zero(n);
  const bool warm_feasible = have_warm && problem.max_violation(warm_start) <= settings.feasibility_tol;
  const auto m = static_cast<double>(bp.cons.size());

  // Phase I: minimize s subject to f_i(x) <= s, s >= -1, ||x - x0|| <= R.
  constexpr double kInteriorMargin = 1e-7;
  if (!bp.cons.empty() && !(bp.max_value(x) < -kInteriorMargin)) {
    BarrierProblem p1;
    const Eigen::Index n1 = n + 1;
    for (const auto& f : bp.cons) {
      Smooth g;
      g.quadratic = f.quadratic;
      if (f.quadratic) {
        g.Q = Eigen::MatrixXd::Zero(n1, n1);
        g.Q.topLeftCorner(n, n) = f.Q;
      }
      g.q = Eigen::VectorXd::Zero(n1);
      g.q.head(n) = f.q;
      g.q[n] = -1.0;
      g.c = f.c;
      p1.cons.push_back(std::move(g));
    }
    {
      Smooth floor;
      floor.q = Eigen::VectorXd::Zero(n1);
      floor.q[n] = -1.0;
      floor.c = -1.0;
      p1.cons.push_back(std::move(floor));
    }
    {
      const double radius = 1e3 * std::max(1.0, x.cwiseAbs().maxCoeff());
      Smooth ball;
      ball.quadratic = true;
      ball.Q = Eigen::MatrixXd::Zero(n1, n1);
      ball.Q.topLeftCorner(n, n).diagonal().setConstant(2.0 / (radius * radius));
      ball.q = Eigen::VectorXd::Zero(n1);
      ball.q.head(n) = -2.0 * x / (radius * radius);
      ball.c = x.squaredNorm() / (radius * radius) - 1.0;
      p1.cons.push_back(std::move(ball));
    }
    p1.cost = Eigen::VectorXd::Zero(n1);
    p1.cost[n] = 1.0;

    Eigen::VectorXd y(n1);
    y.head(n) = x;
    y[n] = bp.max_value(x) + 1.0;
    auto interior = [&](const Eigen::VectorXd& yy) {
      return bp.max_value(yy.head(n)) < -kInteriorMargin;
    };
    double t = 1.0;
    const auto m1 = static_cast<double>(p1.cons.size());
    bool found = false;
    for (int outer = 0; outer < kMaxOuter; ++outer) {
      const CenterOutcome oc = center(p1, y, t, settings.max_iterations, result.newton_steps, interior);
      if (oc == CenterOutcome::EarlyStop || interior(y)) {
        found = true;
        break;
      }
      if (oc == CenterOutcome::Stalled || oc == CenterOutcome::IterationCap) break;
      if (m1 / t < 1e-12) break;
      // optimum of s is at least y[n] - gap; a positive bound proves infeasibility
      if (y[n] - m1 / t > settings.feasibility_tol) break;
      t *= kMu;
    }
    if (!found) {
      if (bp.max_value(y.head(n)) < 0.0) {
        found = true;
      } else {
        result.status = (y[n] - m1 / t > settings.feasibility_tol) ? SolveStatus::Infeasible
                                                                   : SolveStatus::NumericalFailure;
        if (warm_feasible) {
          result.x = warm_start;
          result.eta = warm_start[problem.eta_index];
        }
        return result;
      }
    }
    x = y.head(n);
  }

  // Phase II.
  double t = 1.0;
  bool done = bp.cons.empty();
  if (done) {
    result.status = SolveStatus::NumericalFailure;  // unconstrained objective is unbounded
    return result;
  }
  SolveStatus status = SolveStatus::NumericalFailure;
  for (int outer = 0; outer < kMaxOuter; ++outer) {
    const CenterOutcome oc = center(bp, x, t, settings.max_iterations, result.newton_steps, {});
    const double eta = x[problem.eta_index];
    if (!std::isfinite(eta) || std::abs(eta) > 1e100) break;
    if (oc == CenterOutcome::IterationCap) break;
    const double gap = m / t;
    result.gap = gap;
    if (gap <= settings.optimality_tol * std::max(1.0, std::abs(eta))) {
      status = SolveStatus::Optimal;
      break;
    }
    if (oc == CenterOutcome::Stalled) break;
    t *= kMu;
  }

  result.status = status;
  result.x = x;
  result.eta = x[problem.eta_index];
  if (problem.max_violation(x) > settings.feasibility_tol) {
    result.status = SolveStatus::NumericalFailure;
  }
  if (warm_feasible && warm_start[problem.eta_index] > result.eta) {
    result.x = warm_start;
    result.eta = warm_start[problem.eta_index];
  }
  return result;
}

}  // namespace mamc
