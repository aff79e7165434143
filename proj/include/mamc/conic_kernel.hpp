// SPDX-License-Identifier: Apache-2.0
//
// Dense solver for the small convex subproblems produced by every SCA step:
//
//   maximize x[eta_index]
//   s.t.     a^T x + b <= 0
//            (1/2) x^T Q x + q^T x + c <= 0      (Q PSD)
//            ||S x + s|| <= rho
//            lower <= x <= upper
//
// Log-barrier interior point method with a phase-I search for a strictly
// feasible start. Norm balls are handled as their squared (quadratic) form,
// which describes the same set.
#pragma once

#include <limits>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mamc {

struct AffineConstraint {
  Eigen::VectorXd a;
  double b = 0.0;
};

struct QuadraticConstraint {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
  double c = 0.0;
};

struct NormConstraint {
  Eigen::MatrixXd S;
  Eigen::VectorXd s;
  double rho = 0.0;
};

struct MaxEtaProblem {
  Eigen::Index n_vars = 0;
  Eigen::Index eta_index = 0;
  std::vector<AffineConstraint> affine;
  std::vector<QuadraticConstraint> quadratic;
  std::vector<NormConstraint> norm;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  MaxEtaProblem() = default;
  MaxEtaProblem(Eigen::Index n, Eigen::Index eta);

  void add_affine(Eigen::VectorXd a, double b);
  void add_quadratic(Eigen::MatrixXd Q, Eigen::VectorXd q, double c);
  void add_norm(Eigen::MatrixXd S, Eigen::VectorXd s, double rho);
  void set_bounds(Eigen::Index i, double lo, double hi);

  /// Largest constraint violation at x (0 when feasible); norm constraints
  /// measured as ||Sx + s|| - rho.
  double max_violation(const Eigen::VectorXd& x) const;

  /// Throws std::invalid_argument on dimension mismatch or an indefinite Q.
  void validate() const;
};

struct SolverSettings {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-8;
  int max_iterations = 200;  // Newton steps per centering pass
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure };

std::string_view status_name(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Eigen::VectorXd x;
  double eta = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();  // certified duality gap bound
  int newton_steps = 0;
};

/// `warm_start` may be empty. When it is feasible, the returned eta is never
/// below its eta.
SolveResult solve(const MaxEtaProblem& problem, const SolverSettings& settings = {},
                  const Eigen::VectorXd& warm_start = Eigen::VectorXd());

}  // namespace mamc
