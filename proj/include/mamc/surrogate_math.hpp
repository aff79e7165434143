// SPDX-License-Identifier: Apache-2.0
//
// Expansions of |h_k^H w_n|^2 that expose one position variable, their
// closed-form derivatives, a global curvature bound, and the quadratic
// surrogates built from them.
//
// Transmit side, for antenna m with every other antenna fixed:
//
//   u(t) = |w_m|^2 g(t)^H B g(t) + 2 Re{ w_m conj(Lambda) b^H g(t) } + |Lambda|^2
//
// with b = Sigma^H f(r), B = b b^H and Lambda = sum_{p != m} b^H g(t_p) w_p.
// Receive side: v(r) = f(r)^H C f(r), C = c c^H, c = Sigma G(t) w_n.
//
// Both are cosine sums (see kernels/trig_sum.hpp): pairs i < j contribute
// 2|X_ij| cos(2pi r^T (a_j - a_i) + arg X_ij), the diagonal is constant, and
// on the transmit side each path adds a cross term with |Lambda|.
#pragma once

#include <stdexcept>

#include "mamc/channel_model.hpp"
#include "mamc/kernels/trig_sum.hpp"

namespace mamc {

struct TxExpansionContext {
  int user = 0;
  int group = 0;
  int antenna = 0;
  CVector b;           // Sigma^H f(r_k)
  CMatrix B;           // b b^H
  cdouble w_m{0.0, 0.0};
  cdouble lambda{0.0, 0.0};
  std::vector<Vec2> dirs;
  kernels::TrigTerms terms;
};

struct RxExpansionContext {
  int user = 0;
  int group = 0;
  CMatrix C;           // c c^H
  std::vector<Vec2> dirs;
  kernels::TrigTerms terms;
};

enum class BoundDirection { Lower, Upper };

/// value(x) = v + g^T (x - a) -/+ (psi / 2) ||x - a||^2 for Lower / Upper.
struct QuadraticSurrogate {
  Vec2 anchor{0.0, 0.0};
  double value_at_anchor = 0.0;
  Vec2 gradient{0.0, 0.0};
  double curvature = 0.0;
  BoundDirection direction = BoundDirection::Lower;

  double evaluate(const Vec2& x) const;
  Vec2 gradient_at(const Vec2& x) const;
  double sign() const { return direction == BoundDirection::Lower ? -1.0 : 1.0; }
};

TxExpansionContext build_tx_context(const Scenario& sc, const PositionState& pos,
                                    const Beamformers& w, int k, int n, int m);

double u_value(const TxExpansionContext& ctx, const Vec2& t);
Vec2 u_gradient(const TxExpansionContext& ctx, const Vec2& t);
Mat2 u_hessian(const TxExpansionContext& ctx, const Vec2& t);
double tx_curvature_bound(const TxExpansionContext& ctx);
QuadraticSurrogate lower_surrogate_tx(const TxExpansionContext& ctx, const Vec2& anchor);
QuadraticSurrogate upper_surrogate_tx(const TxExpansionContext& ctx, const Vec2& anchor);

RxExpansionContext build_rx_context(const Scenario& sc, const PositionState& pos,
                                    const Beamformers& w, int k, int n);

double v_value(const RxExpansionContext& ctx, const Vec2& r);
Vec2 v_gradient(const RxExpansionContext& ctx, const Vec2& r);
Mat2 v_hessian(const RxExpansionContext& ctx, const Vec2& r);
double rx_curvature_bound(const RxExpansionContext& ctx);
QuadraticSurrogate lower_surrogate_rx(const RxExpansionContext& ctx, const Vec2& anchor);
QuadraticSurrogate upper_surrogate_rx(const RxExpansionContext& ctx, const Vec2& anchor);

/// Frobenius norm of sum_p amp_p k_p k_p^T: the Hessian bound obtained by
/// setting every cosine to 1. Global because amp_p >= 0.
double curvature_bound(const kernels::TrigTerms& terms);

/// Upper bound on eta * z: (1/2)((z_a / eta_a) eta^2 + (eta_a / z_a) z^2).
/// Throws std::domain_error for non-positive anchors.
double bilinear_upper_chi(double eta, double z, double eta_anchor, double z_anchor);

/// First-order lower bound on ||t - t_p||^2 around `anchor`.
double distance_linearization(const Vec2& t, const Vec2& anchor, const Vec2& t_p);

}  // namespace mamc
