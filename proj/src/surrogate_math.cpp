// SPDX-License-Identifier: Apache-2.0
#include "mamc/surrogate_math.hpp"

#include <cmath>

namespace mamc {
namespace {

constexpr double kWaveNumber = kTwoPi / kWavelength;

// Adds the i < j pair terms of x^H X x for X Hermitian, x_i = exp(j k a_i . pos).
void push_pair_terms(kernels::TrigTerms& terms, const CMatrix& X, const std::vector<Vec2>& dirs,
                     double scale) {
  const auto L = static_cast<Eigen::Index>(dirs.size());
  for (Eigen::Index i = 0; i + 1 < L; ++i) {
    for (Eigen::Index j = i + 1; j < L; ++j) {
      const cdouble x = X(i, j);
      const Vec2 d = kWaveNumber * (dirs[static_cast<std::size_t>(j)] - dirs[static_cast<std::size_t>(i)]);
      terms.push(2.0 * scale * std::abs(x), d.x(), d.y(), safe_arg(x));
    }
  }
}

Vec2 grad_of(const kernels::TrigEval& e) { return Vec2(e.grad_x, e.grad_y); }

Mat2 hess_of(const kernels::TrigEval& e) {
  Mat2 h;
  h << e.hess_xx, e.hess_xy, e.hess_xy, e.hess_yy;
  return h;
}

QuadraticSurrogate make_surrogate(const kernels::TrigTerms& terms, double psi, const Vec2& anchor,
                                  BoundDirection dir) {
  const kernels::TrigEval e = kernels::evaluate(terms, anchor.x(), anchor.y());
  QuadraticSurrogate s;
  s.anchor = anchor;
  s.value_at_anchor = e.value;
  s.gradient = grad_of(e);
  s.curvature = psi;
  s.direction = dir;
  return s;
}

}  // namespace

double QuadraticSurrogate::evaluate(const Vec2& x) const {
  const Vec2 d = x - anchor;
  return value_at_anchor + gradient.dot(d) + sign() * 0.5 * curvature * d.squaredNorm();
}

Vec2 QuadraticSurrogate::gradient_at(const Vec2& x) const {
  return gradient + sign() * curvature * (x - anchor);
}

double curvature_bound(const kernels::TrigTerms& terms) {
  double xx = 0.0, xy = 0.0, yy = 0.0;
  for (std::size_t p = 0; p < terms.size(); ++p) {
    xx += terms.amp[p] * terms.kx[p] * terms.kx[p];
    xy += terms.amp[p] * terms.kx[p] * terms.ky[p];
    yy += terms.amp[p] * terms.ky[p] * terms.ky[p];
  }
  return std::sqrt(xx * xx + 2.0 * xy * xy + yy * yy);
}

TxExpansionContext build_tx_context(const Scenario& sc, const PositionState& pos,
                                    const Beamformers& w, int k, int n, int m) {
  const UserChannel& u = sc.users[static_cast<std::size_t>(k)];
  const CVector& wn = w[static_cast<std::size_t>(n)];
  TxExpansionContext ctx;
  ctx.user = k;
  ctx.group = n;
  ctx.antenna = m;
  ctx.dirs = u.tx_dirs;
  const CVector f = rx_field_response(pos.rx[static_cast<std::size_t>(k)], u);
  ctx.b = u.path_response.adjoint() * f;
  ctx.B = ctx.b * ctx.b.adjoint();
  ctx.w_m = wn[m];
  for (int p = 0; p < sc.num_tx(); ++p) {
    if (p == m) continue;
    const CVector g = tx_field_response(pos.tx[static_cast<std::size_t>(p)], u);
    ctx.lambda += ctx.b.dot(g) * wn[p];  // b^H g w_p
  }

  const double wabs = std::abs(ctx.w_m);
  const double w2 = wabs * wabs;
  const double labs = std::abs(ctx.lambda);
  const auto L = static_cast<Eigen::Index>(ctx.dirs.size());
  ctx.terms.reserve(static_cast<std::size_t>(L * (L - 1) / 2 + L));
  push_pair_terms(ctx.terms, ctx.B, ctx.dirs, w2);
  const double cross_phase = safe_arg(ctx.w_m) - safe_arg(ctx.lambda);
  for (Eigen::Index i = 0; i < L; ++i) {
    const Vec2 d = kWaveNumber * ctx.dirs[static_cast<std::size_t>(i)];
    ctx.terms.push(2.0 * wabs * labs * std::abs(ctx.b[i]), d.x(), d.y(),
                   cross_phase - safe_arg(ctx.b[i]));
  }
  ctx.terms.constant = w2 * ctx.B.diagonal().real().sum() + labs * labs;
  return ctx;
}

double u_value(const TxExpansionContext& ctx, const Vec2& t) {
  return kernels::value(ctx.terms, t.x(), t.y());
}

Vec2 u_gradient(const TxExpansionContext& ctx, const Vec2& t) {
  return grad_of(kernels::evaluate(ctx.terms, t.x(), t.y()));
}

Mat2 u_hessian(const TxExpansionContext& ctx, const Vec2& t) {
  return hess_of(kernels::evaluate(ctx.terms, t.x(), t.y()));
}

double tx_curvature_bound(const TxExpansionContext& ctx) { return curvature_bound(ctx.terms); }

QuadraticSurrogate lower_surrogate_tx(const TxExpansionContext& ctx, const Vec2& anchor) {
  return make_surrogate(ctx.terms, tx_curvature_bound(ctx), anchor, BoundDirection::Lower);
}

QuadraticSurrogate upper_surrogate_tx(const TxExpansionContext& ctx, const Vec2& anchor) {
  return make_surrogate(ctx.terms, tx_curvature_bound(ctx), anchor, BoundDirection::Upper);
}

RxExpansionContext build_rx_context(const Scenario& sc, const PositionState& pos,
                                    const Beamformers& w, int k, int n) {
  const UserChannel& u = sc.users[static_cast<std::size_t>(k)];
  RxExpansionContext ctx;
  ctx.user = k;
  ctx.group = n;
  ctx.dirs = u.rx_dirs;
  // c = Sigma G(t) w_n
  CVector gw = CVector::Zero(u.tx_paths());
  const CVector& wn = w[static_cast<std::size_t>(n)];
  for (int m = 0; m < sc.num_tx(); ++m) {
    gw += tx_field_response(pos.tx[static_cast<std::size_t>(m)], u) * wn[m];
  }
  const CVector c = u.path_response * gw;
  ctx.C = c * c.adjoint();
  const auto L = static_cast<std::size_t>(ctx.dirs.size());
  ctx.terms.reserve(L * (L - 1) / 2);
  push_pair_terms(ctx.terms, ctx.C, ctx.dirs, 1.0);
  ctx.terms.constant = ctx.C.diagonal().real().sum();
  return ctx;
}

double v_value(const RxExpansionContext& ctx, const Vec2& r) {
  return kernels::value(ctx.terms, r.x(), r.y());
}

Vec2 v_gradient(const RxExpansionContext& ctx, const Vec2& r) {
  return grad_of(kernels::evaluate(ctx.terms, r.x(), r.y()));
}

Mat2 v_hessian(const RxExpansionContext& ctx, const Vec2& r) {
  return hess_of(kernels::evaluate(ctx.terms, r.x(), r.y()));
}

double rx_curvature_bound(const RxExpansionContext& ctx) { return curvature_bound(ctx.terms); }

QuadraticSurrogate lower_surrogate_rx(const RxExpansionContext& ctx, const Vec2& anchor) {
  return make_surrogate(ctx.terms, rx_curvature_bound(ctx), anchor, BoundDirection::Lower);
}

QuadraticSurrogate upper_surrogate_rx(const RxExpansionContext& ctx, const Vec2& anchor) {
  return make_surrogate(ctx.terms, rx_curvature_bound(ctx), anchor, BoundDirection::Upper);
}

double bilinear_upper_chi(double eta, double z, double eta_anchor, double z_anchor) {
  if (!(eta_anchor > 0.0) || !(z_anchor > 0.0)) {
    throw std::domain_error("bilinear_upper_chi: anchors must be strictly positive");
  }
  return 0.5 * ((z_anchor / eta_anchor) * eta * eta + (eta_anchor / z_anchor) * z * z);
}

double distance_linearization(const Vec2& t, const Vec2& anchor, const Vec2& t_p) {
  const Vec2 d = anchor - t_p;
  return d.squaredNorm() + 2.0 * d.dot(t - anchor);
}

}  // namespace mamc
