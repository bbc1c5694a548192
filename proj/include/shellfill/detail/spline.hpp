#pragma once

// Exact polar evaluation of a closed uniform B-spline curve about its center.

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <vector>

#include "shellfill/voids.hpp"

namespace shellfill::detail {

inline constexpr int kMaxSplineOrder = 7;

/// Cardinal B-spline of degree deg on knots 0..deg+1 (Cox-de Boor).
template <class R>
R cardinal(R u, int deg) {
  R n[kMaxSplineOrder + 2];
  for (int i = 0; i <= deg; ++i) n[i] = (u >= i && u < i + 1) ? R(1) : R(0);
  for (int d = 1; d <= deg; ++d)
    for (int i = 0; i + d <= deg; ++i)
      n[i] = (u - i) / d * n[i] + (i + d + 1 - u) / d * n[i + 1];
  return n[0];
}

/// Weights w[m] (and dw/dt) of control point (segment + m) mod n at local
/// parameter t in [0, 1) for a uniform periodic spline of the given degree.
template <class R>
void bspline_weights(R t, int deg, R* w, R* dw) {
  for (int m = 0; m <= deg; ++m) {
    const R u = t + R(deg - m);
    w[m] = cardinal(u, deg);
    if (dw) dw[m] = deg == 0 ? R(0) : cardinal(u, deg - 1) - cardinal(u - 1, deg - 1);
  }
}

template <class R>
struct SplinePoint {
  R mu = 0;
  int seg = 0;
  R w[kMaxSplineOrder + 1] = {};
  R dw[kMaxSplineOrder + 1] = {};
  R cx = 0, cy = 0;    // curve point relative to the center
  R tx = 0, ty = 0;    // d(c)/d(mu)
  R r = 0;
  R psi_rate = 0;      // d(psi)/d(mu)
  R dr_dpsi = 0;
};

/// cos and sin of 2*pi*k/n interleaved, k = 0..n-1; cached per n.
template <class R>
const R* control_directions(int n) {
  thread_local std::map<int, std::vector<R>> cache;
  auto& d = cache[n];
  if (d.empty()) {
    d.resize(2 * static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const R a = 2 * std::numbers::pi_v<R> * R(k) / R(n);
      d[2 * k] = std::cos(a);
      d[2 * k + 1] = std::sin(a);
    }
  }
  return d.data();
}

template <class R>
void eval_spline(const VoidCurve& cv, const R* dir, R mu, SplinePoint<R>& sp) {
  const int n = cv.control_count();
  const int q = cv.spline_order;
  sp.mu = mu;
  sp.seg = static_cast<int>(std::floor(mu));
  const R t = mu - R(sp.seg);
  sp.seg = ((sp.seg % n) + n) % n;
  bspline_weights(t, q, sp.w, sp.dw);
  sp.cx = sp.cy = sp.tx = sp.ty = 0;
  for (int m = 0; m <= q; ++m) {
    const int k = (sp.seg + m) % n;
    const R d = cv.radii[k];
    const R ex = dir[2 * k], ey = dir[2 * k + 1];
    sp.cx += sp.w[m] * d * ex;
    sp.cy += sp.w[m] * d * ey;
    sp.tx += sp.dw[m] * d * ex;
    sp.ty += sp.dw[m] * d * ey;
  }
  const R r2 = sp.cx * sp.cx + sp.cy * sp.cy;
  sp.r = std::sqrt(r2);
  sp.psi_rate = (sp.cx * sp.ty - sp.cy * sp.tx) / r2;
  const R dr_dmu = (sp.cx * sp.tx + sp.cy * sp.ty) / sp.r;
  sp.dr_dpsi = dr_dmu / sp.psi_rate;
}

/// Curve point whose polar angle about the center is psi. Newton iteration on
/// the spline parameter, seeded from the radius table.
template <class R>
SplinePoint<R> spline_at_angle(const VoidCurve& cv, const RadiusTable& table, R psi) {
  const R two_pi = 2 * std::numbers::pi_v<R>;
  const R pi = std::numbers::pi_v<R>;
  const int n = cv.control_count();
  const R tol = 8 * std::numeric_limits<R>::epsilon();
  SplinePoint<R> sp;
  const R* dir = control_directions<R>(n);
  R mu = table.seed_parameter(static_cast<double>(psi));
  for (int it = 0; it < 40; ++it) {
    eval_spline(cv, dir, mu, sp);
    R diff = std::atan2(sp.cy, sp.cx) - psi;
    diff -= two_pi * std::floor((diff + pi) / two_pi);
    if (std::abs(diff) <= tol) break;
    R step = diff / sp.psi_rate;
    // Keep the update within a couple of table intervals of the seed region.
    const R cap = R(2 * n) / R(table.sample_count());
    step = std::max(-cap, std::min(cap, step));
    mu -= step;
    if (mu < 0) mu += R(n);
    if (mu >= R(n)) mu -= R(n);
  }
  return sp;
}

/// void_tdf in scalar type R.
template <class R>
R void_value(Point p, const VoidCurve& cv, const RadiusTable& table) {
  const R dx = R(p.x) - R(cv.center.x), dy = R(p.y) - R(cv.center.y);
  const R rho = std::sqrt(dx * dx + dy * dy);
  const R psi = rho > 0 ? std::atan2(dy, dx) : R(0);
  const R phi = rho - spline_at_angle<R>(cv, table, psi).r;
  return cv.inverted ? -phi : phi;
}

}  // namespace shellfill::detail
