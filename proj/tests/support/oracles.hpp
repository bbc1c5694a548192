#pragma once

// Independent reference formulas. Nothing here calls into the library's
// geometry, field or FEM code.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "shellfill/geometry.hpp"

namespace oracle {

using shellfill::Point;

/// Log-sum-exp in long double without shifting; fine for |l*v| < 10000.
inline double ks_naive(const std::vector<double>& v, double l) {
  long double s = 0.0L;
  for (double x : v) s += std::exp(static_cast<long double>(l) * x);
  return static_cast<double>(std::log(s) / l);
}

struct Local {
  double xl, yl, b;
};

inline Local local(Point p, const shellfill::ComponentParams& c) {
  const double dx = p.x - c.center.x, dy = p.y - c.center.y;
  const double cs = std::cos(c.angle), sn = std::sin(c.angle);
  Local f{cs * dx + sn * dy, -sn * dx + cs * dy, 0.0};
  f.b = 0.5 * (c.t1 + c.t2) + 0.5 * (c.t2 - c.t1) * f.xl / c.half_length;
  f.b = std::max(f.b, 1e-9 * c.half_length);
  return f;
}

/// 1 - ((x'/a)^p + (y'/b)^p)^(1/p).
inline double component(Point p, const shellfill::ComponentParams& c) {
  const Local f = local(p, c);
  const double s = std::pow(std::abs(f.xl / c.half_length), c.exponent) +
                   std::pow(std::abs(f.yl / f.b), c.exponent);
  return 1.0 - std::pow(s, 1.0 / c.exponent);
}

/// Unrooted form 1 - (x'/a)^p - (y'/b)^p.
inline double component_unrooted(Point p, const shellfill::ComponentParams& c) {
  const Local f = local(p, c);
  return 1.0 - std::pow(f.xl / c.half_length, c.exponent) - std::pow(f.yl / f.b, c.exponent);
}

/// x + sum_r a_r,0 cos(r pi (x - L/2)/L) + a_r,1 sin(...), likewise in y.
inline Point perturb(Point p, const shellfill::CPFCoefficients& c) {
  Point q = p;
  for (std::size_t r = 0; r < c.alpha.size(); ++r) {
    const double w = r * std::numbers::pi / c.length * (p.x - 0.5 * c.length);
    q.x += c.alpha[r][0] * std::cos(w) + c.alpha[r][1] * std::sin(w);
  }
  for (std::size_t r = 0; r < c.beta.size(); ++r) {
    const double w = r * std::numbers::pi / c.height * (p.y - 0.5 * c.height);
    q.y += c.beta[r][0] * std::cos(w) + c.beta[r][1] * std::sin(w);
  }
  return q;
}

/// Hard max over every component instance of the perturbed lattice.
inline double lattice_exact(Point p, const shellfill::LatticeSpec& lat) {
  double best = -1e300;
  for (const auto& pc : lat.prototype) {
    const Point q = perturb(p, lat.cpfs[static_cast<std::size_t>(pc.cpf_index)]);
    for (int j = 0; j < lat.cells_y; ++j)
      for (int i = 0; i < lat.cells_x; ++i) {
        shellfill::ComponentParams c = pc.geom;
        c.center.x += i * lat.length / lat.cells_x;
        c.center.y += j * lat.height / lat.cells_y;
        best = std::max(best, component(q, c));
      }
  }
  return best;
}

/// Closed quadratic uniform B-spline through the control polygon, sampled
/// densely: (t^2 - 2t + 1)/2, (-2t^2 + 2t + 1)/2, t^2/2.
inline std::vector<Point> spline_polyline(const shellfill::VoidCurve& v, int per_segment) {
  const int n = v.control_count();
  std::vector<Point> out;
  for (int s = 0; s < n; ++s)
    for (int m = 0; m < per_segment; ++m) {
      const double t = static_cast<double>(m) / per_segment;
      const double w[3] = {0.5 * (1 - t) * (1 - t), 0.5 * (-2 * t * t + 2 * t + 1), 0.5 * t * t};
      Point q{0, 0};
      for (int k = 0; k < 3; ++k) {
        const int idx = (s + k) % n;
        const double psi = 2 * std::numbers::pi * idx / n;
        q.x += w[k] * v.radii[static_cast<std::size_t>(idx)] * std::cos(psi);
        q.y += w[k] * v.radii[static_cast<std::size_t>(idx)] * std::sin(psi);
      }
      out.push_back({v.center.x + q.x, v.center.y + q.y});
    }
  return out;
}

/// Polar radius of a closed polyline about c at angle psi (first crossing
/// of the ray), by segment intersection.
inline double polar_radius(const std::vector<Point>& poly, Point c, double psi) {
  const double ux = std::cos(psi), uy = std::sin(psi);
  double best = -1.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point a = poly[i], b = poly[(i + 1) % poly.size()];
    const double ax = a.x - c.x, ay = a.y - c.y, ex = b.x - a.x, ey = b.y - a.y;
    const double den = ux * ey - uy * ex;
    if (std::abs(den) < 1e-300) continue;
    const double s = (ax * ey - ay * ex) / den;      // along the ray
    const double t = (ax * uy - ay * ux) / den;      // along the segment
    if (s > 0 && t >= 0 && t <= 1 && (best < 0 || s < best)) best = s;
  }
  return best;
}

/// Plane-stress Q4 stiffness by Gauss quadrature of order `gauss` (2 or 3).
inline Eigen::Matrix<double, 8, 8> q4_stiffness(double E, double nu, double dx, double dy,
                                                int gauss) {
  Eigen::Matrix3d D;
  D << 1, nu, 0, nu, 1, 0, 0, 0, (1 - nu) / 2;
  D *= E / (1 - nu * nu);
  std::vector<double> gp, gw;
  if (gauss == 2) {
    gp = {-1 / std::sqrt(3.0), 1 / std::sqrt(3.0)};
    gw = {1, 1};
  } else {
    gp = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    gw = {5.0 / 9, 8.0 / 9, 5.0 / 9};
  }
  const double xi_n[4] = {-1, 1, 1, -1}, eta_n[4] = {-1, -1, 1, 1};
  Eigen::Matrix<double, 8, 8> k = Eigen::Matrix<double, 8, 8>::Zero();
  for (std::size_t a = 0; a < gp.size(); ++a)
    for (std::size_t b = 0; b < gp.size(); ++b) {
      const double xi = gp[a], eta = gp[b];
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int i = 0; i < 4; ++i) {
        const double dNx = 0.25 * xi_n[i] * (1 + eta * eta_n[i]) * 2 / dx;
        const double dNy = 0.25 * eta_n[i] * (1 + xi * xi_n[i]) * 2 / dy;
        B(0, 2 * i) = dNx;
        B(1, 2 * i + 1) = dNy;
        B(2, 2 * i) = dNy;
        B(2, 2 * i + 1) = dNx;
      }
      k += gw[a] * gw[b] * B.transpose() * D * B * (dx * dy / 4);
    }
  return k;
}

}  // namespace oracle
