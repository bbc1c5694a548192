#include "shellfill/voids.hpp"

#include "shellfill/detail/spline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace shellfill {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

std::vector<double> uniform_bspline_weights(double t, int order) {
  if (order < 0 || order > detail::kMaxSplineOrder)
    throw GeometryError("spline order outside the supported range");
  std::vector<double> w(static_cast<std::size_t>(order + 1));
  detail::bspline_weights<double>(t, order, w.data(), nullptr);
  return w;
}

RadiusTable::RadiusTable(const VoidCurve& curve, int n_samples, int void_index) {
  curve.validate();
  n_ = curve.control_count();
  const int q = curve.spline_order;
  if (n_samples < 8 * n_)
    throw GeometryError("radius table for void " + std::to_string(void_index) +
                        " needs at least 8 samples per control point");

  std::vector<double> ex(n_), ey(n_);
  for (int k = 0; k < n_; ++k) {
    const double psi = kTwoPi * k / n_;
    ex[k] = std::cos(psi);
    ey[k] = std::sin(psi);
  }

  psi_.resize(n_samples);
  r_.resize(n_samples);
  dr_dd_.assign(static_cast<std::size_t>(n_samples) * n_, 0.0);
  dpsi_dd_.assign(static_cast<std::size_t>(n_samples) * n_, 0.0);

  double prev = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const double u = static_cast<double>(s) * n_ / n_samples;
    const int seg = static_cast<int>(std::floor(u));
    const double t = u - seg;
    const auto w = uniform_bspline_weights(t, q);
    double cx = 0.0, cy = 0.0;
    for (int m = 0; m <= q; ++m) {
      const int k = (seg + m) % n_;
      cx += w[m] * curve.radii[k] * ex[k];
      cy += w[m] * curve.radii[k] * ey[k];
    }
    const double r2 = cx * cx + cy * cy;
    const double r = std::sqrt(r2);
    if (!(r > 0.0))
      throw GeometryError("void " + std::to_string(void_index) + " curve passes through its center");
    double psi = std::atan2(cy, cx);
    if (s > 0) {
      while (psi <= prev - std::numbers::pi) psi += kTwoPi;
      while (psi > prev + std::numbers::pi) psi -= kTwoPi;
      if (!(psi > prev))
        throw GeometryError("void " + std::to_string(void_index) +
                            " is not star-shaped about its center");
    }
    prev = psi;
    psi_[s] = psi;
    r_[s] = r;
    for (int m = 0; m <= q; ++m) {
      const int k = (seg + m) % n_;
      // d(c)/d(d_k) = w_m * e_k
      dr_dd_[s * n_ + k] += w[m] * (cx * ex[k] + cy * ey[k]) / r;
      dpsi_dd_[s * n_ + k] += w[m] * (cx * ey[k] - cy * ex[k]) / r2;
    }
  }
  const double closing = psi_[0] + kTwoPi - psi_.back();
  if (!(closing > 0.0) || closing > std::numbers::pi)
    throw GeometryError("void " + std::to_string(void_index) +
                        " is not star-shaped about its center");
}

int RadiusTable::locate(double psi, double& frac, double& span) const {
  const int ns = sample_count();
  const double base = psi_[0];
  double rel = std::fmod(psi - base, kTwoPi);
  if (rel < 0.0) rel += kTwoPi;
  const double target = base + rel;
  // last index with psi_[s] <= target
  auto it = std::upper_bound(psi_.begin(), psi_.end(), target);
  int s = static_cast<int>(it - psi_.begin()) - 1;
  s = std::clamp(s, 0, ns - 1);
  const double next = (s + 1 < ns) ? psi_[s + 1] : psi_[0] + kTwoPi;
  span = next - psi_[s];
  frac = (target - psi_[s]) / span;
  return s;
}

double RadiusTable::radius(double psi) const { return lookup(psi).r; }

double RadiusTable::seed_parameter(double psi) const {
  double frac = 0.0, span = 1.0;
  const int s = locate(psi, frac, span);
  return (s + frac) * n_ / sample_count();
}

double spline_radius(const VoidCurve& curve, const RadiusTable& table, double psi) {
  return detail::spline_at_angle<double>(curve, table, psi).r;
}

RadiusTable::Lookup RadiusTable::lookup(double psi, std::span<double> dr_dd) const {
  double frac = 0.0, span = 1.0;
  const int s = locate(psi, frac, span);
  const int s1 = (s + 1) % sample_count();
  Lookup out;
  out.r = (1.0 - frac) * r_[s] + frac * r_[s1];
  out.dr_dpsi = (r_[s1] - r_[s]) / span;
  if (!dr_dd.empty()) {
    for (int k = 0; k < n_; ++k) {
      const double frozen = (1.0 - frac) * dr_dd_[s * n_ + k] + frac * dr_dd_[s1 * n_ + k];
      const double drift = (1.0 - frac) * dpsi_dd_[s * n_ + k] + frac * dpsi_dd_[s1 * n_ + k];
      dr_dd[k] = frozen - out.dr_dpsi * drift;
    }
  }
  return out;
}

RadiusTable build_radius_table(const VoidCurve& curve, int n_samples, int void_index) {
  return RadiusTable(curve, n_samples, void_index);
}

double void_tdf(Point p, const VoidCurve& curve, const RadiusTable& table) {
  return detail::void_value<double>(p, curve, table);
}

VoidTdfGrad void_tdf_grad(Point p, const VoidCurve& curve, const RadiusTable& table) {
  const double dx = p.x - curve.center.x, dy = p.y - curve.center.y;
  const double rho2 = dx * dx + dy * dy;
  const double rho = std::sqrt(rho2);
  const int n = curve.control_count();
  VoidTdfGrad g;
  g.d_radii.assign(static_cast<std::size_t>(n), 0.0);
  const double psi = rho > 0.0 ? std::atan2(dy, dx) : 0.0;
  const auto sp = detail::spline_at_angle<double>(curve, table, psi);
  g.value = rho - sp.r;
  if (rho > 0.0) {
    g.d_cx = -dx / rho - sp.dr_dpsi * dy / rho2;
    g.d_cy = -dy / rho + sp.dr_dpsi * dx / rho2;
  }
  // dr/dd_k at fixed psi: partial at fixed spline parameter minus the
  // slope times the drift of the point's angle.
  const double r2 = sp.r * sp.r;
  const double* dir = detail::control_directions<double>(n);
  for (int m = 0; m <= curve.spline_order; ++m) {
    const int k = (sp.seg + m) % n;
    const double ex = dir[2 * k], ey = dir[2 * k + 1];
    const double dr = sp.w[m] * (sp.cx * ex + sp.cy * ey) / sp.r;
    const double dpsi = sp.w[m] * (sp.cx * ey - sp.cy * ex) / r2;
    g.d_radii[k] -= dr - sp.dr_dpsi * dpsi;
  }
  if (curve.inverted) {
    g.value = -g.value;
    g.d_cx = -g.d_cx;
    g.d_cy = -g.d_cy;
    for (double& v : g.d_radii) v = -v;
  }
  return g;
}

ShellTables build_shell_tables(const ShellSpec& shell, int samples_per_control) {
  ShellTables t;
  const auto ext = shell.expanded();
  t.original.reserve(shell.voids.size());
  t.expanded.reserve(shell.voids.size());
  for (std::size_t j = 0; j < shell.voids.size(); ++j) {
    const int ns = samples_per_control * shell.voids[j].control_count();
    t.original.emplace_back(shell.voids[j], ns, static_cast<int>(j));
    t.expanded.emplace_back(ext[j], ns, static_cast<int>(j));
  }
  return t;
}

ShellValues shell_tdfs(Point p, const ShellSpec& shell, const ShellTables& tables,
                       const AggregationParams& agg) {
  const auto ext = shell.expanded();
  std::vector<double> orig_vals(shell.voids.size()), ext_vals(shell.voids.size());
  for (std::size_t j = 0; j < shell.voids.size(); ++j) {
    orig_vals[j] = void_tdf(p, shell.voids[j], tables.original[j]);
    ext_vals[j] = void_tdf(p, ext[j], tables.expanded[j]);
  }
  return {ks_aggregate(orig_vals, agg.l_minus), ks_aggregate(ext_vals, agg.l_minus)};
}

}  // namespace shellfill
