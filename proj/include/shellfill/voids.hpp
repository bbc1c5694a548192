#pragma once

#include <span>
#include <vector>

#include "shellfill/geometry.hpp"

namespace shellfill {

/// Weights of the q+1 control points that influence a uniform periodic B-spline
/// of order q at local parameter t in [0, 1), via the Cox-de Boor recursion.
/// Entry m multiplies control point (segment + m) mod n.
std::vector<double> uniform_bspline_weights(double t, int order);

/// Polar description r(psi) of a closed B-spline curve about its center.
///
/// The curve is sampled at uniformly spaced spline parameters; each sample
/// stores its polar angle and radius together with their derivatives with
/// respect to the control radii at frozen spline parameter. Lookups are
/// periodic piecewise-linear in psi. The radius derivative returned by
/// lookup() is taken at fixed psi: it combines the frozen-parameter partial
/// with the drift of the sample angles.
class RadiusTable {
 public:
  RadiusTable() = default;

  /// Throws GeometryError (naming void_index) if the sampled curve is not
  /// star-shaped about its center.
  RadiusTable(const VoidCurve& curve, int n_samples, int void_index = 0);

  int sample_count() const { return static_cast<int>(psi_.size()); }
  int control_count() const { return n_; }

  double radius(double psi) const;
  /// Spline parameter (in [0, n)) interpolated at angle psi.
  double seed_parameter(double psi) const;

  struct Lookup {
    double r = 0.0;
    double dr_dpsi = 0.0;
  };
  /// Radius, slope in psi and (optionally) dr/dd_k at fixed psi.
  Lookup lookup(double psi, std::span<double> dr_dd = {}) const;

  double sample_psi(int s) const { return psi_[s]; }
  double sample_radius(int s) const { return r_[s]; }
  /// Frozen-parameter partial dr_s/dd_k of sample s.
  double sample_dr_dd(int s, int k) const { return dr_dd_[s * n_ + k]; }
  double sample_dpsi_dd(int s, int k) const { return dpsi_dd_[s * n_ + k]; }

 private:
  int locate(double psi, double& frac, double& span) const;

  int n_ = 0;
  std::vector<double> psi_;      // strictly increasing, spans exactly 2*pi
  std::vector<double> r_;
  std::vector<double> dr_dd_;    // sample-major, n_ per sample
  std::vector<double> dpsi_dd_;
};

RadiusTable build_radius_table(const VoidCurve& curve, int n_samples, int void_index = 0);

/// Polar radius of the spline curve itself at angle psi, by Newton iteration
/// on the spline parameter seeded from the table.
double spline_radius(const VoidCurve& curve, const RadiusTable& table, double psi);

/// Signed distance-like TDF of one void: |p - c| - r(psi), negated for
/// inverted curves. Negative inside an ordinary void. r is spline_radius,
/// so the TDF is C1 in the point and the curve parameters.
double void_tdf(Point p, const VoidCurve& curve, const RadiusTable& table);

/// void_tdf and its derivatives with respect to the curve center and radii.
struct VoidTdfGrad {
  double value = 0.0;
  double d_cx = 0.0;
  double d_cy = 0.0;
  std::vector<double> d_radii;
};
VoidTdfGrad void_tdf_grad(Point p, const VoidCurve& curve, const RadiusTable& table);

/// Radius tables for the original and expanded curve families of a shell.
struct ShellTables {
  std::vector<RadiusTable> original;
  std::vector<RadiusTable> expanded;
};

inline constexpr int kDefaultSamplesPerControl = 64;

ShellTables build_shell_tables(const ShellSpec& shell,
                               int samples_per_control = kDefaultSamplesPerControl);

struct ShellValues {
  double phi0 = 0.0;
  double phi0_ext = 0.0;
};
ShellValues shell_tdfs(Point p, const ShellSpec& shell, const ShellTables& tables,
                       const AggregationParams& agg);

}  // namespace shellfill
