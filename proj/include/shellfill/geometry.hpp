#pragma once

// Topology description functions (TDFs) for shell-graded-infill structures.
//
// Every function here is pure: a TDF value depends only on the query point and
// the geometric parameters passed in. Positive values mark solid material, zero
// marks the boundary and negative values mark void.

#include <array>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace shellfill {

struct Point {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point&) const = default;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One straight morphable component with linearly varying half-width.
struct ComponentParams {
  Point center;              // center of the instance in the prototype cell
  double half_length = 1.0;  // a > 0
  double angle = 0.0;        // radians, counter-clockwise from +x
  double t1 = 0.1;           // end thicknesses, both > 0
  double t2 = 0.1;
  int exponent = 6;          // even, >= 2

  void validate() const;
  bool operator==(const ComponentParams&) const = default;
};

/// Coefficients of the trigonometric coordinate perturbation functions.
/// alpha[r] = {cosine, sine} coefficient of harmonic r (r = 0 is the constant
/// cosine term and an identically zero sine term).
struct CPFCoefficients {
  std::vector<std::array<double, 2>> alpha;
  std::vector<std::array<double, 2>> beta;
  double length = 1.0;  // L
  double height = 1.0;  // H

  static CPFCoefficients zeros(int n1, int n2, double length, double height);
  void validate() const;
  bool operator==(const CPFCoefficients&) const = default;
};

struct PrototypeComponent {
  ComponentParams geom;
  int cpf_index = 0;  // which entry of LatticeSpec::cpfs perturbs this component
};

/// n_x by n_y tiling of a prototype cell over [0, L] x [0, H].
struct LatticeSpec {
  int cells_x = 1;
  int cells_y = 1;
  double length = 1.0;
  double height = 1.0;
  std::vector<PrototypeComponent> prototype;
  std::vector<CPFCoefficients> cpfs;

  double pitch_x() const { return length / cells_x; }
  double pitch_y() const { return height / cells_y; }
  int cell_count() const { return cells_x * cells_y; }
  void validate() const;
};

/// Closed star-shaped B-spline curve with control points at fixed angles
/// 2*pi*k/n about a movable center. Inverted curves bound solid on the inside.
struct VoidCurve {
  Point center;
  std::vector<double> radii;
  int spline_order = 2;
  bool inverted = false;

  int control_count() const { return static_cast<int>(radii.size()); }
  Point control_point(int k) const;
  void validate() const;
  bool operator==(const VoidCurve&) const = default;
};

struct ShellSpec {
  std::vector<VoidCurve> voids;
  double delta_d = 0.1;

  /// Curve family of the shell's inner boundary: radii grown by delta_d for
  /// ordinary voids, shrunk by delta_d for inverted outer boundaries.
  std::vector<VoidCurve> expanded() const;
  void validate() const;
};

struct AggregationParams {
  double l_plus = 50.0;
  double l_minus = -50.0;

  bool operator==(const AggregationParams&) const = default;
};

// ---------------------------------------------------------------------------
// Kreisselmeier-Steinhauser aggregation

/// ln(sum exp(l*v_i)) / l, evaluated with max-subtraction.
double ks_aggregate(std::span<const double> values, double l);
double ks_aggregate(std::initializer_list<double> values, double l);

/// Normalized K-S weight of one entry given the aggregate: exp(l*(v - agg)).
/// Weights below 1e-300 are flushed to zero.
double ks_weight(double value, double aggregate, double l);

// ---------------------------------------------------------------------------
// Components

double component_tdf(Point p, const ComponentParams& comp);

/// Value and first derivatives of component_tdf. d_point is the derivative
/// with respect to the query point; the center derivative is its negation.
struct ComponentTdfGrad {
  double value = 0.0;
  double d_px = 0.0;
  double d_py = 0.0;
  double d_half_length = 0.0;
  double d_angle = 0.0;
  double d_t1 = 0.0;
  double d_t2 = 0.0;
};
ComponentTdfGrad component_tdf_grad(Point p, const ComponentParams& comp);

/// Basis values of one perturbation series at coordinate s on [0, extent]:
/// out[2r] = cos(r*pi/extent*(s - extent/2)), out[2r+1] = sin(...).
void cpf_basis(double s, double extent, int terms, std::span<double> out);

Point perturb_point(Point p, const CPFCoefficients& cpf);

/// Center of instance `cell` (row-major, x fastest) of a prototype component.
Point cell_center(const LatticeSpec& lat, const ComponentParams& comp, int cell);

/// Smooth max over components of the smooth max over cells (graded lattice).
double lattice_tdf(Point p, const LatticeSpec& lat, const AggregationParams& agg);

/// lattice_tdf that also reports each prototype component's aggregate over
/// its cell instances.
double lattice_component_values(Point p, const LatticeSpec& lat, const AggregationParams& agg,
                                std::span<double> per_component);

// ---------------------------------------------------------------------------
// Shell-graded-infill composition

/// Smooth min(phi0, max(-phi0_ext, phi_gs)).
double structure_tdf(double phi0, double phi0_ext, double phi_gs,
                     const AggregationParams& agg);

}  // namespace shellfill
