#include "shellfill/geometry.hpp"

#include "shellfill/detail/kernels.hpp"
#include "shellfill/detail/spline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace shellfill {

namespace {

constexpr double kWeightFloor = 1e-300;

double ipow(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

}  // namespace

void ComponentParams::validate() const {
  if (!(half_length > 0.0)) throw GeometryError("component half_length must be positive");
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw GeometryError("component thicknesses must be positive");
  if (exponent < 2 || exponent % 2 != 0) throw GeometryError("component exponent must be even and >= 2");
}

CPFCoefficients CPFCoefficients::zeros(int n1, int n2, double length, double height) {
  CPFCoefficients c;
  c.alpha.assign(static_cast<std::size_t>(n1), {0.0, 0.0});
  c.beta.assign(static_cast<std::size_t>(n2), {0.0, 0.0});
  c.length = length;
  c.height = height;
  return c;
}

void CPFCoefficients::validate() const {
  if (alpha.empty() || beta.empty()) throw GeometryError("CPF needs at least one term per direction");
  if (!(length > 0.0) || !(height > 0.0)) throw GeometryError("CPF domain dimensions must be positive");
}

void LatticeSpec::validate() const {
  if (cells_x < 1 || cells_y < 1) throw GeometryError("lattice needs at least one cell per direction");
  if (prototype.empty()) throw GeometryError("lattice prototype has no components");
  if (!(length > 0.0) || !(height > 0.0)) throw GeometryError("lattice domain must be positive");
  for (const auto& pc : prototype) {
    pc.geom.validate();
    if (pc.cpf_index < 0 || pc.cpf_index >= static_cast<int>(cpfs.size()))
      throw GeometryError("prototype component refers to a missing CPF");
  }
  for (const auto& c : cpfs) c.validate();
}

Point VoidCurve::control_point(int k) const {
  const int n = control_count();
  const double psi = 2.0 * std::numbers::pi * k / n;
  const double d = radii[static_cast<std::size_t>(((k % n) + n) % n)];
  return {center.x + d * std::cos(psi), center.y + d * std::sin(psi)};
}

void VoidCurve::validate() const {
  if (radii.size() < 3) throw GeometryError("void curve needs at least 3 control points");
  if (spline_order < 1 || spline_order > detail::kMaxSplineOrder)
    throw GeometryError("void curve spline order must lie in [1, 7]");
  for (double d : radii)
    if (!(d > 0.0)) throw GeometryError("void control radii must be positive");
}

std::vector<VoidCurve> ShellSpec::expanded() const {
  std::vector<VoidCurve> out = voids;
  for (std::size_t j = 0; j < out.size(); ++j) {
    const double shift = out[j].inverted ? -delta_d : delta_d;
    for (double& d : out[j].radii) {
      d += shift;
      if (!(d > 0.0))
        throw GeometryError("shell thicker than outer boundary: expanded radius of void " +
                            std::to_string(j) + " is not positive");
    }
  }
  return out;
}

void ShellSpec::validate() const {
  if (voids.empty()) throw GeometryError("shell needs at least one void curve");
  if (!(delta_d > 0.0)) throw GeometryError("shell delta_d must be positive");
  int inverted = 0;
  for (const auto& v : voids) {
    v.validate();
    inverted += v.inverted ? 1 : 0;
  }
  if (inverted > 1) throw GeometryError("at most one void curve may be inverted");
  expanded();  // throws when the shell is thicker than the outer boundary
}

// ---------------------------------------------------------------------------

double ks_aggregate(std::span<const double> values, double l) {
  return detail::ks_aggregate<double>(values.data(), values.size(), l);
}

double ks_aggregate(std::initializer_list<double> values, double l) {
  return ks_aggregate(std::span<const double>(values.begin(), values.size()), l);
}

double ks_weight(double value, double aggregate, double l) {
  const double w = std::exp(l * (value - aggregate));
  return w < kWeightFloor ? 0.0 : w;
}

// ---------------------------------------------------------------------------

namespace {

struct LocalFrame {
  double xl, yl;   // rotated local coordinates
  double b;        // half-width at xl
  bool clamped;    // b hit the taper floor
};

LocalFrame local_frame(Point p, const ComponentParams& c) {
  const double cs = std::cos(c.angle), sn = std::sin(c.angle);
  const double dx = p.x - c.center.x, dy = p.y - c.center.y;
  LocalFrame f;
  f.xl = cs * dx + sn * dy;
  f.yl = -sn * dx + cs * dy;
  const double b = 0.5 * (c.t1 + c.t2) + (c.t2 - c.t1) / (2.0 * c.half_length) * f.xl;
  const double floor = detail::kTaperFloor * c.half_length;
  f.clamped = b < floor;
  f.b = f.clamped ? floor : b;
  return f;
}

}  // namespace

double component_tdf(Point p, const ComponentParams& comp) {
  return detail::component_tdf<double>(p.x, p.y, comp);
}

ComponentTdfGrad component_tdf_grad(Point p, const ComponentParams& comp) {
  const LocalFrame f = local_frame(p, comp);
  const int q = comp.exponent;
  const double a = comp.half_length;
  const double s = ipow(f.xl / a, q) + ipow(f.yl / f.b, q);

  ComponentTdfGrad g;
  const double root = std::pow(s, 1.0 / q);
  g.value = 1.0 - root;
  if (s == 0.0) return g;  // apex of the rooted norm; take a zero subgradient

  // common = s^(1/q - 1)
  const double common = root / s;
  const double dphi_dx = -common * ipow(f.xl, q - 1) / ipow(a, q);
  const double dphi_dy = -common * ipow(f.yl, q - 1) / ipow(f.b, q);
  const double dphi_da = common * ipow(f.xl, q) / ipow(a, q + 1);
  const double dphi_db = f.clamped ? 0.0 : common * ipow(f.yl, q) / ipow(f.b, q + 1);

  const double db_dx = (comp.t2 - comp.t1) / (2.0 * a);
  const double db_da = -(comp.t2 - comp.t1) * f.xl / (2.0 * a * a);
  const double db_dt1 = 0.5 - f.xl / (2.0 * a);
  const double db_dt2 = 0.5 + f.xl / (2.0 * a);

  const double cs = std::cos(comp.angle), sn = std::sin(comp.angle);
  const double chan_x = dphi_dx + dphi_db * db_dx;  // total x' channel

  g.d_px = chan_x * cs - dphi_dy * sn;
  g.d_py = chan_x * sn + dphi_dy * cs;
  // dx'/dtheta = y', dy'/dtheta = -x'
  g.d_angle = chan_x * f.yl - dphi_dy * f.xl;
  g.d_half_length = dphi_da + dphi_db * db_da;
  g.d_t1 = dphi_db * db_dt1;
  g.d_t2 = dphi_db * db_dt2;
  return g;
}

void cpf_basis(double s, double extent, int terms, std::span<double> out) {
  detail::cpf_basis<double>(s, extent, terms, out.data());
}

Point perturb_point(Point p, const CPFCoefficients& cpf) {
  Point out;
  detail::perturb<double>(p.x, p.y, cpf, out.x, out.y);
  return out;
}

Point cell_center(const LatticeSpec& lat, const ComponentParams& comp, int cell) {
  const int i = cell % lat.cells_x;
  const int j = cell / lat.cells_x;
  return {comp.center.x + i * lat.pitch_x(), comp.center.y + j * lat.pitch_y()};
}

double lattice_component_values(Point p, const LatticeSpec& lat, const AggregationParams& agg,
                                std::span<double> per_component) {
  std::vector<double> per_comp, vals;
  std::vector<detail::CellValue<double>> cells;
  const double v = detail::lattice_value<double>(p, lat, agg, per_comp, cells, vals);
  std::copy(per_comp.begin(), per_comp.end(), per_component.begin());
  return v;
}

double lattice_tdf(Point p, const LatticeSpec& lat, const AggregationParams& agg) {
  std::vector<double> per_comp(lat.prototype.size());
  return lattice_component_values(p, lat, agg, per_comp);
}

double structure_tdf(double phi0, double phi0_ext, double phi_gs, const AggregationParams& agg) {
  const double phi1 = ks_aggregate({-phi0_ext, phi_gs}, agg.l_plus);
  return ks_aggregate({phi0, phi1}, agg.l_minus);
}

}  // namespace shellfill
