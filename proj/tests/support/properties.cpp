#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "shellfill/geometry.hpp"
#include "shellfill/problems.hpp"
#include "shellfill/voids.hpp"

namespace props {

namespace {

using namespace shellfill;

struct Rng {
  explicit Rng(std::uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen); }
  std::mt19937_64 gen;
};

void record(Result& r, double violation) {
  ++r.samples;
  r.worst = std::max(r.worst, violation);
  if (violation > 0.0) ++r.failures;
}

constexpr double kPi = std::numbers::pi;

}  // namespace

Result ks_bounds(std::uint64_t seed, int n) {
  Result r{"ks bounds"};
  Rng rng(seed);
  for (int s = 0; s < n; ++s) {
    const int m = rng.integer(1, 50);
    const double scale = std::pow(10.0, rng.uniform(-2.0, 2.3));  // |l v| up to 1e4
    std::vector<double> v(static_cast<std::size_t>(m));
    for (double& x : v) x = rng.uniform(-scale, scale);
    const double mx = *std::max_element(v.begin(), v.end());
    const double mn = *std::min_element(v.begin(), v.end());
    const double hi = ks_aggregate(v, 50.0), lo = ks_aggregate(v, -50.0);
    const double band = std::log(static_cast<double>(m)) / 50.0;
    const double slack = 1e-12 * (1.0 + scale);
    double viol = 0.0;
    if (!std::isfinite(hi) || !std::isfinite(lo)) viol = 1.0;
    viol = std::max(viol, mx - hi - slack);
    viol = std::max(viol, hi - (mx + band) - slack);
    viol = std::max(viol, lo - mn - slack);
    viol = std::max(viol, (mn - band) - lo - slack);
    if (scale < 10.0) {  // naive sum stays in range
      viol = std::max(viol, std::abs(hi - oracle::ks_naive(v, 50.0)) - 1e-12);
      viol = std::max(viol, std::abs(lo - oracle::ks_naive(v, -50.0)) - 1e-12);
    }
    record(r, viol);
  }
  return r;
}

Result rotation_equivariance(std::uint64_t seed, int n) {
  Result r{"rotation equivariance"};
  Rng rng(seed);
  for (int s = 0; s < n; ++s) {
    ComponentParams c;
    c.center = {rng.uniform(-2, 2), rng.uniform(-2, 2)};
    c.half_length = rng.uniform(0.3, 2.0);
    c.t1 = rng.uniform(0.05, 0.5);
    c.t2 = rng.uniform(0.05, 0.5);
    c.exponent = 2 * rng.integer(1, 4);
    c.angle = 0.0;
    const double th = rng.uniform(-kPi, kPi);
    ComponentParams cr = c;
    cr.angle = th;
    const Point x{c.center.x + rng.uniform(-2.5, 2.5), c.center.y + rng.uniform(-2.5, 2.5)};
    const double dx = x.x - c.center.x, dy = x.y - c.center.y;
    const Point xr{c.center.x + std::cos(th) * dx - std::sin(th) * dy,
                   c.center.y + std::sin(th) * dx + std::cos(th) * dy};
    const double a = component_tdf(xr, cr), b = component_tdf(x, c);
    record(r, std::abs(a - b) - 1e-10 * (1.0 + std::abs(b)));
  }
  return r;
}

Result lattice_periodicity(std::uint64_t seed, int n) {
  Result r{"lattice periodicity"};
  Rng rng(seed);
  const ProblemConfig cfg = short_beam(Scale::Desk);
  LatticeSpec lat = cfg.lattice_spec();
  for (auto& c : lat.cpfs) c = CPFCoefficients::zeros(cfg.lattice.n1, cfg.lattice.n2, lat.length, lat.height);
  const double px = lat.pitch_x(), py = lat.pitch_y();
  for (int s = 0; s < n; ++s) {
    const bool along_x = s % 2 == 0;
    // two cells clear of the lattice edge on both sides
    const int ix = rng.integer(2, lat.cells_x - (along_x ? 4 : 3));
    const int iy = rng.integer(2, lat.cells_y - (along_x ? 3 : 4));
    const Point p{(ix + rng.uniform(0, 1)) * px, (iy + rng.uniform(0, 1)) * py};
    const Point q{p.x + (along_x ? px : 0.0), p.y + (along_x ? 0.0 : py)};
    const double a = lattice_tdf(p, lat, cfg.ks), b = lattice_tdf(q, lat, cfg.ks);
    record(r, std::abs(a - b) - 1e-9);
  }
  return r;
}

Result shell_nesting(std::uint64_t seed, int n) {
  Result r{"shell nesting"};
  Rng rng(seed);
  const AggregationParams agg;
  ShellSpec shell;
  ShellTables tables;
  for (int s = 0; s < n; ++s) {
    if (s % 50 == 0) {  // fresh random shell every 50 points
      shell.voids.clear();
      const int nv = rng.integer(1, 4);
      for (int j = 0; j < nv; ++j) {
        VoidCurve v;
        v.center = {rng.uniform(0.5, 3.5), rng.uniform(0.5, 3.5)};
        const double R = rng.uniform(0.2, 0.6);
        for (int k = 0; k < 12; ++k) v.radii.push_back(R * rng.uniform(0.75, 1.25));
        shell.voids.push_back(v);
      }
      shell.delta_d = rng.uniform(0.02, 0.2);
      tables = build_shell_tables(shell, 64);
    }
    const Point p{rng.uniform(-0.5, 4.5), rng.uniform(-0.5, 4.5)};
    const ShellValues sv = shell_tdfs(p, shell, tables, agg);
    const double tol = std::log(static_cast<double>(shell.voids.size())) / std::abs(agg.l_minus);
    record(r, sv.phi0_ext - (sv.phi0 + tol + 1e-12));
  }
  return r;
}

Result sign_convention(std::uint64_t seed, int n) {
  Result r{"sign convention"};
  Rng rng(seed);
  const ProblemConfig cfg = short_beam(Scale::Desk);
  LatticeSpec lat = cfg.lattice_spec();
  for (auto& c : lat.cpfs) {  // graded lattice
    for (auto& a : c.alpha) a = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
    for (auto& b : c.beta) b = {rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05)};
  }
  const ShellSpec shell = cfg.shell_spec();
  const ShellTables tables = build_shell_tables(shell, cfg.shell.samples_per_control);
  const auto expanded = shell.expanded();
  std::vector<std::vector<Point>> orig_poly, ext_poly;
  for (std::size_t j = 0; j < shell.voids.size(); ++j) {
    orig_poly.push_back(oracle::spline_polyline(shell.voids[j], 400));
    ext_poly.push_back(oracle::spline_polyline(expanded[j], 400));
  }
  auto exact_void = [](Point p, const VoidCurve& v, const std::vector<Point>& poly) {
    const double dx = p.x - v.center.x, dy = p.y - v.center.y;
    const double d = std::hypot(dx, dy) - oracle::polar_radius(poly, v.center, std::atan2(dy, dx));
    return v.inverted ? -d : d;
  };
  const int count = static_cast<int>(lat.prototype.size()) * lat.cell_count();
  const double band =
      2.0 * std::log(static_cast<double>(std::max<std::size_t>(count, shell.voids.size()))) /
      std::abs(cfg.ks.l_minus);
  for (int s = 0; s < n; ++s) {
    const Point p{rng.uniform(0, cfg.length), rng.uniform(0, cfg.height)};
    double phi0 = 1e300, phi0e = 1e300;
    for (std::size_t j = 0; j < shell.voids.size(); ++j) {
      phi0 = std::min(phi0, exact_void(p, shell.voids[j], orig_poly[j]));
      phi0e = std::min(phi0e, exact_void(p, expanded[j], ext_poly[j]));
    }
    const double exact = std::min(phi0, std::max(-phi0e, oracle::lattice_exact(p, lat)));
    const ShellValues sv = shell_tdfs(p, shell, tables, cfg.ks);
    const double smooth = structure_tdf(sv.phi0, sv.phi0_ext, lattice_tdf(p, lat, cfg.ks), cfg.ks);
    // Only points outside the band are judged.
    const bool disagree = std::abs(exact) > band && ((exact > 0) != (smooth > 0));
    record(r, disagree ? std::abs(exact) : 0.0);
  }
  return r;
}

Result radius_table_partials(std::uint64_t seed, int n) {
  Result r{"radius table partials"};
  Rng rng(seed);
  VoidCurve v;
  RadiusTable table;
  const int per_control = 64;
  for (int s = 0; s < n; ++s) {
    if (s % 20 == 0) {
      v = VoidCurve{};
      v.center = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const double R = rng.uniform(0.3, 1.5);
      for (int k = 0; k < 12; ++k) v.radii.push_back(R * rng.uniform(0.7, 1.3));
      v.inverted = rng.integer(0, 1) == 1;
      table = build_radius_table(v, per_control * 12);
    }
    // Midway between samples, away from interpolation breakpoints.
    const int i = rng.integer(0, table.sample_count() - 2);
    const double psi = 0.5 * (table.sample_psi(i) + table.sample_psi(i + 1));
    const int k = rng.integer(0, 11);
    std::vector<double> dr(12);
    table.lookup(psi, dr);
    const double h = 1e-6 * v.radii[static_cast<std::size_t>(k)];
    VoidCurve vp = v, vm = v;
    vp.radii[static_cast<std::size_t>(k)] += h;
    vm.radii[static_cast<std::size_t>(k)] -= h;
    const double fd = (build_radius_table(vp, per_control * 12).radius(psi) -
                       build_radius_table(vm, per_control * 12).radius(psi)) / (2 * h);
    const double err = std::abs(dr[static_cast<std::size_t>(k)] - fd) / std::max(std::abs(fd), 1e-3);
    record(r, err - 1e-5);
  }
  return r;
}

std::vector<Result> geometry_suite(std::uint64_t seed, int n) {
  return {ks_bounds(seed, n),          rotation_equivariance(seed + 1, n),
          lattice_periodicity(seed + 2, n), shell_nesting(seed + 3, n),
          sign_convention(seed + 4, n), radius_table_partials(seed + 5, n)};
}

}  // namespace props
