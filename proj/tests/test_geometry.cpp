#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "properties.hpp"
#include "shellfill/geometry.hpp"
#include "shellfill/problems.hpp"
#include "shellfill/voids.hpp"

using namespace shellfill;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

ComponentParams bar(double tl = 0.2, double t2 = 0.2) {
  ComponentParams c;
  c.center = {1.0, 2.0};
  c.half_length = 0.8;
  c.angle = 0.0;
  c.t1 = tl;
  c.t2 = t2;
  return c;
}

VoidCurve circle(Point c, double r, int n = 12) {
  VoidCurve v;
  v.center = c;
  v.radii.assign(static_cast<std::size_t>(n), r);
  return v;
}

}  // namespace

TEST_CASE("ks_aggregate") {
  SUBCASE("equal inputs") {
    CHECK(ks_aggregate({0.7, 0.7}, 50.0) == Approx(0.7 + std::log(2.0) / 50.0).epsilon(1e-14));
  }
  SUBCASE("dominance limit") {
    CHECK(std::abs(ks_aggregate({0.0, 1.0}, 50.0) - (1.0 + std::log1p(std::exp(-50.0)) / 50.0)) < 1e-12);
    CHECK(std::abs(ks_aggregate({0.0, 1.0}, 50.0) - 1.0) < 1e-12);
  }
  SUBCASE("smooth min within ln(n)/|l| of the exact min") {
    const double v = ks_aggregate({0.3, -0.2, 0.7}, -50.0);
    CHECK(v <= -0.2);
    CHECK(v >= -0.2 - std::log(3.0) / 50.0);
  }
  SUBCASE("no overflow for |l v| up to 1e4") {
    CHECK(std::isfinite(ks_aggregate({200.0, 199.0}, 50.0)));
    CHECK(std::isfinite(ks_aggregate({-200.0, 200.0}, -50.0)));
  }
  SUBCASE("empty input is a contract violation") {
    CHECK_THROWS(ks_aggregate(std::span<const double>{}, 50.0));
  }
}

TEST_CASE("component_tdf") {
  const ComponentParams c = bar(0.2, 0.3);
  CHECK(component_tdf(c.center, c) == Approx(1.0));
  CHECK(std::abs(component_tdf({c.center.x + c.half_length, c.center.y}, c)) < 1e-14);
  CHECK(std::abs(component_tdf({c.center.x, c.center.y + 0.25}, c)) < 1e-14);

  SUBCASE("matches the independent formula and the sign of the unrooted form") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    ComponentParams r = c;
    r.angle = 0.6;
    for (int i = 0; i < 500; ++i) {
      const Point p{r.center.x + u(gen), r.center.y + u(gen)};
      const double v = component_tdf(p, r);
      CHECK(v == Approx(oracle::component(p, r)).epsilon(1e-12));
      const double w = oracle::component_unrooted(p, r);
      if (std::abs(w) > 1e-12) CHECK((v > 0) == (w > 0));
    }
  }

  SUBCASE("gradient against central differences") {
    ComponentParams r = c;
    r.angle = 0.4;
    const Point p{1.3, 2.1};
    const ComponentTdfGrad g = component_tdf_grad(p, r);
    const double h = 1e-6;
    auto fd = [&](auto mutate) {
      ComponentParams a = r, b = r;
      mutate(a, h);
      mutate(b, -h);
      return (component_tdf(p, a) - component_tdf(p, b)) / (2 * h);
    };
    CHECK(g.d_half_length == Approx(fd([](ComponentParams& q, double s) { q.half_length += s; })).epsilon(1e-6));
    CHECK(g.d_angle == Approx(fd([](ComponentParams& q, double s) { q.angle += s; })).epsilon(1e-6));
    CHECK(g.d_t1 == Approx(fd([](ComponentParams& q, double s) { q.t1 += s; })).epsilon(1e-6));
    CHECK(g.d_t2 == Approx(fd([](ComponentParams& q, double s) { q.t2 += s; })).epsilon(1e-6));
    CHECK(-g.d_px == Approx(fd([](ComponentParams& q, double s) { q.center.x += s; })).epsilon(1e-6));
    CHECK(-g.d_py == Approx(fd([](ComponentParams& q, double s) { q.center.y += s; })).epsilon(1e-6));
  }

  SUBCASE("t1 channel vanishes at the far tip") {
    ComponentParams r = bar(0.2, 0.3);
    const ComponentTdfGrad g = component_tdf_grad({r.center.x + r.half_length, r.center.y + 0.1}, r);
    CHECK(g.d_t1 == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("extreme taper is clamped, not an error") {
    ComponentParams r = bar(0.01, 0.4);
    const double v = component_tdf({r.center.x - 3.0 * r.half_length, r.center.y}, r);
    CHECK(std::isfinite(v));
    CHECK(v < 0.0);
  }
}

TEST_CASE("perturb_point") {
  CPFCoefficients z = CPFCoefficients::zeros(4, 4, 4.0, 2.0);
  const Point p{1.1, 0.7};
  CHECK(perturb_point(p, z) == p);

  CPFCoefficients c = z;
  c.alpha[0][0] = 0.25;  // constant cosine term
  CHECK(perturb_point(p, c).x == Approx(p.x + 0.25));
  CHECK(perturb_point(p, c).y == p.y);

  CPFCoefficients s = z;
  s.alpha[1][1] = 0.1;  // sine basis vanishes at L/2
  CHECK(perturb_point({2.0, 0.3}, s).x == Approx(2.0).epsilon(1e-15));

  CPFCoefficients g = z;
  g.alpha[2] = {0.03, -0.02};
  g.beta[3] = {0.01, 0.04};
  const Point q = perturb_point(p, g), o = oracle::perturb(p, g);
  CHECK(q.x == Approx(o.x).epsilon(1e-14));
  CHECK(q.y == Approx(o.y).epsilon(1e-14));
}

TEST_CASE("lattice_tdf") {
  const ProblemConfig cfg = short_beam(Scale::Desk);
  LatticeSpec lat = cfg.lattice_spec();
  const double nterms = static_cast<double>(lat.prototype.size() * lat.cell_count());

  SUBCASE("component center sits within the K-S bias of 1") {
    const Point c = cell_center(lat, lat.prototype[0].geom, 14);
    const double v = lattice_tdf(c, lat, cfg.ks);
    CHECK(v >= 1.0);
    CHECK(v <= 1.0 + std::log(nterms) / cfg.ks.l_plus);
  }

  SUBCASE("graded lattice equals the exact max within the K-S bias") {
    lat.cpfs[0].alpha[1][1] = 0.08;
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> ux(0, cfg.length), uy(0, cfg.height);
    for (int i = 0; i < 300; ++i) {
      const Point p{ux(gen), uy(gen)};
      const double v = lattice_tdf(p, lat, cfg.ks), e = oracle::lattice_exact(p, lat);
      CHECK(v >= e - 1e-12);
      CHECK(v <= e + std::log(nterms) / cfg.ks.l_plus + 1e-12);
    }
  }
}

TEST_CASE("radius table") {
  SUBCASE("regular control polygon gives a near-constant radius below R") {
    const VoidCurve v = circle({0, 0}, 1.0);
    const RadiusTable t = build_radius_table(v, 64 * 12);
    double lo = 1e9, hi = -1e9, sum = 0;
    const int m = 720;
    for (int i = 0; i < m; ++i) {
      const double r = t.radius(2 * kPi * i / m);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
      sum += r;
    }
    const double mean = sum / m;
    CHECK(hi < 1.0);
    CHECK((hi - lo) / mean < 0.005);
  }

  SUBCASE("matches a dense independent spline sampling") {
    VoidCurve v = circle({0.3, -0.2}, 1.0);
    for (int k = 0; k < 12; ++k) v.radii[k] = 1.0 + 0.3 * std::sin(1.7 * k);
    const RadiusTable t = build_radius_table(v, 64 * 12);
    const auto poly = oracle::spline_polyline(v, 2000);
    for (int i = 0; i < 97; ++i) {
      const double psi = -kPi + 2 * kPi * (i + 0.37) / 97;
      const double ref = oracle::polar_radius(poly, v.center, psi);
      CHECK(spline_radius(v, t, psi) == Approx(ref).epsilon(1e-6));
      CHECK(t.radius(psi) == Approx(ref).epsilon(2e-4));
    }
  }

  SUBCASE("alternating radii: 2 pi periodicity to rounding") {
    VoidCurve v = circle({0, 0}, 1.0);
    for (int k = 1; k < 12; k += 2) v.radii[k] = 2.0;
    const RadiusTable t = build_radius_table(v, 64 * 12);
    for (double psi : {0.1, 1.3, 2.9, -2.2})
      CHECK(t.radius(psi) == Approx(t.radius(psi + 2 * kPi)).epsilon(1e-14));
  }

  SUBCASE("uniform increment of all radii against finite differences") {
    VoidCurve v = circle({0, 0}, 1.0);
    for (int k = 0; k < 12; ++k) v.radii[k] = 1.0 + 0.2 * std::cos(2.3 * k);
    const RadiusTable t = build_radius_table(v, 64 * 12);
    const double h = 1e-6;
    VoidCurve vp = v, vm = v;
    for (auto& d : vp.radii) d += h;
    for (auto& d : vm.radii) d -= h;
    const RadiusTable tp = build_radius_table(vp, 64 * 12), tm = build_radius_table(vm, 64 * 12);
    for (int i = 0; i < 20; ++i) {
      const int s = 37 * i;
      const double psi = 0.5 * (t.sample_psi(s) + t.sample_psi(s + 1));
      std::vector<double> dr(12);
      t.lookup(psi, dr);
      double sum = 0;
      for (double x : dr) sum += x;
      CHECK(sum == Approx((tp.radius(psi) - tm.radius(psi)) / (2 * h)).epsilon(1e-6));
    }
  }

  SUBCASE("non-star-shaped curve is rejected naming the void") {
    VoidCurve v = circle({0, 0}, 1.0);
    for (int k = 0; k < 12; k += 2) v.radii[k] = 0.02;
    for (int k = 1; k < 12; k += 2) v.radii[k] = 5.0;
    try {
      build_radius_table(v, 64 * 12, 3);
    } catch (const GeometryError& e) {
      CHECK(std::string(e.what()).find("void 3") != std::string::npos);
    }
  }
}

TEST_CASE("void_tdf") {
  const VoidCurve v = circle({1.0, 1.0}, 0.5);
  const RadiusTable t = build_radius_table(v, 64 * 12);
  CHECK(void_tdf(v.center, v, t) == Approx(-spline_radius(v, t, 0.0)));
  CHECK(void_tdf(v.center, v, t) < 0.0);
  CHECK(void_tdf({v.center.x + 1.0, v.center.y}, v, t) > 0.0);

  VoidCurve inv = v;
  inv.inverted = true;
  const RadiusTable ti = build_radius_table(inv, 64 * 12);
  CHECK(void_tdf(inv.center, inv, ti) == Approx(spline_radius(inv, ti, 0.0)));

  SUBCASE("gradient against central differences") {
    VoidCurve g = v;
    for (int k = 0; k < 12; ++k) g.radii[k] = 0.5 + 0.1 * std::sin(k);
    const RadiusTable tg = build_radius_table(g, 64 * 12);
    const Point p{1.2, 1.45};
    const VoidTdfGrad d = void_tdf_grad(p, g, tg);
    const double h = 1e-6;
    for (int k : {0, 2, 3, 7}) {
      VoidCurve a = g, b = g;
      a.radii[k] += h;
      b.radii[k] -= h;
      const double fd = (void_tdf(p, a, build_radius_table(a, 768)) - void_tdf(p, b, build_radius_table(b, 768))) / (2 * h);
      CHECK(d.d_radii[k] == Approx(fd).epsilon(1e-5));
    }
    VoidCurve a = g, b = g;
    a.center.x += h;
    b.center.x -= h;
    CHECK(d.d_cx == Approx((void_tdf(p, a, tg) - void_tdf(p, b, tg)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("shell_tdfs") {
  ShellSpec shell;
  shell.voids = {circle({1.0, 1.0}, 0.4), circle({2.2, 1.1}, 0.5)};
  shell.delta_d = 0.1;
  const ShellTables tables = build_shell_tables(shell, 64);
  const AggregationParams agg;

  const ShellValues deep = shell_tdfs({1.0, 1.0}, shell, tables, agg);
  CHECK(deep.phi0 < 0.0);
  CHECK(deep.phi0_ext < deep.phi0);

  const ShellValues far = shell_tdfs({5.0, 5.0}, shell, tables, agg);
  CHECK(far.phi0 > 0.0);
  CHECK(far.phi0_ext > 0.0);

  const auto ext = shell.expanded();
  for (double x = 0.2; x < 3.0; x += 0.27) {
    const Point p{x, 1.05};
    double m0 = 1e9, m1 = 1e9;
    for (std::size_t j = 0; j < 2; ++j) {
      m0 = std::min(m0, void_tdf(p, shell.voids[j], tables.original[j]));
      m1 = std::min(m1, void_tdf(p, ext[j], tables.expanded[j]));
    }
    const ShellValues sv = shell_tdfs(p, shell, tables, agg);
    CHECK(sv.phi0 <= m0 + 1e-12);
    CHECK(sv.phi0 >= m0 - std::log(2.0) / 50.0 - 1e-12);
    CHECK(sv.phi0_ext <= m1 + 1e-12);
    CHECK(sv.phi0_ext >= m1 - std::log(2.0) / 50.0 - 1e-12);
  }

  SUBCASE("shell thicker than the outer boundary is an error") {
    ShellSpec bad;
    VoidCurve outer = circle({0, 0}, 0.3);
    outer.inverted = true;
    bad.voids = {outer};
    bad.delta_d = 0.5;
    CHECK_THROWS_AS(bad.validate(), GeometryError);
  }
}

TEST_CASE("structure_tdf") {
  const AggregationParams agg;
  CHECK(structure_tdf(-0.5, -0.6, 0.9, agg) == Approx(-0.5).epsilon(1e-9));
  CHECK(structure_tdf(0.05, -0.05, -3.0, agg) > 0.0);
  CHECK(structure_tdf(0.05, -0.05, 3.0, agg) > 0.0);
  // deep inside the infill region the lattice decides
  for (double g : {-0.4, -0.1, 0.2, 0.6}) {
    const double v = structure_tdf(2.0, 1.9, g, agg);
    CHECK(std::abs(v - std::min(2.0, std::max(-1.9, g))) <= 2 * std::log(2.0) / 50.0);
  }
}

TEST_CASE("geometry property suites (1000 seeded points each)") {
  for (const auto& r : props::geometry_suite(20240601, 1000)) {
    INFO(r.name << ": " << r.failures << " of " << r.samples << " failed, worst " << r.worst);
    CHECK(r.samples == 1000);
    CHECK(r.ok());
  }
}
