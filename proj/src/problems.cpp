#include "shellfill/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shellfill/detail/spline.hpp"
#include "shellfill/voids.hpp"

namespace shellfill {

namespace {

constexpr int kControlCount = 12;

/// Grid factorization cols x rows of count whose cell aspect is closest to
/// the domain aspect.
std::pair<int, int> void_layout(int count, double length, double height) {
  int best_rows = 1;
  double best = 1e300;
  for (int rows = 1; rows <= count; ++rows) {
    if (count % rows) continue;
    const int cols = count / rows;
    const double mismatch = std::abs(static_cast<double>(cols) / rows - length / height);
    if (mismatch < best - 1e-12) {
      best = mismatch;
      best_rows = rows;
    }
  }
  return {count / best_rows, best_rows};
}

ComponentParams bar(Point c, double half_length, double angle, double t) {
  ComponentParams p;
  p.center = c;
  p.half_length = half_length;
  p.angle = angle;
  p.t1 = t;
  p.t2 = t;
  return p;
}

/// X of two bars through the cell center; the four-component cell adds a
/// horizontal and a vertical bar.
void set_prototype(LatticeConfig& lat, double length, double height, CellLayout cells) {
  const double px = length / lat.cells_x, py = height / lat.cells_y;
  const Point c{0.5 * px, 0.5 * py};
  const double diag = std::hypot(px, py);
  const double t = 0.08 * std::min(px, py);
  const double ang = std::atan2(py, px);
  lat.prototype = {bar(c, 0.6 * diag, ang, t), bar(c, 0.6 * diag, -ang, t)};
  if (cells == CellLayout::FourComp) {
    lat.prototype.push_back(bar(c, 0.6 * px, 0.0, t));
    lat.prototype.push_back(bar(c, 0.6 * py, 0.5 * std::numbers::pi, t));
  }
  lat.cpfs.assign(lat.shared_cpf ? 1 : lat.prototype.size(),
                  CPFCoefficients::zeros(lat.n1, lat.n2, length, height));
}

SupportSpec point_support(Point p, bool fix_x, bool fix_y) {
  SupportSpec s;
  s.kind = SupportSpec::Kind::Point;
  s.location = p;
  s.fix_x = fix_x;
  s.fix_y = fix_y;
  return s;
}

ProblemConfig base_config(std::string name, double length, double height, int nx, int ny,
                          int cells_x, int cells_y, double delta_d, CellLayout cells) {
  ProblemConfig cfg;
  cfg.name = std::move(name);
  cfg.length = length;
  cfg.height = height;
  cfg.nx = nx;
  cfg.ny = ny;
  cfg.lattice.cells_x = cells_x;
  cfg.lattice.cells_y = cells_y;
  set_prototype(cfg.lattice, length, height, cells);
  cfg.shell.delta_d = delta_d;
  cfg.shell.control_count = kControlCount;
  cfg.constraints.v_bar = 0.3;
  cfg.constraints.v_lower = 0.5;
  // larger steps collapse the start design before the shell forms
  cfg.mma.move_limit = 0.02;
  cfg.mma.bound_ramp = 30;
  cfg.mma.min_iters = 200;
  cfg.mma.max_iters = 300;
  return cfg;
}

/// Cover margin: half the shell thickness inside the boundary curve.
void add_shell(ProblemConfig& cfg, int interior_voids, std::span<const Point> cover,
               double left_gap = 0.0) {
  cfg.shell.voids = void_grid(cfg.length, cfg.height, interior_voids, kControlCount);
  cfg.shell.voids.push_back(outer_boundary(cfg.length, cfg.height, kControlCount, cover,
                                           0.5 * cfg.shell.delta_d, left_gap));
}

}  // namespace

VoidCurve circular_void(Point center, double radius, int control_count) {
  VoidCurve v;
  v.center = center;
  v.radii.assign(static_cast<std::size_t>(control_count), radius);
  return v;
}

std::vector<VoidCurve> void_grid(double length, double height, int count, int control_count) {
  const auto [cols, rows] = void_layout(count, length, height);
  const double px = length / cols, py = height / rows;
  const double r = 0.6 * 0.5 * std::min(px, py);
  std::vector<VoidCurve> out;
  for (int j = 0; j < rows; ++j)
    for (int i = 0; i < cols; ++i)
      out.push_back(circular_void({(i + 0.5) * px, (j + 0.5) * py}, r, control_count));
  return out;
}

VoidCurve outer_boundary(double length, double height, int control_count,
                         std::span<const Point> cover, double margin, double left_gap) {
  const double x0 = left_gap;
  const Point c{0.5 * (x0 + length), 0.5 * height};
  const double hw = 0.5 * (length - x0), hh = 0.5 * height;
  VoidCurve v;
  v.center = c;
  v.inverted = true;
  std::vector<double> target;
  for (int k = 0; k < control_count; ++k) {
    const double psi = 2.0 * std::numbers::pi * k / control_count;
    const double cs = std::abs(std::cos(psi)), sn = std::abs(std::sin(psi));
    const double tx = cs > 1e-12 ? hw / cs : 1e300;
    const double ty = sn > 1e-12 ? hh / sn : 1e300;
    target.push_back(std::min(tx, ty));
  }
  v.radii = target;
  const int ns = kDefaultSamplesPerControl * control_count;
  // The curve passes through the rectangle edge at every control angle.
  for (int it = 0; it < 50; ++it) {
    const RadiusTable table(v, ns);
    double worst = 0.0;
    for (int k = 0; k < control_count; ++k) {
      const double psi = 2.0 * std::numbers::pi * k / control_count;
      const double miss = target[k] - spline_radius(v, table, psi);
      v.radii[k] += miss;
      worst = std::max(worst, std::abs(miss));
    }
    if (worst < 1e-12 * (hw + hh)) break;
  }
  // The fit is only converged to rounding; make the mirror symmetry exact.
  for (int k = 1; 2 * k < control_count; ++k) {
    const int m = control_count - k;
    v.radii[k] = v.radii[m] = 0.5 * (v.radii[k] + v.radii[m]);
  }
  if (left_gap == 0.0 && control_count % 2 == 0) {
    const int h = control_count / 2;
    for (int k = 0; k <= h; ++k) {
      const int m = (h - k + control_count) % control_count;
      if (m <= k) continue;
      v.radii[k] = v.radii[m] = 0.5 * (v.radii[k] + v.radii[m]);
      v.radii[(control_count - k) % control_count] = v.radii[k];
      v.radii[(control_count - m) % control_count] = v.radii[m];
    }
  }
  // Local bulges bring every cover point `margin` inside.
  for (int it = 0; it < 200; ++it) {
    const RadiusTable table(v, ns);
    bool ok = true;
    for (const Point& p : cover) {
      const double dx = p.x - c.x, dy = p.y - c.y;
      const double psi = std::atan2(dy, dx);
      const auto sp = detail::spline_at_angle<double>(v, table, psi);
      const double need = std::hypot(dx, dy) + margin - sp.r;
      if (need <= 1e-9 * (hw + hh)) continue;
      ok = false;
      double w2 = 0.0;
      for (int m = 0; m <= v.spline_order; ++m) w2 += sp.w[m] * sp.w[m];
      for (int m = 0; m <= v.spline_order; ++m)
        v.radii[(sp.seg + m) % control_count] += 1.05 * need * sp.w[m] / w2;
    }
    if (ok) break;
  }
  if (left_gap > 0.0) {
    // The curve stays inside the control polygon's hull.
    for (int k = 0; k < control_count; ++k) {
      const double cs = std::cos(2.0 * std::numbers::pi * k / control_count);
      if (cs < -1e-12) v.radii[k] = std::min(v.radii[k], (c.x - 0.5 * left_gap) / -cs);
    }
  }
  return v;
}

ProblemConfig short_beam(Scale scale) {
  const bool paper = scale == Scale::Paper;
  ProblemConfig cfg = paper
      ? base_config("short_beam_paper", 20.0, 12.0, 500, 300, 40, 24, 0.08, CellLayout::TwoComp)
      : base_config("short_beam_desk", 4.8, 2.88, 120, 72, 10, 6, 0.08, CellLayout::TwoComp);
  const double L = cfg.length, H = cfg.height;
  cfg.loads = {LoadCaseSpec{{LoadSpec{{L, 0.5 * H}, 1, -1.0}}, 1.0}};
  SupportSpec clamp;
  clamp.edge = SupportSpec::Edge::Left;
  cfg.supports = {clamp};
  std::vector<Point> cover{{L, 0.5 * H}};
  if (!paper) cover.push_back({0.0, 0.5 * H});
  add_shell(cfg, 8, cover, paper ? 0.5 : 0.0);
  return cfg;
}

ProblemConfig mbb_beam(Scale scale) {
  ProblemConfig cfg = scale == Scale::Paper
      ? base_config("mbb_beam_paper", 16.0, 4.0, 960, 240, 64, 16, 0.06, CellLayout::TwoComp)
      : base_config("mbb_beam_desk", 4.0, 1.0, 240, 60, 16, 4, 0.06, CellLayout::TwoComp);
  const double L = cfg.length, H = cfg.height;
  cfg.loads = {LoadCaseSpec{{LoadSpec{{0.5 * L, H}, 1, -1.0}}, 1.0}};
  cfg.supports = {point_support({0.0, 0.0}, true, true), point_support({L, 0.0}, false, true)};
  const std::vector<Point> cover{{0.5 * L, H}, {0.0, 0.0}, {L, 0.0}};
  add_shell(cfg, 12, cover);
  return cfg;
}

ProblemConfig multi_load(Scale scale, int voids, CellLayout cells, LoadMode mode) {
  if (voids != 8 && voids != 12 && voids != 18)
    throw ConfigError("shell.void: multi-load benchmark takes 8, 12 or 18 voids");
  const bool paper = scale == Scale::Paper;
  const bool four = cells == CellLayout::FourComp;
  int cx = four ? 14 : 20, cy = four ? 7 : 10;
  if (paper) {
    cx *= 2;
    cy *= 2;
  }
  std::string name = std::string("multi_load_") + (four ? "four_comp_" : "two_comp_") +
                     (mode == LoadMode::Averaged ? "averaged_" : "simultaneous_") +
                     std::to_string(voids) + (paper ? "_paper" : "_desk");
  ProblemConfig cfg = base_config(name, 2.0, 1.0, paper ? 600 : 200, paper ? 300 : 100, cx, cy,
                                  0.05, cells);
  if (four) cfg.lattice.movable_centers = true;
  const double L = cfg.length, H = cfg.height;
  const LoadSpec f1{{0.25 * L, H}, 1, -1.0}, f2{{0.5 * L, H}, 1, -1.0}, f3{{0.75 * L, H}, 1, -1.0};
  if (mode == LoadMode::Simultaneous) {
    cfg.loads = {LoadCaseSpec{{f1, f2, f3}, 1.0}};
  } else {
    const double w = 1.0 / 3.0;
    cfg.loads = {LoadCaseSpec{{f1}, w}, LoadCaseSpec{{f2}, w}, LoadCaseSpec{{f3}, 1.0 - 2.0 * w}};
  }
  cfg.supports = {point_support({0.0, 0.0}, true, true), point_support({L, 0.0}, false, true)};
  const std::vector<Point> cover{f1.location, f2.location, f3.location, {0.0, 0.0}, {L, 0.0}};
  add_shell(cfg, voids, cover);
  return cfg;
}

ProblemConfig benchmark_by_name(const std::string& name, Scale scale) {
  if (name == "short_beam") return short_beam(scale);
  if (name == "mbb_beam") return mbb_beam(scale);
  const std::string prefix = "multi_load";
  if (name.rfind(prefix, 0) == 0) {
    CellLayout cells = CellLayout::TwoComp;
    LoadMode mode = LoadMode::Simultaneous;
    int voids = 18;
    std::string rest = name.substr(prefix.size());
    std::size_t pos = 0;
    while (pos < rest.size()) {
      if (rest[pos] != '_') throw ConfigError("unknown benchmark '" + name + "'");
      const std::size_t next = rest.find('_', pos + 1);
      std::string tok = rest.substr(pos + 1, next == std::string::npos ? std::string::npos
                                                                        : next - pos - 1);
      pos = next == std::string::npos ? rest.size() : next;
      if (tok == "two" || tok == "four") {
        // "two_comp" / "four_comp": the next token must be "comp"
        const std::size_t n2 = rest.find('_', pos + 1);
        const std::string comp = rest.substr(pos + 1, n2 == std::string::npos ? std::string::npos
                                                                               : n2 - pos - 1);
        if (pos >= rest.size() || comp != "comp")
          throw ConfigError("unknown benchmark '" + name + "'");
        cells = tok == "four" ? CellLayout::FourComp : CellLayout::TwoComp;
        pos = n2 == std::string::npos ? rest.size() : n2;
      } else if (tok == "averaged") {
        mode = LoadMode::Averaged;
      } else if (tok == "simultaneous") {
        mode = LoadMode::Simultaneous;
      } else if (tok == "8" || tok == "12" || tok == "18") {
        voids = std::stoi(tok);
      } else {
        throw ConfigError("unknown benchmark '" + name + "'");
      }
    }
    return multi_load(scale, voids, cells, mode);
  }
  throw ConfigError("unknown benchmark '" + name + "'");
}

}  // namespace shellfill
