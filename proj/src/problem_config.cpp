#include "shellfill/problem_config.hpp"

#include <cmath>

namespace shellfill {

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

void ProblemConfig::validate() const {
  require(length > 0.0, "domain.length", "must be positive");
  require(height > 0.0, "domain.height", "must be positive");
  require(nx >= 1, "grid.nx", "must be at least 1");
  require(ny >= 1, "grid.ny", "must be at least 1");
  require(material.youngs > 0.0, "material.youngs", "must be positive");
  require(material.poisson >= 0.0 && material.poisson < 0.5, "material.poisson",
          "must lie in [0, 0.5)");

  require(!loads.empty(), "loads.cases", "at least one load case is required");
  double wsum = 0.0;
  for (const auto& lc : loads) {
    require(!lc.loads.empty(), "loads.case", "load case without point loads");
    require(lc.weight > 0.0, "loads.weight", "weights must be positive");
    wsum += lc.weight;
    for (const auto& l : lc.loads) {
      require(l.location.x >= 0.0 && l.location.x <= length && l.location.y >= 0.0 &&
                  l.location.y <= height,
              "loads.point", "load location outside the domain");
      require(l.direction == 0 || l.direction == 1, "loads.point", "direction must be x or y");
    }
  }
  require(std::abs(wsum - 1.0) < 1e-9, "loads.weight", "case weights must sum to 1");

  require(!supports.empty(), "bcs.support", "at least one support is required");
  for (const auto& s : supports) {
    if (s.kind == SupportSpec::Kind::Point)
      require(s.location.x >= 0.0 && s.location.x <= length && s.location.y >= 0.0 &&
                  s.location.y <= height,
              "bcs.support", "support location outside the domain");
    require(s.fix_x || s.fix_y, "bcs.support", "support fixes no direction");
  }
  require(boundary_conditions().fixed.size() >= 3, "bcs.support",
          "at least three fixed dofs are needed to remove rigid-body modes");

  const auto& lat = lattice;
  require(lat.cells_x >= 1, "lattice.cells_x", "must be at least 1");
  require(lat.cells_y >= 1, "lattice.cells_y", "must be at least 1");
  require(lat.n1 >= 1, "lattice.n1", "must be at least 1");
  require(lat.n2 >= 1, "lattice.n2", "must be at least 1");
  require(lat.exponent >= 2 && lat.exponent % 2 == 0, "lattice.exponent", "must be even and >= 2");
  require(!lat.prototype.empty(), "lattice.component", "prototype cell has no components");
  require(lat.cpfs.size() == (lat.shared_cpf ? 1u : lat.prototype.size()), "lattice.cpf",
          "CPF count does not match the sharing mode");
  for (const auto& c : lat.cpfs) {
    require(static_cast<int>(c.alpha.size()) == lat.n1, "lattice.cpf", "alpha term count != n1");
    require(static_cast<int>(c.beta.size()) == lat.n2, "lattice.cpf", "beta term count != n2");
  }
  for (const auto& c : lat.prototype) {
    require(c.half_length > 0.0, "lattice.component", "half-length must be positive");
    require(c.t1 > 0.0 && c.t2 > 0.0, "lattice.component", "thicknesses must be positive");
  }
  require(lat.center_lo <= lat.center_hi, "lattice.center_range", "lower bound above upper bound");

  require(shell.delta_d > 0.0, "shell.delta_d", "must be positive");
  require(shell.control_count >= 3, "shell.control_count", "must be at least 3");
  require(shell.spline_order >= 1, "shell.spline_order", "must be at least 1");
  require(shell.samples_per_control >= 8, "shell.samples_per_control", "must be at least 8");
  require(!shell.voids.empty(), "shell.void", "at least one void curve is required");
  int inverted = 0;
  for (const auto& v : shell.voids) {
    require(static_cast<int>(v.radii.size()) == shell.control_count, "shell.void",
            "radius count != control_count");
    for (double d : v.radii) {
      require(d > 0.0, "shell.void", "radii must be positive");
      if (v.inverted) require(d - shell.delta_d > 0.0, "shell.delta_d", "shell thicker than outer boundary");
    }
    inverted += v.inverted ? 1 : 0;
  }
  require(inverted <= 1, "shell.void", "at most one inverted boundary curve");

  require(constraints.v_bar > 0.0 && constraints.v_bar < 1.0, "constraints.v_bar",
          "must lie in (0, 1) as a fraction of the domain volume");
  require(constraints.v_lower >= 0.0 && constraints.v_lower < 1.0, "constraints.v_lower",
          "must lie in [0, 1) as a fraction of the domain volume");

  require(heaviside.epsilon_factor > 0.0, "heaviside.epsilon_factor", "must be positive");
  require(heaviside.alpha > 0.0 && heaviside.alpha < 1.0, "heaviside.alpha", "must lie in (0, 1)");
  require(heaviside.penal >= 1.0, "heaviside.penal", "must be at least 1");
  require(ks.l_plus > 0.0, "ks.l_plus", "must be positive");
  require(ks.l_minus < 0.0, "ks.l_minus", "must be negative");

  require(mma.max_iters >= 1, "mma.max_iters", "must be at least 1");
  require(mma.min_iters >= 0, "mma.min_iters", "must be non-negative");
  require(mma.tolerance > 0.0, "mma.tolerance", "must be positive");
  require(mma.move_limit > 0.0 && mma.move_limit <= 1.0, "mma.move_limit", "must lie in (0, 1]");
  require(mma.asy_init > 0.0, "mma.asy_init", "must be positive");
  require(mma.asy_incr >= 1.0, "mma.asy_incr", "must be at least 1");
  require(mma.bound_ramp >= 0, "mma.bound_ramp", "must be non-negative");
  require(mma.asy_decr > 0.0 && mma.asy_decr <= 1.0, "mma.asy_decr", "must lie in (0, 1]");
}

Grid ProblemConfig::grid() const { return Grid::covering(length, height, nx, ny); }

HeavisideParams ProblemConfig::heaviside_params() const {
  return HeavisideParams::for_grid(grid(), heaviside.epsilon_factor, heaviside.alpha,
                                   heaviside.penal);
}

BoundaryConditions ProblemConfig::boundary_conditions() const {
  const Grid g = grid();
  BoundaryConditions bc;
  std::vector<char> seen(static_cast<std::size_t>(2 * g.node_count()), 0);
  auto fix = [&](int node, const SupportSpec& s) {
    for (int d = 0; d < 2; ++d) {
      if ((d == 0 && !s.fix_x) || (d == 1 && !s.fix_y)) continue;
      if (seen[2 * node + d]) continue;
      seen[2 * node + d] = 1;
      bc.fixed.push_back({node, d});
    }
  };
  for (const auto& s : supports) {
    if (s.kind == SupportSpec::Kind::Point) {
      fix(g.nearest_node(s.location), s);
      continue;
    }
    switch (s.edge) {
      case SupportSpec::Edge::Left:
        for (int j = 0; j <= g.ny; ++j) fix(g.node_index(0, j), s);
        break;
      case SupportSpec::Edge::Right:
        for (int j = 0; j <= g.ny; ++j) fix(g.node_index(g.nx, j), s);
        break;
      case SupportSpec::Edge::Bottom:
        for (int i = 0; i <= g.nx; ++i) fix(g.node_index(i, 0), s);
        break;
      case SupportSpec::Edge::Top:
        for (int i = 0; i <= g.nx; ++i) fix(g.node_index(i, g.ny), s);
        break;
    }
  }
  return bc;
}

std::vector<LoadCase> ProblemConfig::load_cases() const {
  const Grid g = grid();
  std::vector<LoadCase> out;
  for (const auto& spec : loads) {
    LoadCase lc;
    lc.weight = spec.weight;
    for (const auto& l : spec.loads)
      lc.point_loads.push_back({g.nearest_node(l.location), l.direction, l.magnitude});
    out.push_back(std::move(lc));
  }
  return out;
}

LatticeSpec ProblemConfig::lattice_spec() const {
  LatticeSpec s;
  s.cells_x = lattice.cells_x;
  s.cells_y = lattice.cells_y;
  s.length = length;
  s.height = height;
  s.cpfs = lattice.cpfs;
  for (auto& c : s.cpfs) {
    c.length = length;
    c.height = height;
  }
  for (std::size_t k = 0; k < lattice.prototype.size(); ++k) {
    PrototypeComponent pc;
    pc.geom = lattice.prototype[k];
    pc.geom.exponent = lattice.exponent;
    pc.cpf_index = lattice.shared_cpf ? 0 : static_cast<int>(k);
    s.prototype.push_back(pc);
  }
  return s;
}

ShellSpec ProblemConfig::shell_spec() const {
  ShellSpec s;
  s.delta_d = shell.delta_d;
  s.voids = shell.voids;
  for (auto& v : s.voids) v.spline_order = shell.spline_order;
  return s;
}

}  // namespace shellfill
