#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "shellfill/geometry.hpp"

namespace shellfill {

/// Uniform structured grid of bilinear quadrilaterals. Nodes are numbered
/// row-major with x fastest; element e = j*nx + i has corners
/// (i,j), (i+1,j), (i+1,j+1), (i,j+1).
struct Grid {
  int nx = 1;
  int ny = 1;
  double dx = 1.0;
  double dy = 1.0;
  Point origin;

  static Grid covering(double length, double height, int nx, int ny);

  int node_count() const { return (nx + 1) * (ny + 1); }
  int element_count() const { return nx * ny; }
  int node_index(int i, int j) const { return j * (nx + 1) + i; }
  Point node_point(int node) const;
  std::array<int, 4> element_nodes(int e) const;
  double element_area() const { return dx * dy; }
  double length() const { return nx * dx; }
  double height() const { return ny * dy; }
  /// Node closest to a physical point (ties resolved toward lower indices).
  int nearest_node(Point p) const;
};

struct HeavisideParams {
  double epsilon = 0.1;
  double alpha = 1e-3;
  double penal = 2.0;

  /// epsilon = factor * min(dx, dy).
  static HeavisideParams for_grid(const Grid& g, double factor = 3.0, double alpha = 1e-3,
                                  double penal = 2.0);
};

struct NodalField {
  std::vector<double> values;
};

double regularized_heaviside(double x, const HeavisideParams& hp);
double heaviside_derivative(double x, const HeavisideParams& hp);

/// rho_e = sum_i H(phi_i)^q / 4 over the four corners.
double element_density(std::span<const double, 4> nodal_phi, const HeavisideParams& hp);

std::vector<double> element_densities(const NodalField& field, const Grid& grid,
                                      const HeavisideParams& hp);

/// Unpenalized measure sum_e dx*dy * sum_i H(phi_i)/4.
double volume_measure(const NodalField& field, const Grid& grid, const HeavisideParams& hp);

/// Number of elements sharing each node (1, 2 or 4); used to turn element
/// sums of nodal quantities into nodal weights.
std::vector<int> node_valence(const Grid& grid);

NodalField sample_field(const Grid& grid, const std::function<double(Point)>& tdf);

}  // namespace shellfill
