#include "shellfill/field.hpp"

#include "shellfill/detail/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shellfill {

Grid Grid::covering(double length, double height, int nx, int ny) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("grid needs at least one element per direction");
  Grid g;
  g.nx = nx;
  g.ny = ny;
  g.dx = length / nx;
  g.dy = height / ny;
  return g;
}

Point Grid::node_point(int node) const {
  const int i = node % (nx + 1);
  const int j = node / (nx + 1);
  return {origin.x + i * dx, origin.y + j * dy};
}

std::array<int, 4> Grid::element_nodes(int e) const {
  const int i = e % nx;
  const int j = e / nx;
  return {node_index(i, j), node_index(i + 1, j), node_index(i + 1, j + 1), node_index(i, j + 1)};
}

int Grid::nearest_node(Point p) const {
  const int i = std::clamp(static_cast<int>(std::lround((p.x - origin.x) / dx)), 0, nx);
  const int j = std::clamp(static_cast<int>(std::lround((p.y - origin.y) / dy)), 0, ny);
  return node_index(i, j);
}

HeavisideParams HeavisideParams::for_grid(const Grid& g, double factor, double alpha,
                                          double penal) {
  return {factor * std::min(g.dx, g.dy), alpha, penal};
}

double regularized_heaviside(double x, const HeavisideParams& hp) {
  return detail::heaviside<double>(x, hp);
}

double heaviside_derivative(double x, const HeavisideParams& hp) {
  const double e = hp.epsilon;
  if (x > e || x < -e) return 0.0;
  return 0.75 * (1.0 - hp.alpha) * (1.0 / e - x * x / (e * e * e));
}

double element_density(std::span<const double, 4> nodal_phi, const HeavisideParams& hp) {
  double sum = 0.0;
  for (double phi : nodal_phi) sum += std::pow(regularized_heaviside(phi, hp), hp.penal);
  return 0.25 * sum;
}

std::vector<double> element_densities(const NodalField& field, const Grid& grid,
                                      const HeavisideParams& hp) {
  std::vector<double> hq(field.values.size());
  for (std::size_t n = 0; n < hq.size(); ++n)
    hq[n] = std::pow(regularized_heaviside(field.values[n], hp), hp.penal);
  std::vector<double> rho(static_cast<std::size_t>(grid.element_count()));
  for (int e = 0; e < grid.element_count(); ++e) {
    double sum = 0.0;
    for (int n : grid.element_nodes(e)) sum += hq[n];
    rho[e] = 0.25 * sum;
  }
  return rho;
}

std::vector<int> node_valence(const Grid& grid) {
  std::vector<int> v(static_cast<std::size_t>(grid.node_count()), 0);
  for (int e = 0; e < grid.element_count(); ++e)
    for (int n : grid.element_nodes(e)) ++v[n];
  return v;
}

double volume_measure(const NodalField& field, const Grid& grid, const HeavisideParams& hp) {
  double total = 0.0;
  for (int e = 0; e < grid.element_count(); ++e) {
    double sum = 0.0;
    for (int n : grid.element_nodes(e)) sum += regularized_heaviside(field.values[n], hp);
    total += 0.25 * sum;
  }
  return total * grid.element_area();
}

NodalField sample_field(const Grid& grid, const std::function<double(Point)>& tdf) {
  NodalField f;
  f.values.resize(static_cast<std::size_t>(grid.node_count()));
  for (int n = 0; n < grid.node_count(); ++n) f.values[n] = tdf(grid.node_point(n));
  return f;
}

}  // namespace shellfill
