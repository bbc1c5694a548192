#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "shellfill/field.hpp"

namespace shellfill {

class FemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MaterialParams {
  double youngs = 1.0;
  double poisson = 0.3;

  Eigen::Matrix3d plane_stress() const;
  void validate() const;
  bool operator==(const MaterialParams&) const = default;
};

struct PointLoad {
  int node = 0;
  int direction = 0;  // 0 = x, 1 = y
  double magnitude = 0.0;
};

struct LoadCase {
  std::vector<PointLoad> point_loads;
  double weight = 1.0;
};

struct FixedDof {
  int node = 0;
  int direction = 0;
};

struct BoundaryConditions {
  std::vector<FixedDof> fixed;
};

struct SolveResult {
  std::vector<Eigen::VectorXd> displacements;  // full nodal vectors, one per case
  std::vector<double> compliance;  // 2 f.u - u.K.u per case
  std::vector<double> relative_residual;
  double aggregate = 0.0;  // sum_i w_i C_i
  std::uint64_t design_tag = 0;  // set by callers that track which design was analyzed
};

using ElementMatrix = Eigen::Matrix<double, 8, 8>;
using ElementVector = Eigen::Matrix<double, 8, 1>;

/// Solid-material stiffness of one dx by dy bilinear element (unit thickness),
/// 2x2 Gauss quadrature. Local dofs: (ux, uy) of corners in Grid order.
ElementMatrix q4_unit_stiffness(const MaterialParams& mat, double dx, double dy);

Eigen::VectorXd load_vector(const Grid& grid, const LoadCase& lc);

/// Linear elastic solver on a fixed grid. The sparsity pattern, the reduced
/// dof map and the fill-reducing ordering are computed once; each solve only
/// refreshes the numeric values. Fixed dofs are eliminated.
class ElasticSolver {
 public:
  static constexpr int kDirectDofLimit = 100000;

  ElasticSolver(const Grid& grid, const BoundaryConditions& bc, double tol = 1e-9);
  ~ElasticSolver();
  ElasticSolver(ElasticSolver&&) noexcept;
  ElasticSolver& operator=(ElasticSolver&&) noexcept;

  SolveResult solve(std::span<const double> densities, const ElementMatrix& ke,
                    std::span<const LoadCase> loads);

  int free_dof_count() const;
  bool uses_direct_solver() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Same discretization solved in extended precision; returns the weighted
/// compliance. Used as a low-noise reference by the finite-difference check.
class ExtendedElasticSolver {
 public:
  ExtendedElasticSolver(const Grid& grid, const BoundaryConditions& bc, double tol = 1e-14);
  ~ExtendedElasticSolver();
  ExtendedElasticSolver(ExtendedElasticSolver&&) noexcept;

  long double solve(std::span<const long double> densities, const ElementMatrix& ke,
                    std::span<const LoadCase> loads, std::vector<long double>* per_case = nullptr);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

SolveResult assemble_and_solve(const Grid& grid, std::span<const double> densities,
                               const ElementMatrix& ke, const BoundaryConditions& bc,
                               std::span<const LoadCase> loads, double tol = 1e-9);

/// Global dof indices of element e in local order.
std::array<int, 8> element_dofs(const Grid& grid, int e);

/// Per-element strain energy u_e^T k u_e for one displacement field.
std::vector<double> element_energies(const Grid& grid, const ElementMatrix& ke,
                                     const Eigen::VectorXd& u);

}  // namespace shellfill
