#include "shellfill/fem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <type_traits>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace shellfill {

Eigen::Matrix3d MaterialParams::plane_stress() const {
  const double c = youngs / (1.0 - poisson * poisson);
  Eigen::Matrix3d d;
  d << c, c * poisson, 0.0,
       c * poisson, c, 0.0,
       0.0, 0.0, c * 0.5 * (1.0 - poisson);
  return d;
}

void MaterialParams::validate() const {
  if (!(youngs > 0.0)) throw FemError("Young's modulus must be positive");
  if (!(poisson >= 0.0 && poisson < 0.5)) throw FemError("Poisson ratio must lie in [0, 0.5)");
}

ElementMatrix q4_unit_stiffness(const MaterialParams& mat, double dx, double dy) {
  const Eigen::Matrix3d d = mat.plane_stress();
  const double g = 1.0 / std::sqrt(3.0);
  const double xi_n[4] = {-1.0, 1.0, 1.0, -1.0};
  const double eta_n[4] = {-1.0, -1.0, 1.0, 1.0};
  ElementMatrix k = ElementMatrix::Zero();
  for (double xi : {-g, g}) {
    for (double eta : {-g, g}) {
      Eigen::Matrix<double, 3, 8> b = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        const double dn_dx = 0.25 * xi_n[a] * (1.0 + eta_n[a] * eta) * 2.0 / dx;
        const double dn_dy = 0.25 * eta_n[a] * (1.0 + xi_n[a] * xi) * 2.0 / dy;
        b(0, 2 * a) = dn_dx;
        b(1, 2 * a + 1) = dn_dy;
        b(2, 2 * a) = dn_dy;
        b(2, 2 * a + 1) = dn_dx;
      }
      k += b.transpose() * d * b * (0.25 * dx * dy);  // unit weights, |J| = dx*dy/4
    }
  }
  return 0.5 * (k + k.transpose());
}

std::array<int, 8> element_dofs(const Grid& grid, int e) {
  const auto nodes = grid.element_nodes(e);
  std::array<int, 8> dofs{};
  for (int a = 0; a < 4; ++a) {
    dofs[2 * a] = 2 * nodes[a];
    dofs[2 * a + 1] = 2 * nodes[a] + 1;
  }
  return dofs;
}

Eigen::VectorXd load_vector(const Grid& grid, const LoadCase& lc) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(2 * grid.node_count());
  for (const auto& pl : lc.point_loads) {
    if (pl.node < 0 || pl.node >= grid.node_count() || pl.direction < 0 || pl.direction > 1)
      throw FemError("point load refers to a node or direction outside the grid");
    f[2 * pl.node + pl.direction] += pl.magnitude;
  }
  return f;
}

std::vector<double> element_energies(const Grid& grid, const ElementMatrix& ke,
                                     const Eigen::VectorXd& u) {
  std::vector<double> out(static_cast<std::size_t>(grid.element_count()));
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto dofs = element_dofs(grid, e);
    ElementVector ue;
    // Corner-0 translation removed; ke maps it to zero.
    for (int a = 0; a < 8; ++a) ue[a] = u[dofs[a]] - u[dofs[a % 2]];
    out[e] = ue.dot(ke * ue);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

template <class R>
struct SolverCore {
  using SpMat = Eigen::SparseMatrix<R>;
  using Vec = Eigen::Matrix<R, Eigen::Dynamic, 1>;

  Grid grid;
  double tol = 1e-9;
  std::vector<int> reduced;  // global dof -> reduced index or -1
  int n_free = 0;
  SpMat k;                   // lower triangle of the reduced matrix
  std::vector<int> slot;     // element-major, 64 per element: index into k values or -1
  bool direct = true;
  bool analyzed = false;
  std::vector<R> dens;
  ElementMatrix ke_solid;
  // The direct factorization is always in double; wider R refines against it.
  Eigen::SparseMatrix<double> kd;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
  Eigen::ConjugateGradient<SpMat, Eigen::Lower, Eigen::IncompleteCholesky<R, Eigen::Lower>> cg;

  void setup(const Grid& g, const BoundaryConditions& bc, double t) {
    grid = g;
    tol = t;
    const int ndof = 2 * grid.node_count();
    std::vector<char> fixed(static_cast<std::size_t>(ndof), 0);
    for (const auto& f : bc.fixed) {
      if (f.node < 0 || f.node >= grid.node_count() || f.direction < 0 || f.direction > 1)
        throw FemError("boundary condition refers to a node or direction outside the grid");
      fixed[2 * f.node + f.direction] = 1;
    }
    reduced.assign(static_cast<std::size_t>(ndof), -1);
    for (int d = 0; d < ndof; ++d)
      if (!fixed[d]) reduced[d] = n_free++;
    if (n_free == 0) throw FemError("every degree of freedom is fixed");
    direct = n_free <= ElasticSolver::kDirectDofLimit;

    std::vector<Eigen::Triplet<R>> trip;
    trip.reserve(static_cast<std::size_t>(grid.element_count()) * 36);
    for (int e = 0; e < grid.element_count(); ++e) {
      const auto dofs = element_dofs(grid, e);
      for (int a = 0; a < 8; ++a) {
        const int ra = reduced[dofs[a]];
        if (ra < 0) continue;
        for (int b = 0; b < 8; ++b) {
          const int rb = reduced[dofs[b]];
          if (rb < 0 || ra < rb) continue;
          trip.emplace_back(ra, rb, R(1));
        }
      }
    }
    k.resize(n_free, n_free);
    k.setFromTriplets(trip.begin(), trip.end());
    k.makeCompressed();

    slot.assign(static_cast<std::size_t>(grid.element_count()) * 64, -1);
    for (int e = 0; e < grid.element_count(); ++e) {
      const auto dofs = element_dofs(grid, e);
      for (int a = 0; a < 8; ++a) {
        const int ra = reduced[dofs[a]];
        if (ra < 0) continue;
        for (int b = 0; b < 8; ++b) {
          const int rb = reduced[dofs[b]];
          if (rb < 0 || ra < rb) continue;
          // column rb, row ra
          const int* rows = k.innerIndexPtr();
          const int begin = k.outerIndexPtr()[rb];
          const int end = k.outerIndexPtr()[rb + 1];
          const int* hit = std::lower_bound(rows + begin, rows + end, ra);
          slot[static_cast<std::size_t>(e) * 64 + a * 8 + b] = static_cast<int>(hit - rows);
        }
      }
    }
  }

  void factor(std::span<const R> densities, const ElementMatrix& ke) {
    if (static_cast<int>(densities.size()) != grid.element_count())
      throw FemError("density count does not match the grid");
    dens.assign(densities.begin(), densities.end());
    ke_solid = ke;
    R* val = k.valuePtr();
    std::fill(val, val + k.nonZeros(), R(0));
    for (int e = 0; e < grid.element_count(); ++e) {
      const R rho = densities[e];
      const int* s = &slot[static_cast<std::size_t>(e) * 64];
      for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b)
          if (s[a * 8 + b] >= 0) val[s[a * 8 + b]] += rho * R(ke(a, b));
    }
    if (direct) {
      const Eigen::SparseMatrix<double>* m = nullptr;
      if constexpr (std::is_same_v<R, double>) {
        m = &k;
      } else {
        kd = k.template cast<double>();
        m = &kd;
      }
      if (!analyzed) {
        llt.analyzePattern(*m);
        analyzed = true;
      }
      llt.factorize(*m);
      if (llt.info() != Eigen::Success) throw FemError("reduced stiffness matrix is singular");
      // Unremoved rigid-body modes show up as pivots at rounding level.
      const auto piv = llt.matrixL().nestedExpression().diagonal().cwiseAbs2().eval();
      if (piv.minCoeff() < 1e-14 * piv.maxCoeff())
        throw FemError("reduced stiffness matrix is singular (rigid-body mode not restrained)");
    } else {
      cg.setTolerance(static_cast<R>(tol));
      cg.setMaxIterations(20 * n_free);
      cg.compute(k);
      if (cg.info() != Eigen::Success) throw FemError("preconditioner setup failed");
    }
  }

  Vec reduce(const Eigen::VectorXd& full) const {
    Vec f(n_free);
    for (int d = 0; d < static_cast<int>(reduced.size()); ++d)
      if (reduced[d] >= 0) f[reduced[d]] = R(full[d]);
    return f;
  }

  Vec direct_solve(const Vec& r) const {
    if constexpr (std::is_same_v<R, double>)
      return llt.solve(r);
    else
      return llt.solve(r.template cast<double>()).template cast<R>();
  }

  /// Solves the factored system with one or more refinement steps.
  Vec solve(const Vec& f, double& rel) const {
    const int max_refine = std::is_same_v<R, double> ? 4 : 30;
    const R fnorm = f.norm();
    rel = 0.0;
    if (fnorm == R(0)) return Vec::Zero(n_free);
    Vec u;
    if (direct) {
      u = direct_solve(f);
      Vec r = f - k.template selfadjointView<Eigen::Lower>() * u;
      rel = static_cast<double>(r.norm() / fnorm);
      // Always refine once; keep going while the residual is above tolerance.
      for (int it = 0; it < max_refine && (it == 0 || rel > tol); ++it) {
        u += direct_solve(r);
        r = f - k.template selfadjointView<Eigen::Lower>() * u;
        rel = static_cast<double>(r.norm() / fnorm);
      }
      if (rel > tol) {
        // Very compliant designs (near-rigid motion of weakly held parts) put
        // the attainable residual above tol. Accept once refinement has hit
        // the rounding floor: componentwise backward error of a few hundred eps.
        const SpMat ka = k.cwiseAbs();
        const Vec scale = (ka.template selfadjointView<Eigen::Lower>() * u.cwiseAbs()).array().matrix() +
                          f.cwiseAbs();
        const R backward = (r.cwiseAbs().array() / scale.array().max(R(1e-300))).maxCoeff();
        if (backward <= R(1e3) * std::numeric_limits<R>::epsilon()) rel = std::min(rel, tol);
      }
    } else {
      u = cg.solve(f);
      rel = static_cast<double>((f - k.template selfadjointView<Eigen::Lower>() * u).norm() / fnorm);
    }
    if (!std::isfinite(rel) || rel > tol) {
      std::ostringstream os;
      os << "linear solve did not converge: relative residual " << rel << " > " << tol;
      throw FemError(os.str());
    }
    return u;
  }

  /// 2 f.u - u.K.u: equals f.u at the exact solution, with an error that is
  /// quadratic in the solve error. u.K.u is summed per element after removing
  /// the element's corner-0 translation, which k maps to zero; this keeps the
  /// rounding proportional to strain rather than to total displacement.
  R energy_compliance(const Vec& f, const Vec& u) const {
    const int ndof = static_cast<int>(reduced.size());
    std::vector<R> full(static_cast<std::size_t>(ndof), R(0));
    for (int d = 0; d < ndof; ++d)
      if (reduced[d] >= 0) full[d] = u[reduced[d]];
    R strain = 0;
    for (int e = 0; e < grid.element_count(); ++e) {
      const auto dofs = element_dofs(grid, e);
      R v[8];
      for (int a = 0; a < 8; ++a) v[a] = full[dofs[a]] - full[dofs[a % 2]];
      R ee = 0;
      for (int a = 0; a < 8; ++a) {
        if (v[a] == R(0)) continue;
        R row = 0;
        for (int b = 0; b < 8; ++b) row += R(ke_solid(a, b)) * v[b];
        ee += v[a] * row;
      }
      strain += dens[e] * ee;
    }
    return 2 * f.dot(u) - strain;
  }
};

}  // namespace

struct ElasticSolver::Impl : SolverCore<double> {};

ElasticSolver::ElasticSolver(const Grid& grid, const BoundaryConditions& bc, double tol)
    : impl_(std::make_unique<Impl>()) {
  impl_->setup(grid, bc, tol);
}

ElasticSolver::~ElasticSolver() = default;
ElasticSolver::ElasticSolver(ElasticSolver&&) noexcept = default;
ElasticSolver& ElasticSolver::operator=(ElasticSolver&&) noexcept = default;

int ElasticSolver::free_dof_count() const { return impl_->n_free; }
bool ElasticSolver::uses_direct_solver() const { return impl_->direct; }

SolveResult ElasticSolver::solve(std::span<const double> densities, const ElementMatrix& ke,
                                 std::span<const LoadCase> loads) {
  auto& m = *impl_;
  m.factor(densities, ke);
  SolveResult res;
  for (const auto& lc : loads) {
    const Eigen::VectorXd f_full = load_vector(m.grid, lc);
    const Eigen::VectorXd f = m.reduce(f_full);
    double rel = 0.0;
    const Eigen::VectorXd u = m.solve(f, rel);
    Eigen::VectorXd u_full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m.reduced.size()));
    for (int d = 0; d < static_cast<int>(m.reduced.size()); ++d)
      if (m.reduced[d] >= 0) u_full[d] = u[m.reduced[d]];
    const double c = m.energy_compliance(f, u);
    res.displacements.push_back(std::move(u_full));
    res.compliance.push_back(c);
    res.relative_residual.push_back(rel);
    res.aggregate += lc.weight * c;
  }
  return res;
}

struct ExtendedElasticSolver::Impl : SolverCore<long double> {};

ExtendedElasticSolver::ExtendedElasticSolver(const Grid& grid, const BoundaryConditions& bc,
                                             double tol)
    : impl_(std::make_unique<Impl>()) {
  impl_->setup(grid, bc, tol);
}

ExtendedElasticSolver::~ExtendedElasticSolver() = default;
ExtendedElasticSolver::ExtendedElasticSolver(ExtendedElasticSolver&&) noexcept = default;

long double ExtendedElasticSolver::solve(std::span<const long double> densities,
                                         const ElementMatrix& ke,
                                         std::span<const LoadCase> loads,
                                         std::vector<long double>* per_case) {
  auto& m = *impl_;
  m.factor(densities, ke);
  long double total = 0;
  if (per_case) per_case->clear();
  for (const auto& lc : loads) {
    const auto f = m.reduce(load_vector(m.grid, lc));
    double rel = 0.0;
    const auto u = m.solve(f, rel);
    const long double c = m.energy_compliance(f, u);
    if (per_case) per_case->push_back(c);
    total += static_cast<long double>(lc.weight) * c;
  }
  return total;
}

SolveResult assemble_and_solve(const Grid& grid, std::span<const double> densities,
                               const ElementMatrix& ke, const BoundaryConditions& bc,
                               std::span<const LoadCase> loads, double tol) {
  ElasticSolver solver(grid, bc, tol);
  return solver.solve(densities, ke, loads);
}

}  // namespace shellfill
