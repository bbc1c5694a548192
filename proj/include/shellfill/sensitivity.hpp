#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "shellfill/design.hpp"
#include "shellfill/fem.hpp"
#include "shellfill/field.hpp"
#include "shellfill/problem_config.hpp"
#include "shellfill/voids.hpp"

namespace shellfill {

class SensitivityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometry and sampled nodal fields of one design. Per-cell and per-void
/// values are recomputed on demand for the nodes inside a transition band.
struct ChainContext {
  ChainContext(const DesignLayout& layout, std::span<const double> x, const Grid& grid,
               const AggregationParams& agg, int samples_per_control);

  const DesignLayout* layout;
  std::uint64_t tag;
  Grid grid;
  AggregationParams agg;
  LatticeSpec lattice;
  ShellSpec shell;
  std::vector<VoidCurve> expanded;
  ShellTables tables;

  NodalField phi_s;
  NodalField phi0;
  NodalField phi0_ext;
  NodalField phi_gs;
  NodalField phi1;
};

/// d(phi_s)/d(v) at a grid node for every component and CPF variable. `out`
/// has one entry per design variable; MMV entries are left untouched.
void mmc_node_partials(const ChainContext& ctx, int node, std::span<double> out);

/// d(phi_s)/d(v) and d(phi0_ext)/d(v) at a grid node for every void variable.
void mmv_node_partials(const ChainContext& ctx, int node, std::span<double> d_phi_s,
                       std::span<double> d_phi0_ext);

double mmc_node_partial(const ChainContext& ctx, int node, std::size_t var);

struct MmvPartial {
  double d_phi_s = 0.0;
  double d_phi0_ext = 0.0;
};
MmvPartial mmv_node_partial(const ChainContext& ctx, int node, std::size_t var);

/// Throws SensitivityError when solve was not computed for ctx's design.
std::vector<double> compliance_gradient(const ChainContext& ctx, const SolveResult& solve,
                                        const ElementMatrix& ke, std::span<const LoadCase> loads,
                                        const HeavisideParams& hp);

struct VolumeGradients {
  std::vector<double> d_volume;
  std::vector<double> d_infill;
};
VolumeGradients volume_gradients(const ChainContext& ctx, const HeavisideParams& hp);

/// Objective, constraint measures and their gradients at one design.
struct Evaluation {
  std::uint64_t tag = 0;
  double compliance = 0.0;     // weighted over load cases
  double volume = 0.0;         // V
  double infill_volume = 0.0;  // V_in
  std::vector<double> d_compliance;
  std::vector<double> d_volume;
  std::vector<double> d_infill;
  std::vector<double> densities;
  NodalField phi_s;
  NodalField phi0_ext;
  SolveResult solve;
};

/// Forward analysis (geometry, fields, FEM) plus analytic gradients for one
/// problem. Holds the factorization pattern and element stiffness across calls.
class Evaluator {
 public:
  explicit Evaluator(const ProblemConfig& cfg);

  const ProblemConfig& config() const { return cfg_; }
  const DesignLayout& layout() const { return layout_; }
  const Grid& grid() const { return grid_; }
  const HeavisideParams& heaviside() const { return hp_; }
  const std::vector<LoadCase>& loads() const { return loads_; }

  Evaluation evaluate(std::span<const double> x, bool with_gradients = true);
  ChainContext context(std::span<const double> x) const;

 private:
  ProblemConfig cfg_;
  DesignLayout layout_;
  Grid grid_;
  HeavisideParams hp_;
  ElementMatrix ke_;
  std::vector<LoadCase> loads_;
  ElasticSolver solver_;
};

struct FdEntry {
  std::size_t var = 0;
  double step = 0.0;
  std::array<double, 3> analytic{};  // C, V, V_in
  std::array<double, 3> numeric{};
  std::array<double, 3> error{};     // relative, or absolute for negligible entries
  std::array<bool, 3> pass{};
};

struct FdReport {
  std::vector<FdEntry> entries;
  std::array<double, 3> grad_norm_inf{};
  double rel_tol = 1e-3;
  double abs_tol = 1e-10;
  bool mmc_infill_zero = true;  // every MMC entry of dV_in is exactly zero
  bool passed() const;
  std::size_t failures() const;
};

/// Central differences of C, V and V_in at x +- step*fd_scale(i)*e_i for
/// each variable in subset (all variables when empty), compared against the
/// analytic gradients. Entries with |grad| <= 1e-12*||grad||_inf are held to
/// abs_tol, the rest to rel_tol. A failing entry is retried with the step
/// divided by 3, up to `refinements` times; FdEntry::step is the last step used.
FdReport finite_difference_check(Evaluator& ev, std::span<const double> x, double step = 1e-5,
                                 std::span<const std::size_t> subset = {},
                                 double rel_tol = 1e-3, double abs_tol = 1e-10,
                                 int refinements = 2);

FdReport finite_difference_check(const ProblemConfig& cfg, std::span<const double> x,
                                 double step = 1e-5, std::span<const std::size_t> subset = {});

}  // namespace shellfill
