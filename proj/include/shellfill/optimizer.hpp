#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shellfill/design.hpp"
#include "shellfill/mma.hpp"
#include "shellfill/problem_config.hpp"
#include "shellfill/sensitivity.hpp"

namespace shellfill {

struct IterationRecord {
  int iter = 0;
  double compliance = 0.0;
  double volume_fraction = 0.0;         // V / V_D
  double infill_volume_fraction = 0.0;  // V_in / V_D
  double max_rel_change = 0.0;          // against the previous iterate; 0 for the start
  bool restoration = false;             // the step that produced this iterate
};

/// Raised when an analysis or update fails inside the loop.
class OptimizationError : public std::runtime_error {
 public:
  OptimizationError(const std::string& what, int iteration, DesignVector design)
      : std::runtime_error(what), iteration_(iteration), design_(std::move(design)) {}
  int iteration() const { return iteration_; }
  const DesignVector& design() const { return design_; }

 private:
  int iteration_;
  DesignVector design_;
};

struct RunOptions {
  int max_iters = -1;                   // overrides the config when >= 0
  DesignVector start;                   // layout initial design when empty
  std::function<void(const IterationRecord&)> on_iteration;
};

struct RunResult {
  DesignVector design;
  std::vector<IterationRecord> history;
  Evaluation final;                     // analysis of `design`
  LatticeSpec lattice;
  ShellSpec shell;
  bool converged = false;               // false when stopped by the iteration cap
};

/// Constraint values g_i <= 0 of a design: V/V_bar - 1 and, when the infill
/// constraint is on, 1 - V_in/V_lower.
std::vector<double> constraint_values(const ProblemConfig& cfg, const Evaluation& ev);

/// MMA loop. Iterate k is analyzed, recorded and tested for convergence
/// before the update to k + 1. Convergence also needs the constraints to
/// hold within 1%, except at the iteration cap. Throws OptimizationError.
RunResult run(const ProblemConfig& cfg, const RunOptions& options = {});

/// Same design analyzed with nx and ny multiplied by `factor`.
Evaluation reanalyze(const ProblemConfig& cfg, std::span<const double> design, int factor);

}  // namespace shellfill
