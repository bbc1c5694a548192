#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace shellfill {

class MmaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MmaSettings {
  double move_limit = 0.1;   // fraction of (ub - lb) per iteration
  double asy_init = 0.5;
  double asy_incr = 1.2;
  double asy_decr = 0.7;
  double subproblem_tol = 1e-10;
  double c = 1000.0;         // penalty on the elastic constraint slacks
  double d = 1.0;
};

struct MmaStep {
  std::vector<double> x;
  bool restoration = false;  // the objective was dropped for this step
  double max_slack = 0.0;    // largest elastic slack y_i of the accepted subproblem
};

/// Asymptotes and iterate history. Everything is stored in normalized
/// variables (x - lb) / (ub - lb).
class MMAState {
 public:
  MMAState(std::vector<double> lower, std::vector<double> upper, MmaSettings settings = {});

  std::size_t size() const { return lower_.size(); }
  int iteration() const { return iter_; }
  const std::vector<double>& lower_bounds() const { return lower_; }
  const std::vector<double>& upper_bounds() const { return upper_; }
  const MmaSettings& settings() const { return settings_; }
  /// Current asymptotes in design units.
  std::vector<double> low_asymptotes() const;
  std::vector<double> upp_asymptotes() const;

 private:
  friend MmaStep mma_update(MMAState&, std::span<const double>, double, std::span<const double>,
                            std::span<const double>, std::span<const std::vector<double>>);

  std::vector<double> lower_, upper_;
  MmaSettings settings_;
  int iter_ = 0;
  std::vector<double> low_, upp_, xold1_, xold2_;
};

/// One MMA iteration for min f0 s.t. g_i <= 0 inside the box bounds.
/// `g` holds the constraint values and `dg` their gradients. When the
/// subproblem cannot meet the linearized constraints (positive slack) or
/// fails to converge, a constraint-only step is taken instead and flagged.
MmaStep mma_update(MMAState& state, std::span<const double> x, double f0,
                   std::span<const double> df0, std::span<const double> g,
                   std::span<const std::vector<double>> dg);

/// max_i |x_i - prev_i| / (|x_i| + 1e-3 (ub_i - lb_i)).
double max_relative_change(std::span<const double> x, std::span<const double> prev,
                           std::span<const double> lower, std::span<const double> upper);

/// True once iter >= min_iters and the relative change is below threshold,
/// or unconditionally at iter >= max_iters.
bool converged(double max_rel_change, int iter, double threshold, int min_iters, int max_iters);

}  // namespace shellfill
