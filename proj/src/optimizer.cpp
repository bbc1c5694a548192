#include "shellfill/optimizer.hpp"

#include <algorithm>
#include <cmath>

namespace shellfill {

namespace {

constexpr double kFeasibilitySlack = 0.01;

bool all_finite(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::vector<double> constraint_values(const ProblemConfig& cfg, const Evaluation& ev) {
  const double vd = cfg.domain_area();
  std::vector<double> g{ev.volume / (cfg.constraints.v_bar * vd) - 1.0};
  if (cfg.constraints.infill_constraint)
    g.push_back(1.0 - ev.infill_volume / (cfg.constraints.v_lower * vd));
  return g;
}

RunResult run(const ProblemConfig& cfg, const RunOptions& options) {
  cfg.validate();
  Evaluator evaluator(cfg);
  const DesignLayout& lay = evaluator.layout();
  const int max_iters = options.max_iters >= 0 ? options.max_iters : cfg.mma.max_iters;
  const double vd = cfg.domain_area();
  const double v_bar = cfg.constraints.v_bar * vd;
  const double v_lower = cfg.constraints.v_lower * vd;

  MmaSettings ms;
  ms.move_limit = cfg.mma.move_limit;
  ms.asy_init = cfg.mma.asy_init;
  ms.asy_incr = cfg.mma.asy_incr;
  ms.asy_decr = cfg.mma.asy_decr;
  const auto lo = lay.lower(), hi = lay.upper();
  MMAState state({lo.begin(), lo.end()}, {hi.begin(), hi.end()}, ms);

  DesignVector x = options.start.empty() ? lay.initial() : options.start;
  if (x.size() != lay.size())
    throw OptimizationError("start design has the wrong length", 0, x);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lay.lower()[i], lay.upper()[i]);

  RunResult out;
  DesignVector prev;
  double v_start = 0.0, vin_start = 0.0;
  double scale = 0.0;
  bool restored = false;
  for (int k = 0;; ++k) {
    Evaluation ev;
    try {
      ev = evaluator.evaluate(x, true);
    } catch (const std::exception& e) {
      throw OptimizationError(std::string("analysis failed: ") + e.what(), k, x);
    }
    if (!std::isfinite(ev.compliance) || !all_finite(ev.d_compliance) ||
        !all_finite(ev.d_volume) || !all_finite(ev.d_infill))
      throw OptimizationError("non-finite objective or gradient", k, x);

    IterationRecord rec;
    rec.iter = k;
    rec.compliance = ev.compliance;
    rec.volume_fraction = ev.volume / vd;
    rec.infill_volume_fraction = ev.infill_volume / vd;
    rec.max_rel_change = prev.empty() ? 0.0 : max_relative_change(x, prev, lay.lower(), lay.upper());
    rec.restoration = restored;
    out.history.push_back(rec);
    if (options.on_iteration) options.on_iteration(rec);

    std::vector<double> g = constraint_values(cfg, ev);
    const bool feasible = std::all_of(g.begin(), g.end(), [](double v) { return v <= kFeasibilitySlack; });
    const bool done = k >= max_iters ||
                      (k > 0 && feasible &&
                       converged(rec.max_rel_change, k, cfg.mma.tolerance, cfg.mma.min_iters, max_iters));
    if (done) {
      out.converged = k < max_iters || (feasible && rec.max_rel_change < cfg.mma.tolerance);
      out.design = x;
      out.lattice = lay.lattice(x);
      out.shell = lay.shell(x);
      out.final = std::move(ev);
      return out;
    }

    // Objective scaled by its starting value so that the slack penalty dominates.
    if (scale == 0.0) scale = ev.compliance > 0.0 ? 1.0 / ev.compliance : 1.0;
    std::vector<double> df0(ev.d_compliance);
    for (double& v : df0) v *= scale;

    // Bounds violated by the start design move linearly to their targets.
    if (k == 0) {
      v_start = ev.volume;
      vin_start = ev.infill_volume;
    }
    const int ramp = cfg.mma.bound_ramp;
    const double w = ramp > 0 ? std::max(0.0, 1.0 - static_cast<double>(k + 1) / ramp) : 0.0;
    const double vb = v_bar + w * std::max(0.0, v_start - v_bar);
    const double vl = v_lower - w * std::max(0.0, v_lower - vin_start);
    g[0] = ev.volume / vb - 1.0;
    std::vector<std::vector<double>> dg{ev.d_volume};
    for (double& v : dg[0]) v /= vb;
    if (cfg.constraints.infill_constraint) {
      g[1] = 1.0 - ev.infill_volume / vl;
      dg.push_back(ev.d_infill);
      for (double& v : dg[1]) v = -v / vl;
    }
    MmaStep step;
    try {
      step = mma_update(state, x, ev.compliance * scale, df0, g, dg);
    } catch (const std::exception& e) {
      throw OptimizationError(std::string("design update failed: ") + e.what(), k, x);
    }
    prev = x;
    x = std::move(step.x);
    restored = step.restoration;
  }
}

Evaluation reanalyze(const ProblemConfig& cfg, std::span<const double> design, int factor) {
  ProblemConfig fine = cfg;
  fine.nx *= factor;
  fine.ny *= factor;
  Evaluator ev(fine);
  return ev.evaluate(design, false);
}

}  // namespace shellfill
