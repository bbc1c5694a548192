#include "shellfill/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "shellfill/detail/kernels.hpp"
#include "shellfill/detail/spline.hpp"

namespace shellfill {

namespace {

template <class R>
struct StructureFields {
  std::vector<R> phi_s, phi0, phi0_ext, phi_gs, phi1;
};

template <class R>
std::vector<R> lattice_field(const LatticeSpec& lat, const Grid& grid,
                             const AggregationParams& agg) {
  std::vector<R> out(static_cast<std::size_t>(grid.node_count()));
  std::vector<R> per_comp, vals;
  std::vector<detail::CellValue<R>> cells;
  for (int n = 0; n < grid.node_count(); ++n)
    out[n] = detail::lattice_value<R>(grid.node_point(n), lat, agg, per_comp, cells, vals);
  return out;
}

template <class R>
std::vector<R> void_field(const VoidCurve& cv, const RadiusTable& table, const Grid& grid) {
  std::vector<R> out(static_cast<std::size_t>(grid.node_count()));
  for (int n = 0; n < grid.node_count(); ++n)
    out[n] = detail::void_value<R>(grid.node_point(n), cv, table);
  return out;
}

/// Shell-graded-infill composition from the lattice field and the per-void
/// fields of the original and expanded curves.
template <class R>
StructureFields<R> compose(std::vector<R> gs, const std::vector<std::vector<R>>& vo,
                           const std::vector<std::vector<R>>& ve, const AggregationParams& agg) {
  const std::size_t nn = gs.size(), nv = vo.size();
  StructureFields<R> f;
  for (auto* v : {&f.phi_s, &f.phi0, &f.phi0_ext, &f.phi1}) v->resize(nn);
  std::vector<R> a(nv), b(nv);
  const R lp = agg.l_plus, lm = agg.l_minus;
  for (std::size_t n = 0; n < nn; ++n) {
    for (std::size_t j = 0; j < nv; ++j) {
      a[j] = vo[j][n];
      b[j] = ve[j][n];
    }
    const R p0 = detail::ks_aggregate(a.data(), nv, lm);
    const R pe = detail::ks_aggregate(b.data(), nv, lm);
    const R p1 = detail::ks2(-pe, gs[n], lp);
    f.phi0[n] = p0;
    f.phi0_ext[n] = pe;
    f.phi1[n] = p1;
    f.phi_s[n] = detail::ks2(p0, p1, lm);
  }
  f.phi_gs = std::move(gs);
  return f;
}

template <class R>
StructureFields<R> sample_structure(const LatticeSpec& lat, const ShellSpec& shell,
                                    const std::vector<VoidCurve>& expanded,
                                    const ShellTables& tables, const Grid& grid,
                                    const AggregationParams& agg) {
  std::vector<std::vector<R>> vo, ve;
  for (std::size_t j = 0; j < shell.voids.size(); ++j) {
    vo.push_back(void_field<R>(shell.voids[j], tables.original[j], grid));
    ve.push_back(void_field<R>(expanded[j], tables.expanded[j], grid));
  }
  return compose(lattice_field<R>(lat, grid, agg), vo, ve, agg);
}

}  // namespace

ChainContext::ChainContext(const DesignLayout& lay, std::span<const double> x, const Grid& g,
                           const AggregationParams& a, int samples_per_control)
    : layout(&lay),
      tag(design_tag(x)),
      grid(g),
      agg(a),
      lattice(lay.lattice(x)),
      shell(lay.shell(x)),
      expanded(shell.expanded()),
      tables(build_shell_tables(shell, samples_per_control)) {
  auto f = sample_structure<double>(lattice, shell, expanded, tables, grid, agg);
  phi_s.values = std::move(f.phi_s);
  phi0.values = std::move(f.phi0);
  phi0_ext.values = std::move(f.phi0_ext);
  phi_gs.values = std::move(f.phi_gs);
  phi1.values = std::move(f.phi1);
}

void mmc_node_partials(const ChainContext& ctx, int node, std::span<double> out) {
  const DesignLayout& lay = *ctx.layout;
  const LatticeSpec& lat = ctx.lattice;
  const Point p = ctx.grid.node_point(node);
  const double lp = ctx.agg.l_plus;

  const double outer = ks_weight(ctx.phi1.values[node], ctx.phi_s.values[node], ctx.agg.l_minus) *
                       ks_weight(ctx.phi_gs.values[node], ctx.phi1.values[node], lp);
  if (outer == 0.0) return;

  // Perturbed points and CPF basis values per perturbation function.
  const std::size_t ncpf = lat.cpfs.size();
  std::vector<Point> pt(ncpf);
  std::vector<std::vector<double>> bx(ncpf), by(ncpf);
  for (std::size_t c = 0; c < ncpf; ++c) {
    const auto& cpf = lat.cpfs[c];
    const int n1 = static_cast<int>(cpf.alpha.size()), n2 = static_cast<int>(cpf.beta.size());
    bx[c].resize(2 * n1);
    by[c].resize(2 * n2);
    cpf_basis(p.x, cpf.length, n1, bx[c]);
    cpf_basis(p.y, cpf.height, n2, by[c]);
    pt[c] = perturb_point(p, cpf);
  }

  const std::size_t nc = lat.prototype.size();
  std::vector<std::vector<detail::CellValue<double>>> cells(nc);
  std::vector<double> phik(nc), vals;
  for (std::size_t k = 0; k < nc; ++k) {
    const auto& pc = lat.prototype[k];
    const Point q = pt[static_cast<std::size_t>(pc.cpf_index)];
    detail::near_cell_values<double>(q.x, q.y, lat, pc.geom, lp, cells[k]);
    vals.clear();
    for (const auto& cv : cells[k]) vals.push_back(cv.value);
    phik[k] = ks_aggregate(vals, lp);
  }
  const double gs = ks_aggregate(phik, lp);

  for (std::size_t k = 0; k < nc; ++k) {
    const auto& pc = lat.prototype[k];
    const double wk = ks_weight(phik[k], gs, lp);
    if (wk == 0.0) continue;
    const std::size_t c = static_cast<std::size_t>(pc.cpf_index);
    double da = 0.0, dth = 0.0, dt1 = 0.0, dt2 = 0.0, dpx = 0.0, dpy = 0.0;
    for (const auto& cv : cells[k]) {
      const double wl = ks_weight(cv.value, phik[k], lp);
      if (wl == 0.0) continue;
      ComponentParams inst = pc.geom;
      inst.center = cell_center(lat, pc.geom, cv.cell);
      const ComponentTdfGrad g = component_tdf_grad(pt[c], inst);
      da += wl * g.d_half_length;
      dth += wl * g.d_angle;
      dt1 += wl * g.d_t1;
      dt2 += wl * g.d_t2;
      dpx += wl * g.d_px;
      dpy += wl * g.d_py;
    }
    const double f = outer * wk;
    const int off = lay.component_offset(static_cast<int>(k));
    out[off + 0] += f * da;
    out[off + 1] += f * dth;
    out[off + 2] += f * dt1;
    out[off + 3] += f * dt2;
    if (lay.has_centers()) {
      // Instance centers move with the prototype center.
      out[off + 4] -= f * dpx;
      out[off + 5] -= f * dpy;
    }
    const int coff = lay.cpf_offset(static_cast<int>(c));
    if (coff < 0) continue;
    const std::size_t nbx = bx[c].size();
    for (std::size_t i = 0; i < nbx; ++i) out[coff + i] += f * dpx * bx[c][i];
    for (std::size_t i = 0; i < by[c].size(); ++i) out[coff + nbx + i] += f * dpy * by[c][i];
  }
}

void mmv_node_partials(const ChainContext& ctx, int node, std::span<double> d_phi_s,
                       std::span<double> d_phi0_ext) {
  const DesignLayout& lay = *ctx.layout;
  const Point p = ctx.grid.node_point(node);
  const double lm = ctx.agg.l_minus, lp = ctx.agg.l_plus;
  const double ps = ctx.phi_s.values[node], p0 = ctx.phi0.values[node];
  const double pe = ctx.phi0_ext.values[node], p1 = ctx.phi1.values[node];

  const double w_orig = ks_weight(p0, ps, lm);
  const double w_ext = ks_weight(p1, ps, lm) * ks_weight(-pe, p1, lp);

  for (std::size_t j = 0; j < ctx.shell.voids.size(); ++j) {
    const int off = lay.void_offset(static_cast<int>(j));
    const VoidTdfGrad go = void_tdf_grad(p, ctx.shell.voids[j], ctx.tables.original[j]);
    const VoidTdfGrad ge = void_tdf_grad(p, ctx.expanded[j], ctx.tables.expanded[j]);
    const double wo = ks_weight(go.value, p0, lm);
    const double we = ks_weight(ge.value, pe, lm);
    const double so = w_orig * wo, se = w_ext * we;
    d_phi_s[off] += so * go.d_cx - se * ge.d_cx;
    d_phi_s[off + 1] += so * go.d_cy - se * ge.d_cy;
    d_phi0_ext[off] += we * ge.d_cx;
    d_phi0_ext[off + 1] += we * ge.d_cy;
    for (std::size_t k = 0; k < go.d_radii.size(); ++k) {
      d_phi_s[off + 2 + k] += so * go.d_radii[k] - se * ge.d_radii[k];
      d_phi0_ext[off + 2 + k] += we * ge.d_radii[k];
    }
  }
}

double mmc_node_partial(const ChainContext& ctx, int node, std::size_t var) {
  if (var >= ctx.layout->size() || !ctx.layout->info(var).is_mmc())
    throw SensitivityError("mmc_node_partial: variable " + std::to_string(var) +
                           " is not a component or CPF variable");
  std::vector<double> out(ctx.layout->size(), 0.0);
  mmc_node_partials(ctx, node, out);
  return out[var];
}

MmvPartial mmv_node_partial(const ChainContext& ctx, int node, std::size_t var) {
  if (var >= ctx.layout->size() || ctx.layout->info(var).is_mmc())
    throw SensitivityError("mmv_node_partial: variable " + std::to_string(var) +
                           " is not a void variable");
  std::vector<double> s(ctx.layout->size(), 0.0), e(ctx.layout->size(), 0.0);
  mmv_node_partials(ctx, node, s, e);
  return {s[var], e[var]};
}

namespace {

/// sum_n ws[i][n] * d(phi_s)_n for each weight set i, and sum_n we[n] * d(phi0_ext)_n.
void accumulate(const ChainContext& ctx, const std::vector<const std::vector<double>*>& ws,
                const std::vector<double>* we, std::vector<std::vector<double>>& out_s,
                std::vector<double>& out_e) {
  const std::size_t nv = ctx.layout->size();
  out_s.assign(ws.size(), std::vector<double>(nv, 0.0));
  out_e.assign(nv, 0.0);
  std::vector<double> ds(nv), de(nv);
  for (int n = 0; n < ctx.grid.node_count(); ++n) {
    bool any_s = false;
    for (const auto* w : ws) any_s = any_s || (*w)[n] != 0.0;
    const bool any_e = we && (*we)[n] != 0.0;
    if (!any_s && !any_e) continue;
    std::fill(ds.begin(), ds.end(), 0.0);
    std::fill(de.begin(), de.end(), 0.0);
    if (any_s) mmc_node_partials(ctx, n, ds);
    mmv_node_partials(ctx, n, ds, de);
    for (std::size_t i = 0; i < ws.size(); ++i) {
      const double w = (*ws[i])[n];
      if (w == 0.0) continue;
      for (std::size_t v = 0; v < nv; ++v) out_s[i][v] += w * ds[v];
    }
    if (any_e) {
      const double w = (*we)[n];
      for (std::size_t v = 0; v < nv; ++v) out_e[v] += w * de[v];
    }
  }
}

std::vector<double> compliance_node_weights(const ChainContext& ctx, const SolveResult& solve,
                                            const ElementMatrix& ke,
                                            std::span<const LoadCase> loads,
                                            const HeavisideParams& hp) {
  if (solve.design_tag != ctx.tag)
    throw SensitivityError("compliance gradient requested with a solve of a different design");
  if (solve.displacements.size() != loads.size())
    throw SensitivityError("solve result and load cases disagree in count");
  const Grid& g = ctx.grid;
  std::vector<double> energy(static_cast<std::size_t>(g.element_count()), 0.0);
  for (std::size_t c = 0; c < loads.size(); ++c) {
    const auto e = element_energies(g, ke, solve.displacements[c]);
    for (std::size_t i = 0; i < e.size(); ++i) energy[i] += loads[c].weight * e[i];
  }
  std::vector<double> node_energy(static_cast<std::size_t>(g.node_count()), 0.0);
  for (int e = 0; e < g.element_count(); ++e)
    for (int n : g.element_nodes(e)) node_energy[n] += energy[e];

  std::vector<double> w(node_energy.size(), 0.0);
  for (std::size_t n = 0; n < w.size(); ++n) {
    const double phi = ctx.phi_s.values[n];
    const double dh = heaviside_derivative(phi, hp);
    if (dh == 0.0) continue;
    const double h = regularized_heaviside(phi, hp);
    // dC/d(rho_e) = -E_e, d(rho_e)/d(phi_n) = (q/4) H^(q-1) H'
    w[n] = -node_energy[n] * 0.25 * hp.penal * std::pow(h, hp.penal - 1.0) * dh;
  }
  return w;
}

std::vector<double> volume_node_weights(const NodalField& f, const Grid& g,
                                        const HeavisideParams& hp) {
  const auto val = node_valence(g);
  std::vector<double> w(f.values.size(), 0.0);
  for (std::size_t n = 0; n < w.size(); ++n)
    w[n] = 0.25 * g.element_area() * val[n] * heaviside_derivative(f.values[n], hp);
  return w;
}

}  // namespace

std::vector<double> compliance_gradient(const ChainContext& ctx, const SolveResult& solve,
                                        const ElementMatrix& ke, std::span<const LoadCase> loads,
                                        const HeavisideParams& hp) {
  const auto w = compliance_node_weights(ctx, solve, ke, loads, hp);
  std::vector<std::vector<double>> out;
  std::vector<double> unused;
  accumulate(ctx, {&w}, nullptr, out, unused);
  return out[0];
}

VolumeGradients volume_gradients(const ChainContext& ctx, const HeavisideParams& hp) {
  const auto ws = volume_node_weights(ctx.phi_s, ctx.grid, hp);
  const auto we = volume_node_weights(ctx.phi0_ext, ctx.grid, hp);
  std::vector<std::vector<double>> out;
  VolumeGradients vg;
  accumulate(ctx, {&ws}, &we, out, vg.d_infill);
  vg.d_volume = std::move(out[0]);
  return vg;
}

// ---------------------------------------------------------------------------

Evaluator::Evaluator(const ProblemConfig& cfg)
    : cfg_(cfg),
      layout_(cfg),
      grid_(cfg.grid()),
      hp_(cfg.heaviside_params()),
      ke_(q4_unit_stiffness(cfg.material, grid_.dx, grid_.dy)),
      loads_(cfg.load_cases()),
      solver_(grid_, cfg.boundary_conditions()) {}

ChainContext Evaluator::context(std::span<const double> x) const {
  if (x.size() != layout_.size())
    throw SensitivityError("design vector has " + std::to_string(x.size()) + " entries, layout " +
                           std::to_string(layout_.size()));
  return ChainContext(layout_, x, grid_, cfg_.ks, cfg_.shell.samples_per_control);
}

Evaluation Evaluator::evaluate(std::span<const double> x, bool with_gradients) {
  const ChainContext ctx = context(x);
  Evaluation ev;
  ev.tag = ctx.tag;
  ev.densities = element_densities(ctx.phi_s, grid_, hp_);
  ev.solve = solver_.solve(ev.densities, ke_, loads_);
  ev.solve.design_tag = ctx.tag;
  ev.compliance = ev.solve.aggregate;
  ev.volume = volume_measure(ctx.phi_s, grid_, hp_);
  ev.infill_volume = volume_measure(ctx.phi0_ext, grid_, hp_);
  if (with_gradients) {
    const auto wc = compliance_node_weights(ctx, ev.solve, ke_, loads_, hp_);
    const auto wv = volume_node_weights(ctx.phi_s, grid_, hp_);
    const auto we = volume_node_weights(ctx.phi0_ext, grid_, hp_);
    std::vector<std::vector<double>> out;
    accumulate(ctx, {&wc, &wv}, &we, out, ev.d_infill);
    ev.d_compliance = std::move(out[0]);
    ev.d_volume = std::move(out[1]);
  }
  ev.phi_s = ctx.phi_s;
  ev.phi0_ext = ctx.phi0_ext;
  return ev;
}

// ---------------------------------------------------------------------------

bool FdReport::passed() const { return mmc_infill_zero && failures() == 0; }

std::size_t FdReport::failures() const {
  std::size_t n = 0;
  for (const auto& e : entries)
    for (bool p : e.pass) n += p ? 0 : 1;
  return n;
}

namespace {

/// C, V and V_in of one design with every stage after the parameter mapping
/// carried in long double. The lattice and per-void fields of a reference
/// design are kept; a perturbation of one variable recomputes only the
/// field it enters.
class ExtendedForward {
 public:
  ExtendedForward(const Evaluator& ev, std::span<const double> x)
      : ev_(ev),
        solver_(ev.grid(), ev.config().boundary_conditions()),
        ke_(q4_unit_stiffness(ev.config().material, ev.grid().dx, ev.grid().dy)) {
    const DesignLayout& lay = ev.layout();
    const ShellSpec shell = lay.shell(x);
    const auto ext = shell.expanded();
    const ShellTables tables = build_shell_tables(shell, ev.config().shell.samples_per_control);
    gs_ = lattice_field<long double>(lay.lattice(x), ev.grid(), ev.config().ks);
    for (std::size_t j = 0; j < shell.voids.size(); ++j) {
      vo_.push_back(void_field<long double>(shell.voids[j], tables.original[j], ev.grid()));
      ve_.push_back(void_field<long double>(ext[j], tables.expanded[j], ev.grid()));
    }
  }

  /// x differs from the reference design in entry `var` only.
  std::array<long double, 3> operator()(std::span<const double> x, std::size_t var) {
    const DesignLayout& lay = ev_.layout();
    const Grid& g = ev_.grid();
    const AggregationParams& agg = ev_.config().ks;
    const VarInfo info = lay.info(var);
    StructureFields<long double> f;
    if (info.is_mmc()) {
      f = compose(lattice_field<long double>(lay.lattice(x), g, agg), vo_, ve_, agg);
    } else {
      const std::size_t j = static_cast<std::size_t>(info.owner);
      const ShellSpec shell = lay.shell(x);
      const VoidCurve ext = shell.expanded()[j];
      const int ns = ev_.config().shell.samples_per_control * shell.voids[j].control_count();
      const RadiusTable to(shell.voids[j], ns, static_cast<int>(j));
      const RadiusTable te(ext, ns, static_cast<int>(j));
      auto vo = vo_, ve = ve_;
      vo[j] = void_field<long double>(shell.voids[j], to, g);
      ve[j] = void_field<long double>(ext, te, g);
      f = compose(gs_, vo, ve, agg);
    }
    return measures(f);
  }

 private:
  std::array<long double, 3> measures(const StructureFields<long double>& f) {
    const Grid& g = ev_.grid();
    const HeavisideParams& hp = ev_.heaviside();
    const std::size_t nn = f.phi_s.size();
    std::vector<long double> hs(nn), he(nn);
    for (std::size_t n = 0; n < nn; ++n) {
      hs[n] = detail::heaviside<long double>(f.phi_s[n], hp);
      he[n] = detail::heaviside<long double>(f.phi0_ext[n], hp);
    }
    std::vector<long double> dens(static_cast<std::size_t>(g.element_count()));
    long double vs = 0, ve = 0;
    const long double q = hp.penal;
    for (int e = 0; e < g.element_count(); ++e) {
      long double r = 0;
      for (int n : g.element_nodes(e)) {
        r += std::pow(hs[n], q);
        vs += hs[n];
        ve += he[n];
      }
      dens[e] = r / 4;
    }
    const long double area = g.element_area();
    const long double c = solver_.solve(dens, ke_, ev_.loads());
    return {c, area * vs / 4, area * ve / 4};
  }

  const Evaluator& ev_;
  ExtendedElasticSolver solver_;
  ElementMatrix ke_;
  std::vector<long double> gs_;
  std::vector<std::vector<long double>> vo_, ve_;
};

}  // namespace

FdReport finite_difference_check(Evaluator& ev, std::span<const double> x, double step,
                                 std::span<const std::size_t> subset, double rel_tol,
                                 double abs_tol, int refinements) {
  const DesignLayout& lay = ev.layout();
  const Evaluation base = ev.evaluate(x, true);
  FdReport rep;
  rep.rel_tol = rel_tol;
  rep.abs_tol = abs_tol;
  const std::vector<double>* grads[3] = {&base.d_compliance, &base.d_volume, &base.d_infill};
  for (int q = 0; q < 3; ++q)
    for (double g : *grads[q]) rep.grad_norm_inf[q] = std::max(rep.grad_norm_inf[q], std::abs(g));
  for (std::size_t i = 0; i < lay.size(); ++i)
    if (lay.info(i).is_mmc() && base.d_infill[i] != 0.0) rep.mmc_infill_zero = false;

  std::vector<std::size_t> vars(subset.begin(), subset.end());
  if (vars.empty())
    for (std::size_t i = 0; i < lay.size(); ++i) vars.push_back(i);

  ExtendedForward forward(ev, x);
  std::vector<double> xp(x.begin(), x.end());
  for (std::size_t i : vars) {
    FdEntry e;
    double h = step * lay.fd_scale(i, x);
    for (int attempt = 0; attempt <= refinements; ++attempt, h /= 3.0) {
      const double hi = x[i] + h, lo = x[i] - h;
      xp[i] = hi;
      const auto fp = forward(xp, i);
      xp[i] = lo;
      const auto fm = forward(xp, i);
      xp[i] = x[i];
      FdEntry t;
      t.var = i;
      t.step = 0.5 * (hi - lo);
      for (int q = 0; q < 3; ++q) {
        t.analytic[q] = (*grads[q])[i];
        t.numeric[q] = static_cast<double>((fp[q] - fm[q]) / (static_cast<long double>(hi) - lo));
        const double diff = std::abs(t.analytic[q] - t.numeric[q]);
        if (std::abs(t.analytic[q]) <= 1e-12 * rep.grad_norm_inf[q]) {
          t.error[q] = diff;
          t.pass[q] = diff < abs_tol;
        } else {
          t.error[q] = diff / std::abs(t.analytic[q]);
          t.pass[q] = t.error[q] < rel_tol;
        }
      }
      e = t;
      if (t.pass[0] && t.pass[1] && t.pass[2]) break;
    }
    rep.entries.push_back(e);
  }
  return rep;
}

FdReport finite_difference_check(const ProblemConfig& cfg, std::span<const double> x,
                                 double step, std::span<const std::size_t> subset) {
  Evaluator ev(cfg);
  return finite_difference_check(ev, x, step, subset);
}

}  // namespace shellfill
