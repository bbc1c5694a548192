#include "shellfill/mma.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace shellfill {

namespace {

using Vec = Eigen::ArrayXd;
using Mat = Eigen::MatrixXd;

struct Subproblem {
  int m = 0, n = 0;
  Vec low, upp, alfa, beta, p0, q0;
  Mat P, Q;  // m x n
  Vec b;
  double a0 = 1.0;
  Vec a, c, d;
};

struct SubSolution {
  Vec x, y;
  double z = 0.0;
  bool ok = true;
};

/// Primal-dual interior point method for the separable MMA subproblem
///   min  sum(p0/(u-x) + q0/(x-l)) + a0 z + sum(c y + d y^2 / 2)
///   s.t. sum(P/(u-x) + Q/(x-l)) - a z - y <= b,  alfa <= x <= beta, y, z >= 0.
SubSolution subsolv(const Subproblem& sp, double epsimin) {
  const int m = sp.m;
  Vec x = 0.5 * (sp.alfa + sp.beta);
  Vec y = Vec::Ones(m);
  double z = 1.0;
  Vec lam = Vec::Ones(m);
  Vec xsi = (1.0 / (x - sp.alfa)).max(1.0);
  Vec eta = (1.0 / (sp.beta - x)).max(1.0);
  Vec mu = (0.5 * sp.c).max(1.0);
  double zet = 1.0;
  Vec s = Vec::Ones(m);
  double epsi = 1.0;
  int total = 0;

  auto residual = [&](const Vec& x, const Vec& y, double z, const Vec& lam, const Vec& xsi,
                      const Vec& eta, const Vec& mu, double zet, const Vec& s, double& norm2,
                      double& maxabs) {
    const Vec ux1 = sp.upp - x, xl1 = x - sp.low;
    const Vec plam = sp.p0 + (sp.P.transpose() * lam.matrix()).array();
    const Vec qlam = sp.q0 + (sp.Q.transpose() * lam.matrix()).array();
    const Vec gvec = (sp.P * (1.0 / ux1).matrix() + sp.Q * (1.0 / xl1).matrix()).array();
    const Vec rex = plam / (ux1 * ux1) - qlam / (xl1 * xl1) - xsi + eta;
    const Vec rey = sp.c + sp.d * y - mu - lam;
    const double rez = sp.a0 - zet - (sp.a * lam).sum();
    const Vec relam = gvec - sp.a * z - y + s - sp.b;
    const Vec rexsi = xsi * (x - sp.alfa) - epsi;
    const Vec reeta = eta * (sp.beta - x) - epsi;
    const Vec remu = mu * y - epsi;
    const double rezet = zet * z - epsi;
    const Vec res = lam * s - epsi;
    norm2 = rex.square().sum() + rey.square().sum() + rez * rez + relam.square().sum() +
            rexsi.square().sum() + reeta.square().sum() + remu.square().sum() + rezet * rezet +
            res.square().sum();
    maxabs = std::max({rex.abs().maxCoeff(), std::abs(rez), rexsi.abs().maxCoeff(),
                       reeta.abs().maxCoeff(), std::abs(rezet)});
    if (m > 0)
      maxabs = std::max({maxabs, rey.abs().maxCoeff(), relam.abs().maxCoeff(),
                         remu.abs().maxCoeff(), res.abs().maxCoeff()});
  };

  while (epsi > epsimin) {
    double resnorm2 = 0.0, resmax = 0.0;
    residual(x, y, z, lam, xsi, eta, mu, zet, s, resnorm2, resmax);
    double resnorm = std::sqrt(resnorm2);
    for (int it = 0; it < 200 && resmax > 0.9 * epsi; ++it) {
      if (++total > 5000) return {x, y, z, false};
      const Vec ux1 = sp.upp - x, xl1 = x - sp.low;
      const Vec ux2 = ux1 * ux1, xl2 = xl1 * xl1;
      const Vec plam = sp.p0 + (sp.P.transpose() * lam.matrix()).array();
      const Vec qlam = sp.q0 + (sp.Q.transpose() * lam.matrix()).array();
      const Vec gvec = (sp.P * (1.0 / ux1).matrix() + sp.Q * (1.0 / xl1).matrix()).array();
      const Mat gg = sp.P * (1.0 / ux2).matrix().asDiagonal() -
                     sp.Q * (1.0 / xl2).matrix().asDiagonal();
      const Vec dpsidx = plam / ux2 - qlam / xl2;
      const Vec delx = dpsidx - epsi / (x - sp.alfa) + epsi / (sp.beta - x);
      const Vec dely = sp.c + sp.d * y - lam - epsi / y;
      const double delz = sp.a0 - (sp.a * lam).sum() - epsi / z;
      const Vec dellam = gvec - sp.a * z - y - sp.b + epsi / lam;
      const Vec diagx =
          2.0 * (plam / (ux2 * ux1) + qlam / (xl2 * xl1)) + xsi / (x - sp.alfa) + eta / (sp.beta - x);
      const Vec diagy = sp.d + mu / y;
      const Vec diaglamyi = s / lam + 1.0 / diagy;

      // Reduced (m+1) x (m+1) system in (dlam, dz).
      Mat aa(m + 1, m + 1);
      aa.topLeftCorner(m, m) =
          gg * (1.0 / diagx).matrix().asDiagonal() * gg.transpose();
      aa.topLeftCorner(m, m).diagonal() += diaglamyi.matrix();
      aa.topRightCorner(m, 1) = sp.a.matrix();
      aa.bottomLeftCorner(1, m) = sp.a.matrix().transpose();
      aa(m, m) = -zet / z;
      Eigen::VectorXd bb(m + 1);
      bb.head(m) = (dellam + dely / diagy).matrix() - gg * (delx / diagx).matrix();
      bb(m) = delz;
      const Eigen::VectorXd sol = aa.partialPivLu().solve(bb);
      const Vec dlam = sol.head(m).array();
      const double dz = sol(m);
      const Vec dx = -delx / diagx - (gg.transpose() * dlam.matrix()).array() / diagx;
      const Vec dy = -dely / diagy + dlam / diagy;
      const Vec dxsi = -xsi + epsi / (x - sp.alfa) - xsi * dx / (x - sp.alfa);
      const Vec deta = -eta + epsi / (sp.beta - x) + eta * dx / (sp.beta - x);
      const Vec dmu = -mu + epsi / y - mu * dy / y;
      const double dzet = -zet + epsi / z - zet * dz / z;
      const Vec ds = -s + epsi / lam - s * dlam / lam;
      if (!dx.allFinite() || !std::isfinite(dz) || !dlam.allFinite()) return {x, y, z, false};

      // Largest step keeping every positive quantity positive.
      double stm = 1.0;
      auto bound = [&](const Vec& v, const Vec& dv) {
        if (v.size() > 0) stm = std::max(stm, (-1.01 * dv / v).maxCoeff());
      };
      bound(y, dy);
      bound(lam, dlam);
      bound(xsi, dxsi);
      bound(eta, deta);
      bound(mu, dmu);
      bound(s, ds);
      stm = std::max({stm, -1.01 * dz / z, -1.01 * dzet / zet});
      stm = std::max(stm, (-1.01 * dx / (x - sp.alfa)).maxCoeff());
      stm = std::max(stm, (1.01 * dx / (sp.beta - x)).maxCoeff());
      double step = 1.0 / stm;

      const Vec x0 = x, y0 = y, lam0 = lam, xsi0 = xsi, eta0 = eta, mu0 = mu, s0 = s;
      const double z0 = z, zet0 = zet;
      double newnorm2 = 4.0 * resnorm2, newmax = resmax;
      for (int back = 0; back < 50 && std::sqrt(newnorm2) > resnorm; ++back) {
        x = x0 + step * dx;
        y = y0 + step * dy;
        z = z0 + step * dz;
        lam = lam0 + step * dlam;
        xsi = xsi0 + step * dxsi;
        eta = eta0 + step * deta;
        mu = mu0 + step * dmu;
        zet = zet0 + step * dzet;
        s = s0 + step * ds;
        residual(x, y, z, lam, xsi, eta, mu, zet, s, newnorm2, newmax);
        step *= 0.5;
      }
      resnorm = std::sqrt(newnorm2);
      resnorm2 = newnorm2;
      resmax = newmax;
      if (!std::isfinite(resnorm)) return {x, y, z, false};
    }
    epsi *= 0.1;
  }
  return {x, y, z, x.allFinite()};
}

}  // namespace

MMAState::MMAState(std::vector<double> lower, std::vector<double> upper, MmaSettings settings)
    : lower_(std::move(lower)), upper_(std::move(upper)), settings_(settings) {
  if (lower_.size() != upper_.size()) throw MmaError("bound vectors differ in length");
  for (std::size_t i = 0; i < lower_.size(); ++i)
    if (!(upper_[i] > lower_[i]))
      throw MmaError("variable " + std::to_string(i) + " has an empty bound interval");
  if (!(settings_.move_limit > 0.0 && settings_.move_limit <= 1.0))
    throw MmaError("move limit must lie in (0, 1]");
  if (!(settings_.asy_init > 0.0 && settings_.asy_decr > 0.0 && settings_.asy_decr < 1.0 &&
        settings_.asy_incr > 1.0))
    throw MmaError("asymptote factors out of range");
}

std::vector<double> MMAState::low_asymptotes() const {
  std::vector<double> out(low_.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = lower_[i] + low_[i] * (upper_[i] - lower_[i]);
  return out;
}

std::vector<double> MMAState::upp_asymptotes() const {
  std::vector<double> out(upp_.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = lower_[i] + upp_[i] * (upper_[i] - lower_[i]);
  return out;
}

MmaStep mma_update(MMAState& st, std::span<const double> xin, double f0,
                   std::span<const double> df0, std::span<const double> g,
                   std::span<const std::vector<double>> dg) {
  const int n = static_cast<int>(st.size());
  const int m = static_cast<int>(g.size());
  if (static_cast<int>(xin.size()) != n || static_cast<int>(df0.size()) != n)
    throw MmaError("design or gradient length does not match the bounds");
  if (static_cast<int>(dg.size()) != m) throw MmaError("constraint gradient count mismatch");
  if (!std::isfinite(f0)) throw MmaError("objective is not finite");
  for (int i = 0; i < m; ++i) {
    if (static_cast<int>(dg[i].size()) != n) throw MmaError("constraint gradient length mismatch");
    if (!std::isfinite(g[i])) throw MmaError("constraint value is not finite");
  }
  const MmaSettings& cfg = st.settings_;

  // Normalized design and gradients.
  Vec x(n), span(n), dfx(n);
  for (int j = 0; j < n; ++j) {
    span[j] = st.upper_[j] - st.lower_[j];
    x[j] = std::clamp((xin[j] - st.lower_[j]) / span[j], 0.0, 1.0);
    dfx[j] = df0[j] * span[j];
  }
  Mat dgx(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) dgx(i, j) = dg[i][j] * span[j];
  if (!dfx.allFinite() || !dgx.allFinite()) throw MmaError("gradient is not finite");

  ++st.iter_;
  Vec low(n), upp(n);
  if (st.iter_ <= 2) {
    low = x - cfg.asy_init;
    upp = x + cfg.asy_init;
  } else {
    for (int j = 0; j < n; ++j) {
      const double sign = (x[j] - st.xold1_[j]) * (st.xold1_[j] - st.xold2_[j]);
      const double f = sign > 0.0 ? cfg.asy_incr : sign < 0.0 ? cfg.asy_decr : 1.0;
      low[j] = x[j] - f * (st.xold1_[j] - st.low_[j]);
      upp[j] = x[j] + f * (st.upp_[j] - st.xold1_[j]);
      low[j] = std::clamp(low[j], x[j] - 10.0, x[j] - 1e-5);
      upp[j] = std::clamp(upp[j], x[j] + 1e-5, x[j] + 10.0);
    }
  }

  constexpr double kAlbefa = 0.1, kRaa0 = 1e-5;
  Subproblem sp;
  sp.m = m;
  sp.n = n;
  sp.low = low;
  sp.upp = upp;
  sp.alfa = (low + kAlbefa * (x - low)).max(x - cfg.move_limit).max(0.0);
  sp.beta = (upp - kAlbefa * (upp - x)).min(x + cfg.move_limit).min(1.0);
  const Vec ux2 = (upp - x).square(), xl2 = (x - low).square();
  auto split = [&](const Vec& grad, Vec& p, Vec& q) {
    p = grad.max(0.0);
    q = (-grad).max(0.0);
    const Vec pq = 0.001 * (p + q) + kRaa0;
    p = (p + pq) * ux2;
    q = (q + pq) * xl2;
  };
  sp.P.resize(m, n);
  sp.Q.resize(m, n);
  sp.b.resize(m);
  for (int i = 0; i < m; ++i) {
    Vec p, q;
    split(dgx.row(i).transpose().array(), p, q);
    sp.P.row(i) = p.matrix().transpose();
    sp.Q.row(i) = q.matrix().transpose();
    sp.b[i] = (p / (upp - x)).sum() + (q / (x - low)).sum() - g[i];
  }
  sp.a = Vec::Zero(m);
  sp.c = Vec::Constant(m, cfg.c);
  sp.d = Vec::Constant(m, cfg.d);

  constexpr double kSlackTol = 1e-6;
  MmaStep step;
  split(dfx, sp.p0, sp.q0);
  SubSolution sol = subsolv(sp, cfg.subproblem_tol);
  const bool infeasible = !sol.ok || (m > 0 && sol.y.maxCoeff() > kSlackTol);
  if (infeasible) {
    // Constraint-only restoration: same approximation with a flat objective.
    split(Vec::Zero(n), sp.p0, sp.q0);
    const SubSolution rest = subsolv(sp, cfg.subproblem_tol);
    if (!rest.ok && !sol.ok) throw MmaError("MMA subproblem failed to converge");
    if (rest.ok) sol = rest;
    step.restoration = true;
  }
  step.max_slack = m > 0 ? sol.y.maxCoeff() : 0.0;

  st.xold2_ = st.xold1_.empty() ? std::vector<double>(x.begin(), x.end()) : st.xold1_;
  st.xold1_.assign(x.begin(), x.end());
  st.low_.assign(low.begin(), low.end());
  st.upp_.assign(upp.begin(), upp.end());

  step.x.resize(n);
  for (int j = 0; j < n; ++j) {
    const double xn = std::clamp(sol.x[j], 0.0, 1.0);
    step.x[j] = std::clamp(st.lower_[j] + xn * span[j], st.lower_[j], st.upper_[j]);
  }
  return step;
}

double max_relative_change(std::span<const double> x, std::span<const double> prev,
                           std::span<const double> lower, std::span<const double> upper) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double floor = 1e-3 * (upper[i] - lower[i]);
    worst = std::max(worst, std::abs(x[i] - prev[i]) / (std::abs(x[i]) + floor));
  }
  return worst;
}

bool converged(double max_rel_change, int iter, double threshold, int min_iters, int max_iters) {
  if (iter >= max_iters) return true;
  return iter >= min_iters && max_rel_change < threshold;
}

}  // namespace shellfill
