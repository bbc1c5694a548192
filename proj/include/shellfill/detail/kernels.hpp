#pragma once

// Scalar-generic value kernels. The public double API wraps these; the
// finite-difference oracle instantiates them in extended precision.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "shellfill/field.hpp"
#include "shellfill/geometry.hpp"

namespace shellfill::detail {

/// Instances whose K-S term is below exp(-cutoff) of the leading one are
/// skipped; the cutoff tracks the precision of R.
template <class R>
double cell_cutoff_exponent() {
  return 4.0 - std::log(static_cast<double>(std::numeric_limits<R>::epsilon()));
}
inline constexpr double kTaperFloor = 1e-9;

template <class R>
R ipow(R x, int p) {
  R r = 1;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

template <class R>
R ks_aggregate(const R* v, std::size_t n, R l) {
  if (n == 0) throw std::invalid_argument("ks_aggregate: empty input");
  if (l == 0) throw std::invalid_argument("ks_aggregate: zero exponent");
  R lead = v[0];
  for (std::size_t i = 1; i < n; ++i) lead = (l > 0) ? std::max(lead, v[i]) : std::min(lead, v[i]);
  R sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += std::exp(l * (v[i] - lead));
  return lead + std::log(sum) / l;
}

template <class R>
R ks2(R a, R b, R l) {
  const R v[2] = {a, b};
  return ks_aggregate(v, 2, l);
}

/// Component TDF at a point given in the same scalar type.
template <class R>
R component_tdf(R px, R py, const ComponentParams& c) {
  const R cs = std::cos(R(c.angle)), sn = std::sin(R(c.angle));
  const R dx = px - R(c.center.x), dy = py - R(c.center.y);
  const R xl = cs * dx + sn * dy;
  const R yl = -sn * dx + cs * dy;
  const R a = c.half_length;
  R b = R(0.5) * (R(c.t1) + R(c.t2)) + (R(c.t2) - R(c.t1)) / (2 * a) * xl;
  const R floor = R(kTaperFloor) * a;
  if (b < floor) b = floor;
  const R s = ipow(xl / a, c.exponent) + ipow(yl / b, c.exponent);
  return 1 - std::pow(s, R(1) / R(c.exponent));
}

/// out[2r] = cos(r*u), out[2r+1] = sin(r*u), u = pi/extent*(s - extent/2).
template <class R>
void cpf_basis(R s, double extent, int terms, R* out) {
  const R u = std::numbers::pi_v<R> / R(extent) * (s - R(0.5) * R(extent));
  for (int r = 0; r < terms; ++r) {
    out[2 * r] = std::cos(R(r) * u);
    out[2 * r + 1] = std::sin(R(r) * u);
  }
}

template <class R>
void perturb(R x, R y, const CPFCoefficients& cpf, R& ox, R& oy) {
  const int n1 = static_cast<int>(cpf.alpha.size());
  const int n2 = static_cast<int>(cpf.beta.size());
  std::vector<R> bx(2 * n1), by(2 * n2);
  cpf_basis(x, cpf.length, n1, bx.data());
  cpf_basis(y, cpf.height, n2, by.data());
  R fx = 0, gy = 0;
  for (int r = 0; r < n1; ++r)
    fx += R(cpf.alpha[r][0]) * bx[2 * r] + R(cpf.alpha[r][1]) * bx[2 * r + 1];
  for (int t = 0; t < n2; ++t)
    gy += R(cpf.beta[t][0]) * by[2 * t] + R(cpf.beta[t][1]) * by[2 * t + 1];
  ox = x + fx;
  oy = y + gy;
}

template <class R>
struct CellValue {
  int cell;
  R value;
};

/// Component TDF values of every lattice instance that can come within
/// cutoff/l_plus of the maximum at the (already perturbed) point. Instances
/// outside the search radius satisfy phi <= max - cutoff/l_plus because
/// s^(1/p) >= max(|x'|/a, |y'|/b).
template <class R>
void near_cell_values(R px, R py, const LatticeSpec& lat, const ComponentParams& comp,
                      double l_plus, std::vector<CellValue<R>>& out) {
  out.clear();
  const double pitch_x = lat.pitch_x(), pitch_y = lat.pitch_y();
  const int nx = lat.cells_x, ny = lat.cells_y;
  ComponentParams inst = comp;
  auto eval = [&](int i, int j) {
    inst.center = {comp.center.x + i * pitch_x, comp.center.y + j * pitch_y};
    return component_tdf<R>(px, py, inst);
  };

  const double fx = static_cast<double>(px), fy = static_cast<double>(py);
  const int i0 = std::clamp(static_cast<int>(std::lround((fx - comp.center.x) / pitch_x)), 0, nx - 1);
  const int j0 = std::clamp(static_cast<int>(std::lround((fy - comp.center.y) / pitch_y)), 0, ny - 1);
  const R seed = eval(i0, j0);

  const double k = std::max(1.0, 1.0 - static_cast<double>(seed) + cell_cutoff_exponent<R>() / l_plus);
  const double bmax = 0.5 * (comp.t1 + comp.t2) + 0.5 * std::abs(comp.t2 - comp.t1) * k;
  const double radius = std::hypot(k * comp.half_length, k * bmax);

  const int ilo = std::max(0, static_cast<int>(std::ceil((fx - radius - comp.center.x) / pitch_x)));
  const int ihi = std::min(nx - 1, static_cast<int>(std::floor((fx + radius - comp.center.x) / pitch_x)));
  const int jlo = std::max(0, static_cast<int>(std::ceil((fy - radius - comp.center.y) / pitch_y)));
  const int jhi = std::min(ny - 1, static_cast<int>(std::floor((fy + radius - comp.center.y) / pitch_y)));

  bool seeded = false;
  for (int j = jlo; j <= jhi; ++j) {
    for (int i = ilo; i <= ihi; ++i) {
      const double cx = comp.center.x + i * pitch_x - fx;
      const double cy = comp.center.y + j * pitch_y - fy;
      if (std::hypot(cx, cy) >= radius) continue;
      const int cell = j * nx + i;
      if (i == i0 && j == j0) {
        out.push_back({cell, seed});
        seeded = true;
      } else {
        out.push_back({cell, eval(i, j)});
      }
    }
  }
  if (!seeded) out.push_back({j0 * nx + i0, seed});
}

/// Lattice TDF at an unperturbed grid point; per_comp receives each
/// prototype component's aggregate over its instances.
template <class R>
R lattice_value(Point p, const LatticeSpec& lat, const AggregationParams& agg,
                std::vector<R>& per_comp, std::vector<CellValue<R>>& cells,
                std::vector<R>& vals) {
  const std::size_t ncpf = lat.cpfs.size();
  R ptx[8], pty[8];
  std::vector<R> hx, hy;
  R* qx = ptx;
  R* qy = pty;
  if (ncpf > 8) {
    hx.resize(ncpf);
    hy.resize(ncpf);
    qx = hx.data();
    qy = hy.data();
  }
  for (std::size_t c = 0; c < ncpf; ++c) perturb(R(p.x), R(p.y), lat.cpfs[c], qx[c], qy[c]);
  per_comp.resize(lat.prototype.size());
  for (std::size_t k = 0; k < lat.prototype.size(); ++k) {
    const auto& pc = lat.prototype[k];
    const std::size_t c = static_cast<std::size_t>(pc.cpf_index);
    near_cell_values(qx[c], qy[c], lat, pc.geom, agg.l_plus, cells);
    vals.clear();
    for (const auto& cv : cells) vals.push_back(cv.value);
    per_comp[k] = ks_aggregate(vals.data(), vals.size(), R(agg.l_plus));
  }
  return ks_aggregate(per_comp.data(), per_comp.size(), R(agg.l_plus));
}

template <class R>
R heaviside(R x, const HeavisideParams& hp) {
  const R e = hp.epsilon;
  if (x > e) return 1;
  if (x < -e) return R(hp.alpha);
  const R u = x / e;
  return R(0.75) * (1 - R(hp.alpha)) * (u - u * u * u / 3) + R(0.5) * (1 + R(hp.alpha));
}

}  // namespace shellfill::detail
