#include "shellfill/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

namespace shellfill {

std::string describe(const VarInfo& v) {
  const std::string o = std::to_string(v.owner);
  switch (v.kind) {
    case VarKind::HalfLength: return "component[" + o + "].a";
    case VarKind::Angle: return "component[" + o + "].theta";
    case VarKind::Thickness1: return "component[" + o + "].t1";
    case VarKind::Thickness2: return "component[" + o + "].t2";
    case VarKind::CenterX: return "component[" + o + "].cx";
    case VarKind::CenterY: return "component[" + o + "].cy";
    case VarKind::CpfAlpha:
      return "cpf[" + o + "].alpha[" + std::to_string(v.index) + "][" + std::to_string(v.sub) + "]";
    case VarKind::CpfBeta:
      return "cpf[" + o + "].beta[" + std::to_string(v.index) + "][" + std::to_string(v.sub) + "]";
    case VarKind::VoidCenterX: return "void[" + o + "].cx";
    case VarKind::VoidCenterY: return "void[" + o + "].cy";
    case VarKind::VoidRadius: return "void[" + o + "].d[" + std::to_string(v.index) + "]";
  }
  return "?";
}

DesignLayout::DesignLayout(const ProblemConfig& cfg)
    : base_lattice_(cfg.lattice_spec()), base_shell_(cfg.shell_spec()) {
  const auto& lc = cfg.lattice;
  const double px = base_lattice_.pitch_x(), py = base_lattice_.pitch_y();
  const double pitch = std::min(px, py);
  const double dd = cfg.shell.delta_d;
  min_domain_ = std::min(cfg.length, cfg.height);
  centers_ = lc.movable_centers;

  const double cpf_bound = 0.25 * pitch * lc.cells_x;
  const bool cpf_free = !lc.freeze_cpf;
  const int nc = static_cast<int>(base_lattice_.prototype.size());
  comp_offset_.assign(static_cast<std::size_t>(nc), -1);
  cpf_offset_.assign(base_lattice_.cpfs.size(), -1);
  void_offset_.assign(base_shell_.voids.size(), -1);

  auto push_cpf = [&](int c) {
    const auto& cpf = base_lattice_.cpfs[static_cast<std::size_t>(c)];
    cpf_offset_[c] = static_cast<int>(vars_.size());
    for (int r = 0; r < static_cast<int>(cpf.alpha.size()); ++r)
      for (int i = 0; i < 2; ++i)
        push({VarKind::CpfAlpha, c, r, i}, -cpf_bound, cpf_bound, cpf.alpha[r][i]);
    for (int t = 0; t < static_cast<int>(cpf.beta.size()); ++t)
      for (int i = 0; i < 2; ++i)
        push({VarKind::CpfBeta, c, t, i}, -cpf_bound, cpf_bound, cpf.beta[t][i]);
  };

  for (int k = 0; k < nc; ++k) {
    const auto& g = base_lattice_.prototype[k].geom;
    comp_offset_[k] = static_cast<int>(vars_.size());
    push({VarKind::HalfLength, k}, 0.1 * pitch, 2.0 * pitch, g.half_length);
    push({VarKind::Angle, k}, -std::numbers::pi, std::numbers::pi, g.angle);
    push({VarKind::Thickness1, k}, 0.02 * pitch, 0.8 * pitch, g.t1);
    push({VarKind::Thickness2, k}, 0.02 * pitch, 0.8 * pitch, g.t2);
    if (centers_) {
      push({VarKind::CenterX, k}, lc.center_lo * px, lc.center_hi * px, g.center.x);
      push({VarKind::CenterY, k}, lc.center_lo * py, lc.center_hi * py, g.center.y);
    }
    if (cpf_free && !lc.shared_cpf) push_cpf(k);
  }
  if (cpf_free && lc.shared_cpf) push_cpf(0);

  const double half_diag = 0.5 * std::hypot(cfg.length, cfg.height);
  for (std::size_t j = 0; j < base_shell_.voids.size(); ++j) {
    const auto& v = base_shell_.voids[j];
    const int o = static_cast<int>(j);
    void_offset_[j] = static_cast<int>(vars_.size());
    push({VarKind::VoidCenterX, o}, dd, cfg.length - dd, v.center.x);
    push({VarKind::VoidCenterY, o}, dd, cfg.height - dd, v.center.y);
    double hi = 0.9 * min_domain_;
    if (v.inverted) {
      hi = 1.5 * half_diag;
      for (double d : v.radii) hi = std::max(hi, 1.25 * d);
    }
    for (int k = 0; k < v.control_count(); ++k)
      push({VarKind::VoidRadius, o, k}, 2.0 * dd, hi, v.radii[k]);
  }
}

void DesignLayout::push(VarInfo v, double lo, double hi, double init) {
  vars_.push_back(v);
  lower_.push_back(lo);
  upper_.push_back(hi);
  init_.push_back(std::clamp(init, lo, hi));
}

DesignVector DesignLayout::initial() const { return init_; }

std::size_t DesignLayout::mmc_count() const {
  return static_cast<std::size_t>(
      std::count_if(vars_.begin(), vars_.end(), [](const VarInfo& v) { return v.is_mmc(); }));
}

LatticeSpec DesignLayout::lattice(std::span<const double> x) const {
  LatticeSpec lat = base_lattice_;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& v = vars_[i];
    if (!v.is_mmc()) continue;
    if (v.kind == VarKind::CpfAlpha) {
      lat.cpfs[v.owner].alpha[v.index][v.sub] = x[i];
      continue;
    }
    if (v.kind == VarKind::CpfBeta) {
      lat.cpfs[v.owner].beta[v.index][v.sub] = x[i];
      continue;
    }
    auto& g = lat.prototype[v.owner].geom;
    switch (v.kind) {
      case VarKind::HalfLength: g.half_length = x[i]; break;
      case VarKind::Angle: g.angle = x[i]; break;
      case VarKind::Thickness1: g.t1 = x[i]; break;
      case VarKind::Thickness2: g.t2 = x[i]; break;
      case VarKind::CenterX: g.center.x = x[i]; break;
      case VarKind::CenterY: g.center.y = x[i]; break;
      default: break;
    }
  }
  return lat;
}

ShellSpec DesignLayout::shell(std::span<const double> x) const {
  ShellSpec sh = base_shell_;
  for (std::size_t i = 0; i < vars_.size(); ++i) {
    const auto& v = vars_[i];
    switch (v.kind) {
      case VarKind::VoidCenterX: sh.voids[v.owner].center.x = x[i]; break;
      case VarKind::VoidCenterY: sh.voids[v.owner].center.y = x[i]; break;
      case VarKind::VoidRadius: sh.voids[v.owner].radii[v.index] = x[i]; break;
      default: break;
    }
  }
  return sh;
}

ProblemConfig DesignLayout::apply(const ProblemConfig& cfg, std::span<const double> x) const {
  ProblemConfig out = cfg;
  const LatticeSpec lat = lattice(x);
  for (std::size_t k = 0; k < out.lattice.prototype.size(); ++k)
    out.lattice.prototype[k] = lat.prototype[k].geom;
  out.lattice.cpfs = lat.cpfs;
  out.shell.voids = shell(x).voids;
  return out;
}

double DesignLayout::fd_scale(std::size_t i, std::span<const double> x) const {
  const auto& v = vars_[i];
  switch (v.kind) {
    case VarKind::HalfLength:
    case VarKind::Thickness1:
    case VarKind::Thickness2:
      return x[static_cast<std::size_t>(comp_offset_[v.owner])];  // a_k
    case VarKind::Angle:
      return 1.0;
    default:
      return min_domain_;
  }
}

std::uint64_t design_tag(std::span<const double> x) {
  std::uint64_t h = 1469598103934665603ull;
  for (double d : x) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace shellfill
