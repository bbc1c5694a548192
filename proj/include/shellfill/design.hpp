#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shellfill/problem_config.hpp"

namespace shellfill {

using DesignVector = std::vector<double>;

enum class VarKind {
  HalfLength,
  Angle,
  Thickness1,
  Thickness2,
  CenterX,
  CenterY,
  CpfAlpha,
  CpfBeta,
  VoidCenterX,
  VoidCenterY,
  VoidRadius,
};

/// What one design variable controls. `owner` is the prototype component
/// (component variables), the CPF index (CPF variables) or the void index.
/// For CPF variables `index` is the harmonic r and `sub` is 0 for the cosine
/// and 1 for the sine coefficient; for void radii `index` is the control point.
struct VarInfo {
  VarKind kind;
  int owner = 0;
  int index = 0;
  int sub = 0;

  bool is_mmc() const { return kind <= VarKind::CpfBeta; }
};

std::string describe(const VarInfo& v);

/// Ordering, bounds and geometry mapping of the explicit design variables:
/// per prototype component (a, theta, t1, t2[, cx, cy][, alpha, beta]),
/// then the shared CPF block if any, then per void (cx, cy, d_1..d_n).
class DesignLayout {
 public:
  explicit DesignLayout(const ProblemConfig& cfg);

  std::size_t size() const { return vars_.size(); }
  const VarInfo& info(std::size_t i) const { return vars_[i]; }
  const std::vector<VarInfo>& variables() const { return vars_; }
  std::span<const double> lower() const { return lower_; }
  std::span<const double> upper() const { return upper_; }

  /// Initial design from the configuration, clamped into the bounds.
  DesignVector initial() const;

  /// Geometry described by x (fixed parts taken from the configuration).
  LatticeSpec lattice(std::span<const double> x) const;
  ShellSpec shell(std::span<const double> x) const;

  /// Writes the design back into a configuration (for re-analysis/output).
  ProblemConfig apply(const ProblemConfig& cfg, std::span<const double> x) const;

  /// Characteristic size for finite-difference steps of variable i.
  double fd_scale(std::size_t i, std::span<const double> x) const;

  /// Index of the first variable of each component / void block, -1 if absent.
  int component_offset(int k) const { return comp_offset_[k]; }
  int cpf_offset(int c) const { return cpf_offset_[c]; }
  int void_offset(int j) const { return void_offset_[j]; }
  bool has_centers() const { return centers_; }

  std::size_t mmc_count() const;

 private:
  void push(VarInfo v, double lo, double hi, double init);

  LatticeSpec base_lattice_;
  ShellSpec base_shell_;
  double min_domain_ = 1.0;
  bool centers_ = false;
  std::vector<VarInfo> vars_;
  std::vector<double> lower_, upper_, init_;
  std::vector<int> comp_offset_, cpf_offset_, void_offset_;
};

/// Stable 64-bit tag of a design vector's bit pattern.
std::uint64_t design_tag(std::span<const double> x);

}  // namespace shellfill
