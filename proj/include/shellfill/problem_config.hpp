#pragma once

#include <string>
#include <vector>

#include "shellfill/fem.hpp"
#include "shellfill/field.hpp"
#include "shellfill/geometry.hpp"

namespace shellfill {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Point load at a physical location; applied at the nearest grid node.
struct LoadSpec {
  Point location;
  int direction = 1;
  double magnitude = -1.0;

  bool operator==(const LoadSpec&) const = default;
};

struct LoadCaseSpec {
  std::vector<LoadSpec> loads;
  double weight = 1.0;

  bool operator==(const LoadCaseSpec&) const = default;
};

/// Homogeneous Dirichlet support on a whole domain edge or at the node
/// nearest to a point.
struct SupportSpec {
  enum class Kind { Edge, Point };
  enum class Edge { Left, Right, Bottom, Top };

  Kind kind = Kind::Edge;
  Edge edge = Edge::Left;
  Point location;
  bool fix_x = true;
  bool fix_y = true;

  bool operator==(const SupportSpec&) const = default;
};

struct LatticeConfig {
  int cells_x = 1;
  int cells_y = 1;
  int n1 = 4;
  int n2 = 4;
  int exponent = 6;
  bool shared_cpf = true;       // one CPF pair for the whole prototype
  bool freeze_cpf = false;      // CPFs held at their initial values
  bool movable_centers = false;
  double center_lo = 0.49;      // movable-center range as a fraction of the pitch
  double center_hi = 0.51;
  std::vector<ComponentParams> prototype;
  std::vector<CPFCoefficients> cpfs;  // 1 if shared, prototype.size() otherwise

  bool operator==(const LatticeConfig&) const = default;
};

struct ShellConfig {
  double delta_d = 0.1;
  int control_count = 12;
  int spline_order = 2;
  int samples_per_control = 64;
  std::vector<VoidCurve> voids;

  bool operator==(const ShellConfig&) const = default;
};

struct ConstraintConfig {
  double v_bar = 0.3;          // V_bar / V_D
  double v_lower = 0.5;        // V_lower / V_D
  bool infill_constraint = true;

  bool operator==(const ConstraintConfig&) const = default;
};

struct HeavisideConfig {
  double epsilon_factor = 3.0;  // epsilon = factor * min(dx, dy)
  double alpha = 1e-3;
  double penal = 2.0;

  bool operator==(const HeavisideConfig&) const = default;
};

struct MMAConfig {
  int max_iters = 300;
  int min_iters = 30;
  double tolerance = 0.05;      // max relative design change for convergence
  double move_limit = 0.1;
  double asy_init = 0.5;
  double asy_incr = 1.2;
  double asy_decr = 0.7;
  int bound_ramp = 0;           // iterations over which violated volume bounds tighten to their targets

  bool operator==(const MMAConfig&) const = default;
};

struct OutputConfig {
  bool history = true;
  bool raster = true;
  bool boundaries = true;
  bool control_points = true;
  unsigned seed = 0;  // reserved; the pipeline is deterministic

  bool operator==(const OutputConfig&) const = default;
};

struct ProblemConfig {
  std::string name = "problem";
  double length = 1.0;
  double height = 1.0;
  int nx = 10;
  int ny = 10;
  MaterialParams material;
  std::vector<LoadCaseSpec> loads;
  std::vector<SupportSpec> supports;
  LatticeConfig lattice;
  ShellConfig shell;
  ConstraintConfig constraints;
  HeavisideConfig heaviside;
  AggregationParams ks;
  MMAConfig mma;
  OutputConfig output;

  /// Throws ConfigError naming the offending "section.key".
  void validate() const;

  Grid grid() const;
  HeavisideParams heaviside_params() const;
  BoundaryConditions boundary_conditions() const;
  std::vector<LoadCase> load_cases() const;
  LatticeSpec lattice_spec() const;
  ShellSpec shell_spec() const;
  double domain_area() const { return length * height; }

  bool operator==(const ProblemConfig&) const = default;
};

}  // namespace shellfill
