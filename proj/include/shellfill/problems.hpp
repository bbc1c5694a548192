#pragma once

#include <span>
#include <string>

#include "shellfill/problem_config.hpp"

namespace shellfill {

enum class Scale { Paper, Desk };
enum class CellLayout { TwoComp, FourComp };
enum class LoadMode { Simultaneous, Averaged };

/// Clamped-left cantilever with a unit downward tip load at mid-height of the
/// right edge. Paper scale: 20 x 12, 500 x 300 mesh, 40 x 24 cells, initial
/// design detached from the clamped edge. Desk scale: a 4.8 x 2.88 window at
/// the same element size, 120 x 72 mesh, 10 x 6 cells, attached.
ProblemConfig short_beam(Scale scale);

/// Full simply supported beam (pin bottom-left, roller bottom-right) with a
/// unit downward load at the middle of the top edge.
ProblemConfig mbb_beam(Scale scale);

/// 2 x 1 domain, three downward loads at 1/4, 1/2, 3/4 of the top edge,
/// simple supports at the bottom corners. `voids` is 8, 12 or 18.
ProblemConfig multi_load(Scale scale, int voids, CellLayout cells, LoadMode mode);

/// Builds a benchmark from a name such as "short_beam", "mbb_beam",
/// "multi_load" or "multi_load_four_comp_averaged_12". Throws ConfigError.
ProblemConfig benchmark_by_name(const std::string& name, Scale scale);

/// Initial-layout helpers shared by the benchmarks.
VoidCurve circular_void(Point center, double radius, int control_count);

/// Inverted boundary curve around the domain. Radii follow the distance to
/// the rectangle edge along each control angle, scaled (>= 1.15) until every
/// point in `cover` lies at least `margin` inside the curve. When
/// `left_gap` > 0 the control polygon is kept at x >= left_gap.
VoidCurve outer_boundary(double length, double height, int control_count,
                         std::span<const Point> cover, double margin, double left_gap = 0.0);

/// cols x rows grid of circular voids with radius 0.6 x the half pitch.
std::vector<VoidCurve> void_grid(double length, double height, int count, int control_count);

}  // namespace shellfill
