#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

#include "shellfill/field.hpp"
#include "shellfill/geometry.hpp"
#include "shellfill/optimizer.hpp"

namespace shellfill {

class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// History CSV: iter,compliance,volume_fraction,infill_volume_fraction,max_rel_change
void write_history_csv(std::span<const IterationRecord> records, const std::filesystem::path& path);
std::vector<IterationRecord> read_history_csv(const std::filesystem::path& path);

/// Binary P5 graymap, one pixel per element, gray = round(255 (1 - rho)).
/// The first row is the top of the domain.
void write_density_raster(std::span<const double> densities, const Grid& grid,
                          const std::filesystem::path& path);

struct Graymap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
};
Graymap read_pgm(const std::filesystem::path& path);

struct Polyline {
  std::vector<Point> points;  // closed curves do not repeat the first point
  bool closed = false;
};

/// Zero contour of a nodal field by marching squares with linear edge
/// interpolation. Saddle cells are split by the cell-center average.
/// Open polylines end on the domain boundary.
std::vector<Polyline> extract_boundaries(std::span<const double> nodal_phi, const Grid& grid);

/// Shoelace area; positive for counter-clockwise point order.
double signed_area(const Polyline& poly);

/// Stroke-only SVG 1.1. Path coordinates are physical; a group transform
/// flips y so that +y points up in the rendered image.
void write_boundaries_svg(std::span<const Polyline> polylines, const Grid& grid,
                          const std::filesystem::path& path);
std::vector<Polyline> read_boundaries_svg(const std::filesystem::path& path);

struct ControlPointRow {
  int void_index = 0;
  int point_index = 0;
  double x = 0.0;
  double y = 0.0;
};

/// void_index,point_index,x,y with 4 decimals.
void write_control_points_csv(const ShellSpec& shell, const std::filesystem::path& path);
std::vector<ControlPointRow> read_control_points_csv(const std::filesystem::path& path);

/// Writes history.csv, density.pgm, boundaries.svg and control_points.csv
/// into `dir` as enabled by cfg.output. Creates `dir` if needed.
void write_run_outputs(const ProblemConfig& cfg, const RunResult& result,
                       const std::filesystem::path& dir);

}  // namespace shellfill
