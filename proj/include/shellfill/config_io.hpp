#pragma once

// Sectioned key = value configuration files.
//
//   [domain]       name, length, height
//   [grid]         nx, ny
//   [material]     youngs, poisson
//   [loads]        case = <weight>                 starts a load case
//                  point = <x> <y> <x|y> <magnitude>
//   [bcs]          edge = <left|right|bottom|top> <x|y|xy>
//                  point = <x> <y> <x|y|xy>
//   [lattice]      cells_x, cells_y, n1, n2, exponent, shared_cpf, freeze_cpf,
//                  movable_centers, center_lo, center_hi,
//                  component = <cx> <cy> <half_length> <angle> <t1> <t2>
//                  cpf_alpha = <cos_0> <sin_0> ... (n1 pairs), cpf_beta likewise
//   [shell]        delta_d, control_count, spline_order, samples_per_control,
//                  void = <cx> <cy> <d_1> ... <d_n>
//                  boundary = <cx> <cy> <d_1> ... <d_n>   (inverted curve)
//   [constraints]  v_bar, v_lower, infill_constraint
//   [heaviside]    epsilon_factor, alpha, penal
//   [ks]           l_plus, l_minus
//   [mma]          max_iters, min_iters, tolerance, move_limit, asy_init,
//                  asy_incr, asy_decr, bound_ramp
//   [output]       history, raster, boundaries, control_points, seed
//
// '#' and ';' start comments. Booleans are true/false. Volume bounds are
// fractions of the domain area.

#include <filesystem>
#include <string>
#include <string_view>

#include "shellfill/problem_config.hpp"

namespace shellfill {

/// Parses and validates. Errors read "<source>:<line>: section.key: message".
ProblemConfig parse_config_string(std::string_view text, const std::string& source = "<config>");
ProblemConfig parse_config(const std::filesystem::path& path);

/// Lossless text form: parse_config_string(serialize_config(c)) == c.
std::string serialize_config(const ProblemConfig& cfg);
void write_config(const ProblemConfig& cfg, const std::filesystem::path& path);

}  // namespace shellfill
