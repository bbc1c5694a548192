#include "shellfill/outputs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace shellfill {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw OutputError(path.string() + ": cannot open for writing");
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw OutputError(path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw OutputError(path.string() + ": write failed");
}

std::string g9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fixed4(double v) {
  double r = std::round(v * 1e4) / 1e4;
  if (r == 0.0) r = 0.0;  // no "-0.0000"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4f", r);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t b = 0;
  for (;;) {
    const auto e = line.find(sep, b);
    out.push_back(line.substr(b, e == std::string::npos ? std::string::npos : e - b));
    if (e == std::string::npos) break;
    b = e + 1;
  }
  return out;
}

double to_double(const std::string& s, const std::filesystem::path& path, int line) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw OutputError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
    out.push_back(l);
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void write_history_csv(std::span<const IterationRecord> records, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "iter,compliance,volume_fraction,infill_volume_fraction,max_rel_change\n";
  for (const auto& r : records)
    out << r.iter << ',' << g9(r.compliance) << ',' << g9(r.volume_fraction) << ','
        << g9(r.infill_volume_fraction) << ',' << g9(r.max_rel_change) << '\n';
  finish(out, path);
}

std::vector<IterationRecord> read_history_csv(const std::filesystem::path& path) {
  const auto lines = lines_of(slurp(path));
  if (lines.empty() || lines[0] != "iter,compliance,volume_fraction,infill_volume_fraction,max_rel_change")
    throw OutputError(path.string() + ": missing history header");
  std::vector<IterationRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], ',');
    const int ln = static_cast<int>(i + 1);
    if (f.size() != 5) throw OutputError(path.string() + ":" + std::to_string(ln) + ": expected 5 fields");
    IterationRecord r;
    r.iter = static_cast<int>(to_double(f[0], path, ln));
    r.compliance = to_double(f[1], path, ln);
    r.volume_fraction = to_double(f[2], path, ln);
    r.infill_volume_fraction = to_double(f[3], path, ln);
    r.max_rel_change = to_double(f[4], path, ln);
    out.push_back(r);
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_density_raster(std::span<const double> densities, const Grid& grid,
                          const std::filesystem::path& path) {
  if (densities.size() != static_cast<std::size_t>(grid.element_count()))
    throw OutputError("density count does not match the grid");
  auto out = open_out(path);
  out << "P5\n" << grid.nx << ' ' << grid.ny << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(grid.nx));
  for (int j = grid.ny - 1; j >= 0; --j) {
    for (int i = 0; i < grid.nx; ++i) {
      const double rho = std::clamp(densities[static_cast<std::size_t>(j * grid.nx + i)], 0.0, 1.0);
      row[static_cast<std::size_t>(i)] = static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * (1.0 - rho))));
    }
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
  finish(out, path);
}

Graymap read_pgm(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  std::size_t pos = 0;
  auto token = [&]() {
    for (;;) {
      while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
      if (pos < data.size() && data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    const std::size_t b = pos;
    while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    return data.substr(b, pos - b);
  };
  if (token() != "P5") throw OutputError(path.string() + ": not a P5 graymap");
  Graymap g;
  g.width = std::atoi(token().c_str());
  g.height = std::atoi(token().c_str());
  const int maxval = std::atoi(token().c_str());
  if (g.width <= 0 || g.height <= 0 || maxval != 255)
    throw OutputError(path.string() + ": unsupported graymap header");
  ++pos;  // single whitespace before the payload
  const std::size_t n = static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height);
  if (data.size() < pos + n) throw OutputError(path.string() + ": truncated payload");
  g.pixels.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                  data.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return g;
}

// ---------------------------------------------------------------------------

std::vector<Polyline> extract_boundaries(std::span<const double> phi, const Grid& grid) {
  if (phi.size() != static_cast<std::size_t>(grid.node_count()))
    throw OutputError("nodal field size does not match the grid");
  const int nx = grid.nx, ny = grid.ny;
  auto in = [&](int node) { return phi[static_cast<std::size_t>(node)] > 0.0; };

  // Crossing point of grid edge id (2*node for +x, 2*node+1 for +y).
  auto crossing = [&](int id) {
    const int a = id / 2;
    const int b = (id % 2 == 0) ? a + 1 : a + nx + 1;
    const double fa = phi[static_cast<std::size_t>(a)], fb = phi[static_cast<std::size_t>(b)];
    const double t = fa / (fa - fb);
    const Point pa = grid.node_point(a), pb = grid.node_point(b);
    return Point{pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)};
  };

  std::vector<std::array<int, 2>> segs;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int n0 = grid.node_index(i, j), n1 = n0 + 1, n3 = n0 + nx + 1, n2 = n3 + 1;
      const bool s0 = in(n0), s1 = in(n1), s2 = in(n2), s3 = in(n3);
      // bottom, right, top, left
      const std::array<int, 4> edge{2 * n0, 2 * n1 + 1, 2 * n3, 2 * n0 + 1};
      const std::array<bool, 4> cut{s0 != s1, s1 != s2, s3 != s2, s0 != s3};
      const int count = cut[0] + cut[1] + cut[2] + cut[3];
      if (count == 2) {
        std::array<int, 2> s{};
        int k = 0;
        for (int e = 0; e < 4; ++e)
          if (cut[e]) s[k++] = edge[e];
        segs.push_back(s);
      } else if (count == 4) {
        const double center = 0.25 * (phi[n0] + phi[n1] + phi[n2] + phi[n3]);
        if ((center > 0.0) == s0) {
          segs.push_back({edge[0], edge[1]});
          segs.push_back({edge[2], edge[3]});
        } else {
          segs.push_back({edge[0], edge[3]});
          segs.push_back({edge[1], edge[2]});
        }
      }
    }

  // Each crossing is shared by at most two segments.
  std::vector<std::array<int, 2>> at(static_cast<std::size_t>(2 * grid.node_count()), {-1, -1});
  for (int s = 0; s < static_cast<int>(segs.size()); ++s)
    for (int e : segs[static_cast<std::size_t>(s)]) {
      auto& slot = at[static_cast<std::size_t>(e)];
      (slot[0] < 0 ? slot[0] : slot[1]) = s;
    }
  auto other_seg = [&](int edge, int seg) {
    const auto& slot = at[static_cast<std::size_t>(edge)];
    return slot[0] == seg ? slot[1] : slot[0];
  };

  std::vector<char> used(segs.size(), 0);
  std::vector<Polyline> out;
  auto trace = [&](int seg, int start_edge) {
    Polyline pl;
    pl.points.push_back(crossing(start_edge));
    int edge = start_edge;
    while (seg >= 0 && !used[static_cast<std::size_t>(seg)]) {
      used[static_cast<std::size_t>(seg)] = 1;
      const auto& s = segs[static_cast<std::size_t>(seg)];
      edge = s[0] == edge ? s[1] : s[0];
      if (edge == start_edge) {
        pl.closed = true;
        break;
      }
      pl.points.push_back(crossing(edge));
      seg = other_seg(edge, seg);
    }
    out.push_back(std::move(pl));
  };
  // Open chains start at crossings used by a single segment.
  for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
    if (used[static_cast<std::size_t>(s)]) continue;
    for (int e : segs[static_cast<std::size_t>(s)])
      if (other_seg(e, s) < 0) {
        trace(s, e);
        break;
      }
  }
  for (int s = 0; s < static_cast<int>(segs.size()); ++s)
    if (!used[static_cast<std::size_t>(s)]) trace(s, segs[static_cast<std::size_t>(s)][0]);
  return out;
}

double signed_area(const Polyline& poly) {
  const auto& p = poly.points;
  double a = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Point& u = p[i];
    const Point& v = p[(i + 1) % p.size()];
    a += u.x * v.y - v.x * u.y;
  }
  return 0.5 * a;
}

void write_boundaries_svg(std::span<const Polyline> polylines, const Grid& grid,
                          const std::filesystem::path& path) {
  const double L = grid.length(), H = grid.height();
  const double ox = grid.origin.x, oy = grid.origin.y;
  auto out = open_out(path);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << 4 * grid.nx
      << "\" height=\"" << 4 * grid.ny << "\" viewBox=\"" << g9(ox) << ' ' << g9(oy) << ' ' << g9(L)
      << ' ' << g9(H) << "\">\n"
      << "<g transform=\"matrix(1 0 0 -1 0 " << g9(2.0 * oy + H) << ")\" fill=\"none\" stroke=\"black\" "
      << "stroke-width=\"" << g9(0.25 * std::min(grid.dx, grid.dy)) << "\">\n";
  for (const auto& pl : polylines) {
    if (pl.points.empty()) continue;
    out << "<path d=\"";
    for (std::size_t i = 0; i < pl.points.size(); ++i)
      out << (i == 0 ? "M " : " L ") << g9(pl.points[i].x) << ' ' << g9(pl.points[i].y);
    if (pl.closed) out << " Z";
    out << "\"/>\n";
  }
  out << "</g>\n</svg>\n";
  finish(out, path);
}

std::vector<Polyline> read_boundaries_svg(const std::filesystem::path& path) {
  const std::string text = slurp(path);
  std::vector<Polyline> out;
  std::size_t pos = 0;
  while ((pos = text.find("<path d=\"", pos)) != std::string::npos) {
    pos += 9;
    const auto end = text.find('"', pos);
    if (end == std::string::npos) throw OutputError(path.string() + ": unterminated path");
    std::istringstream in(text.substr(pos, end - pos));
    Polyline pl;
    for (std::string tok; in >> tok;) {
      if (tok == "Z") {
        pl.closed = true;
        continue;
      }
      if (tok != "M" && tok != "L") throw OutputError(path.string() + ": unsupported path command");
      std::string xs, ys;
      if (!(in >> xs >> ys)) throw OutputError(path.string() + ": truncated path");
      pl.points.push_back({to_double(xs, path, 0), to_double(ys, path, 0)});
    }
    out.push_back(std::move(pl));
    pos = end;
  }
  return out;
}

// ---------------------------------------------------------------------------

void write_control_points_csv(const ShellSpec& shell, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "void_index,point_index,x,y\n";
  for (std::size_t j = 0; j < shell.voids.size(); ++j) {
    const auto& v = shell.voids[j];
    for (int k = 0; k < v.control_count(); ++k) {
      const Point p = v.control_point(k);
      out << j << ',' << k << ',' << fixed4(p.x) << ',' << fixed4(p.y) << '\n';
    }
  }
  finish(out, path);
}

std::vector<ControlPointRow> read_control_points_csv(const std::filesystem::path& path) {
  const auto lines = lines_of(slurp(path));
  if (lines.empty() || lines[0] != "void_index,point_index,x,y")
    throw OutputError(path.string() + ": missing control-point header");
  std::vector<ControlPointRow> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split(lines[i], ',');
    const int ln = static_cast<int>(i + 1);
    if (f.size() != 4) throw OutputError(path.string() + ":" + std::to_string(ln) + ": expected 4 fields");
    out.push_back({static_cast<int>(to_double(f[0], path, ln)), static_cast<int>(to_double(f[1], path, ln)),
                   to_double(f[2], path, ln), to_double(f[3], path, ln)});
  }
  return out;
}

void write_run_outputs(const ProblemConfig& cfg, const RunResult& result,
                       const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputError(dir.string() + ": " + ec.message());
  const Grid grid = cfg.grid();
  if (cfg.output.history) write_history_csv(result.history, dir / "history.csv");
  if (cfg.output.raster) write_density_raster(result.final.densities, grid, dir / "density.pgm");
  if (cfg.output.boundaries)
    write_boundaries_svg(extract_boundaries(result.final.phi_s.values, grid), grid,
                         dir / "boundaries.svg");
  if (cfg.output.control_points) write_control_points_csv(result.shell, dir / "control_points.csv");
}

}  // namespace shellfill
