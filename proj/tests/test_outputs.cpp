#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "shellfill/outputs.hpp"

using namespace shellfill;
using doctest::Approx;

namespace {

std::filesystem::path tmp(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "shellfill_outputs_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<double> sample(const Grid& g, auto f) {
  std::vector<double> v(static_cast<std::size_t>(g.node_count()));
  for (int n = 0; n < g.node_count(); ++n) v[static_cast<std::size_t>(n)] = f(g.node_point(n));
  return v;
}

}  // namespace

TEST_CASE("history csv") {
  const auto path = tmp("history.csv");
  SUBCASE("empty run") {
    write_history_csv({}, path);
    CHECK(slurp(path) == "iter,compliance,volume_fraction,infill_volume_fraction,max_rel_change\n");
    CHECK(read_history_csv(path).empty());
  }
  SUBCASE("three records") {
    const std::vector<IterationRecord> recs{{0, 123.456789123, 0.31234567891, 0.5, 0.0, false},
                                            {1, 120.1, 0.3000000001, 0.49999, 0.0123456789, false},
                                            {2, 1e-7 / 3.0, 2.0 / 3.0, 1.0 / 7.0, 0.1, false}};
    write_history_csv(recs, path);
    const std::string text = slurp(path);
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);
    CHECK(text.find('\r') == std::string::npos);
    const auto back = read_history_csv(path);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(back[i].iter == recs[i].iter);
      CHECK(std::abs(back[i].compliance - recs[i].compliance) <= 1e-8 * std::abs(recs[i].compliance));
      CHECK(std::abs(back[i].volume_fraction - recs[i].volume_fraction) <= 1e-8);
      CHECK(std::abs(back[i].infill_volume_fraction - recs[i].infill_volume_fraction) <= 1e-8);
      CHECK(std::abs(back[i].max_rel_change - recs[i].max_rel_change) <= 1e-8);
    }
    CHECK(text.find("123.456789\n") == std::string::npos);  // 9 significant digits, not fixed
    CHECK(text.find("0,123.456789,") != std::string::npos);
  }
  SUBCASE("bad header") {
    std::ofstream(path) << "iter,c\n0,1\n";
    CHECK_THROWS_AS(read_history_csv(path), OutputError);
  }
  CHECK_THROWS_AS(write_history_csv({}, "/nonexistent/dir/h.csv"), OutputError);
}

TEST_CASE("density raster") {
  const Grid g = Grid::covering(6.0, 4.0, 6, 4);
  const auto path = tmp("rho.pgm");
  const double a2 = 1e-6;
  std::vector<double> rho(24);

  SUBCASE("solid") {
    std::fill(rho.begin(), rho.end(), 1.0);
    write_density_raster(rho, g, path);
    const Graymap m = read_pgm(path);
    CHECK(m.width == 6);
    CHECK(m.height == 4);
    CHECK(std::all_of(m.pixels.begin(), m.pixels.end(), [](auto p) { return p == 0; }));
    CHECK(slurp(path).rfind("P5\n6 4\n255\n", 0) == 0);
  }
  SUBCASE("void") {
    std::fill(rho.begin(), rho.end(), a2);
    write_density_raster(rho, g, path);
    const Graymap m = read_pgm(path);
    CHECK(std::all_of(m.pixels.begin(), m.pixels.end(), [](auto p) { return p == 255; }));
  }
  SUBCASE("checkerboard") {
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 6; ++i) rho[static_cast<std::size_t>(j * 6 + i)] = (i + j) % 2 ? 1.0 : a2;
    write_density_raster(rho, g, path);
    const Graymap m = read_pgm(path);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 6; ++c) {
        const int j = 3 - r;  // first row is the top
        CHECK(m.pixels[static_cast<std::size_t>(r * 6 + c)] == ((c + j) % 2 ? 0 : 255));
      }
  }
  SUBCASE("rows run top to bottom") {
    std::fill(rho.begin(), rho.end(), a2);
    rho[0] = 1.0;  // bottom-left element
    write_density_raster(rho, g, path);
    const Graymap m = read_pgm(path);
    CHECK(m.pixels[18] == 0);
    CHECK(m.pixels[0] == 255);
  }
  SUBCASE("size mismatch") {
    rho.pop_back();
    CHECK_THROWS(write_density_raster(rho, g, path));
  }
}

TEST_CASE("marching squares") {
  const double L = 2.0, H = 1.0;
  const Grid g = Grid::covering(L, H, 40, 20);

  SUBCASE("planar field") {
    const auto polys = extract_boundaries(sample(g, [&](Point p) { return p.x - L / 2 + 0.013; }), g);
    REQUIRE(polys.size() == 1);
    CHECK_FALSE(polys[0].closed);
    for (const Point& p : polys[0].points) CHECK(std::abs(p.x - (L / 2 - 0.013)) <= g.dx);
    double ylo = 1e9, yhi = -1e9;
    for (const Point& p : polys[0].points) {
      ylo = std::min(ylo, p.y);
      yhi = std::max(yhi, p.y);
    }
    CHECK(ylo == Approx(0.0));
    CHECK(yhi == Approx(H));
  }
  SUBCASE("circular void") {
    const Grid sq = Grid::covering(1.0, 1.0, 100, 100);
    const double r = 0.3;
    const auto polys =
        extract_boundaries(sample(sq, [&](Point p) { return std::hypot(p.x - 0.5, p.y - 0.5) - r; }), sq);
    REQUIRE(polys.size() == 1);
    CHECK(polys[0].closed);
    const double exact = std::acos(-1.0) * r * r;
    CHECK(std::abs(std::abs(signed_area(polys[0])) - exact) <= 0.03 * exact);
  }
  SUBCASE("no contour") {
    CHECK(extract_boundaries(sample(g, [](Point) { return 1.0; }), g).empty());
  }
  SUBCASE("two voids give two loops") {
    const auto polys = extract_boundaries(
        sample(g, [](Point p) { return std::min(std::hypot(p.x - 0.5, p.y - 0.5), std::hypot(p.x - 1.5, p.y - 0.5)) - 0.2; }),
        g);
    CHECK(polys.size() == 2);
  }
  SUBCASE("svg round trip") {
    const auto polys = extract_boundaries(
        sample(g, [](Point p) { return std::min(std::hypot(p.x - 0.5, p.y - 0.5) - 0.2, p.x - 1.3); }), g);
    const auto path = tmp("b.svg");
    write_boundaries_svg(polys, g, path);
    const std::string text = slurp(path);
    CHECK(text.find("fill=\"none\"") != std::string::npos);
    const auto back = read_boundaries_svg(path);
    REQUIRE(back.size() == polys.size());
    for (std::size_t i = 0; i < polys.size(); ++i) {
      CHECK(back[i].closed == polys[i].closed);
      REQUIRE(back[i].points.size() == polys[i].points.size());
      for (std::size_t k = 0; k < polys[i].points.size(); ++k) {
        CHECK(back[i].points[k].x == Approx(polys[i].points[k].x).epsilon(1e-6));
        CHECK(back[i].points[k].y == Approx(polys[i].points[k].y).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("control point table") {
  ShellSpec shell;
  shell.voids.push_back({{0.0, 0.0}, std::vector<double>(12, 1.0), 2, false});
  shell.delta_d = 0.1;
  const auto path = tmp("cp.csv");
  write_control_points_csv(shell, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("void_index,point_index,x,y\n", 0) == 0);
  CHECK(text.find("0,0,1.0000,0.0000\n") != std::string::npos);
  CHECK(text.find("0,3,0.0000,1.0000\n") != std::string::npos);
  CHECK(text.find("-0.0000") == std::string::npos);
  const auto rows = read_control_points_csv(path);
  CHECK(rows.size() == 12);
  CHECK(rows[6].x == Approx(-1.0));

  SUBCASE("published-style rows parse") {
    const char* table[12][2] = {{"5.3974", "2.3705"}, {"4.7928", "2.6627"}, {"4.5192", "2.7733"},
                                {"4.2867", "2.7961"}, {"3.7632", "3.2772"}, {"2.0472", "3.6635"},
                                {"1.7537", "2.3705"}, {"0.3382", "0.0909"}, {"3.0171", "0.1715"},
                                {"4.2867", "0.0682"}, {"5.5678", "0.1516"}, {"8.3374", "0.0318"}};
    const auto p2 = tmp("cp_table.csv");
    {
      std::ofstream out(p2);
      out << "void_index,point_index,x,y\n";
      for (int k = 0; k < 12; ++k) out << "0," << k << ',' << table[k][0] << ',' << table[k][1] << '\n';
    }
    const auto t = read_control_points_csv(p2);
    REQUIRE(t.size() == 12);
    CHECK(t[0].x == 5.3974);
    CHECK(t[11].y == 0.0318);
    CHECK(t[11].point_index == 11);
  }
}
