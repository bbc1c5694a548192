#include <algorithm>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "shellfill/config_io.hpp"
#include "shellfill/problems.hpp"

using namespace shellfill;

namespace {

std::string replace_line(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, from.size(), to);
  return text;
}

/// Message of the ConfigError raised by parsing `text`, empty if none.
std::string parse_error(const std::string& text) {
  try {
    parse_config_string(text, "t.ini");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

int line_of(const std::string& text, const std::string& needle) {
  const auto pos = text.find(needle);
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

}  // namespace

TEST_CASE("round trip of every benchmark") {
  const char* names[] = {"short_beam", "mbb_beam", "multi_load", "multi_load_averaged",
                         "multi_load_four_comp_averaged", "multi_load_averaged_8",
                         "multi_load_four_comp_averaged_18"};
  for (Scale s : {Scale::Desk, Scale::Paper}) {
    for (const char* n : names) {
      INFO(n);
      const ProblemConfig cfg = benchmark_by_name(n, s);
      const std::string text = serialize_config(cfg);
      const ProblemConfig back = parse_config_string(text);
      CHECK(back == cfg);
      CHECK(serialize_config(back) == text);
    }
  }
}

TEST_CASE("file round trip") {
  ProblemConfig cfg = short_beam(Scale::Desk);
  cfg.mma.bound_ramp = 25;
  cfg.mma.move_limit = 0.02;
  cfg.constraints.infill_constraint = false;
  cfg.lattice.freeze_cpf = true;
  cfg.output.raster = false;
  const auto path = std::filesystem::temp_directory_path() / "shellfill_cfg_roundtrip.ini";
  write_config(cfg, path);
  CHECK(parse_config(path) == cfg);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(parse_config(path), ConfigError);
}

TEST_CASE("comments and whitespace") {
  const std::string text = serialize_config(short_beam(Scale::Desk));
  std::string noisy = replace_line(text, "[grid]\n", "# grid block\n  [grid]   ; trailing\n\n");
  noisy = replace_line(noisy, "nx = 120", "   nx=120   # elements along x");
  CHECK(parse_config_string(noisy) == parse_config_string(text));
}

TEST_CASE("errors name the key and the line") {
  const std::string text = serialize_config(short_beam(Scale::Desk));

  SUBCASE("v_lower above the domain") {
    const std::string bad = replace_line(text, "v_lower = 0.5", "v_lower = 1.2");
    const std::string msg = parse_error(bad);
    CHECK(msg.find("constraints.v_lower") != std::string::npos);
    CHECK(msg.find("t.ini:" + std::to_string(line_of(bad, "v_lower = 1.2")) + ":") == 0);
  }
  SUBCASE("missing section") {
    const std::string bad = replace_line(text, "[grid]\nnx = 120\nny = 72\n", "");
    CHECK(parse_error(bad).find("grid.nx") != std::string::npos);
  }
  SUBCASE("unknown key") {
    const std::string bad = replace_line(text, "nx = 120", "nx = 120\nnz = 4");
    const std::string msg = parse_error(bad);
    CHECK(msg.find("grid.nz") != std::string::npos);
    CHECK(msg.find("t.ini:" + std::to_string(line_of(bad, "nz = 4")) + ":") == 0);
  }
  SUBCASE("unknown section") {
    CHECK_FALSE(parse_error(replace_line(text, "[grid]", "[mesh]")).empty());
  }
  SUBCASE("type mismatch") {
    const std::string bad = replace_line(text, "ny = 72", "ny = seventy");
    const std::string msg = parse_error(bad);
    CHECK(msg.find("grid.ny") != std::string::npos);
    CHECK(msg.find("t.ini:" + std::to_string(line_of(bad, "ny = seventy")) + ":") == 0);
  }
  SUBCASE("bad boolean") {
    CHECK(parse_error(replace_line(text, "shared_cpf = true", "shared_cpf = yes")).find("lattice.shared_cpf") !=
          std::string::npos);
  }
  SUBCASE("duplicate scalar") {
    CHECK(parse_error(replace_line(text, "nx = 120", "nx = 120\nnx = 60")).find("grid.nx") != std::string::npos);
  }
  SUBCASE("void with the wrong number of radii") {
    CHECK(parse_error(replace_line(text, "void = 3 0.72 0.36", "void = 3 0.72")).find("shell.") !=
          std::string::npos);
  }
  SUBCASE("load outside the domain") {
    CHECK_FALSE(parse_error(replace_line(text, "point = 4.8 1.44 y -1", "point = 9 1.44 y -1")).empty());
  }
  SUBCASE("bad direction") {
    CHECK(parse_error(replace_line(text, "point = 4.8 1.44 y -1", "point = 4.8 1.44 z -1")).find("loads.point") !=
          std::string::npos);
  }
  SUBCASE("negative ramp") {
    CHECK(parse_error(replace_line(text, "bound_ramp = 30", "bound_ramp = -1")).find("mma.bound_ramp") !=
          std::string::npos);
  }
}
