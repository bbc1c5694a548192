#include "shellfill/config_io.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace shellfill {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t b = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > b) out.push_back(s.substr(b, i - b));
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

const char* fmt(bool b) { return b ? "true" : "false"; }

const char* dof_name(bool fx, bool fy) { return fx && fy ? "xy" : (fx ? "x" : "y"); }

const char* edge_name(SupportSpec::Edge e) {
  switch (e) {
    case SupportSpec::Edge::Left: return "left";
    case SupportSpec::Edge::Right: return "right";
    case SupportSpec::Edge::Bottom: return "bottom";
    case SupportSpec::Edge::Top: return "top";
  }
  return "left";
}

class Parser {
 public:
  Parser(std::string source) : source_(std::move(source)) { install(); }

  ProblemConfig parse(std::string_view text) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      if (nl == std::string_view::npos) nl = text.size();
      ++line_;
      handle_line(text.substr(pos, nl - pos));
      pos = nl + 1;
    }
    finish();
    return cfg_;
  }

 private:
  using Handler = std::function<void(std::string_view)>;

  [[noreturn]] void fail(const std::string& key, const std::string& msg, int line) const {
    std::string where = source_;
    if (line > 0) where += ":" + std::to_string(line);
    throw ConfigError(where + ": " + key + ": " + msg);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(key_, msg, line_); }

  double num(std::string_view w) const {
    double v = 0.0;
    const auto r = std::from_chars(w.data(), w.data() + w.size(), v);
    if (r.ec != std::errc() || r.ptr != w.data() + w.size())
      fail("expected a number, got '" + std::string(w) + "'");
    return v;
  }
  int integer(std::string_view w) const {
    int v = 0;
    const auto r = std::from_chars(w.data(), w.data() + w.size(), v);
    if (r.ec != std::errc() || r.ptr != w.data() + w.size())
      fail("expected an integer, got '" + std::string(w) + "'");
    return v;
  }
  bool boolean(std::string_view w) const {
    if (w == "true") return true;
    if (w == "false") return false;
    fail("expected true or false, got '" + std::string(w) + "'");
  }
  std::vector<std::string_view> words(std::string_view v, std::size_t n) const {
    auto w = split_words(v);
    if (w.size() != n)
      fail("expected " + std::to_string(n) + " fields, got " + std::to_string(w.size()));
    return w;
  }
  std::string_view single(std::string_view v) const { return words(v, 1)[0]; }
  std::pair<bool, bool> dofs(std::string_view w) const {
    if (w == "xy") return {true, true};
    if (w == "x") return {true, false};
    if (w == "y") return {false, true};
    fail("expected x, y or xy, got '" + std::string(w) + "'");
  }

  void scalar(const std::string& key, std::function<void(std::string_view)> set) {
    handlers_[key] = [this, set](std::string_view v) {
      if (!seen_.insert(key_).second) fail("duplicate key");
      set(single(v));
    };
  }
  void list(const std::string& key, Handler h) { handlers_[key] = std::move(h); }

  void install() {
    auto& c = cfg_;
    scalar("domain.name", [&c](std::string_view w) { c.name = std::string(w); });
    scalar("domain.length", [this, &c](std::string_view w) { c.length = num(w); });
    scalar("domain.height", [this, &c](std::string_view w) { c.height = num(w); });
    scalar("grid.nx", [this, &c](std::string_view w) { c.nx = integer(w); });
    scalar("grid.ny", [this, &c](std::string_view w) { c.ny = integer(w); });
    scalar("material.youngs", [this, &c](std::string_view w) { c.material.youngs = num(w); });
    scalar("material.poisson", [this, &c](std::string_view w) { c.material.poisson = num(w); });

    list("loads.case", [this, &c](std::string_view v) {
      LoadCaseSpec lc;
      lc.weight = num(single(v));
      c.loads.push_back(lc);
    });
    list("loads.point", [this, &c](std::string_view v) {
      if (c.loads.empty()) fail("point load before any 'case' line");
      const auto w = words(v, 4);
      LoadSpec l;
      l.location = {num(w[0]), num(w[1])};
      const auto [fx, fy] = dofs(w[2]);
      if (fx == fy) fail("load direction must be x or y");
      l.direction = fx ? 0 : 1;
      l.magnitude = num(w[3]);
      c.loads.back().loads.push_back(l);
    });

    list("bcs.edge", [this, &c](std::string_view v) {
      const auto w = words(v, 2);
      SupportSpec s;
      s.kind = SupportSpec::Kind::Edge;
      if (w[0] == "left") s.edge = SupportSpec::Edge::Left;
      else if (w[0] == "right") s.edge = SupportSpec::Edge::Right;
      else if (w[0] == "bottom") s.edge = SupportSpec::Edge::Bottom;
      else if (w[0] == "top") s.edge = SupportSpec::Edge::Top;
      else fail("unknown edge '" + std::string(w[0]) + "'");
      std::tie(s.fix_x, s.fix_y) = dofs(w[1]);
      c.supports.push_back(s);
    });
    list("bcs.point", [this, &c](std::string_view v) {
      const auto w = words(v, 3);
      SupportSpec s;
      s.kind = SupportSpec::Kind::Point;
      s.location = {num(w[0]), num(w[1])};
      std::tie(s.fix_x, s.fix_y) = dofs(w[2]);
      c.supports.push_back(s);
    });

    auto& lat = c.lattice;
    scalar("lattice.cells_x", [this, &lat](std::string_view w) { lat.cells_x = integer(w); });
    scalar("lattice.cells_y", [this, &lat](std::string_view w) { lat.cells_y = integer(w); });
    scalar("lattice.n1", [this, &lat](std::string_view w) { lat.n1 = integer(w); });
    scalar("lattice.n2", [this, &lat](std::string_view w) { lat.n2 = integer(w); });
    scalar("lattice.exponent", [this, &lat](std::string_view w) { lat.exponent = integer(w); });
    scalar("lattice.shared_cpf", [this, &lat](std::string_view w) { lat.shared_cpf = boolean(w); });
    scalar("lattice.freeze_cpf", [this, &lat](std::string_view w) { lat.freeze_cpf = boolean(w); });
    scalar("lattice.movable_centers",
           [this, &lat](std::string_view w) { lat.movable_centers = boolean(w); });
    scalar("lattice.center_lo", [this, &lat](std::string_view w) { lat.center_lo = num(w); });
    scalar("lattice.center_hi", [this, &lat](std::string_view w) { lat.center_hi = num(w); });
    list("lattice.component", [this, &lat](std::string_view v) {
      const auto w = words(v, 6);
      ComponentParams p;
      p.center = {num(w[0]), num(w[1])};
      p.half_length = num(w[2]);
      p.angle = num(w[3]);
      p.t1 = num(w[4]);
      p.t2 = num(w[5]);
      lat.prototype.push_back(p);
    });
    list("lattice.cpf_alpha", [this](std::string_view v) { alphas_.push_back(pairs(v)); });
    list("lattice.cpf_beta", [this](std::string_view v) { betas_.push_back(pairs(v)); });

    auto& sh = c.shell;
    scalar("shell.delta_d", [this, &sh](std::string_view w) { sh.delta_d = num(w); });
    scalar("shell.control_count", [this, &sh](std::string_view w) { sh.control_count = integer(w); });
    scalar("shell.spline_order", [this, &sh](std::string_view w) { sh.spline_order = integer(w); });
    scalar("shell.samples_per_control",
           [this, &sh](std::string_view w) { sh.samples_per_control = integer(w); });
    list("shell.void", [this, &sh](std::string_view v) { sh.voids.push_back(curve(v, false)); });
    list("shell.boundary", [this, &sh](std::string_view v) { sh.voids.push_back(curve(v, true)); });

    scalar("constraints.v_bar", [this, &c](std::string_view w) { c.constraints.v_bar = num(w); });
    scalar("constraints.v_lower", [this, &c](std::string_view w) { c.constraints.v_lower = num(w); });
    scalar("constraints.infill_constraint",
           [this, &c](std::string_view w) { c.constraints.infill_constraint = boolean(w); });

    scalar("heaviside.epsilon_factor",
           [this, &c](std::string_view w) { c.heaviside.epsilon_factor = num(w); });
    scalar("heaviside.alpha", [this, &c](std::string_view w) { c.heaviside.alpha = num(w); });
    scalar("heaviside.penal", [this, &c](std::string_view w) { c.heaviside.penal = num(w); });
    scalar("ks.l_plus", [this, &c](std::string_view w) { c.ks.l_plus = num(w); });
    scalar("ks.l_minus", [this, &c](std::string_view w) { c.ks.l_minus = num(w); });

    scalar("mma.max_iters", [this, &c](std::string_view w) { c.mma.max_iters = integer(w); });
    scalar("mma.min_iters", [this, &c](std::string_view w) { c.mma.min_iters = integer(w); });
    scalar("mma.tolerance", [this, &c](std::string_view w) { c.mma.tolerance = num(w); });
    scalar("mma.move_limit", [this, &c](std::string_view w) { c.mma.move_limit = num(w); });
    scalar("mma.asy_init", [this, &c](std::string_view w) { c.mma.asy_init = num(w); });
    scalar("mma.asy_incr", [this, &c](std::string_view w) { c.mma.asy_incr = num(w); });
    scalar("mma.asy_decr", [this, &c](std::string_view w) { c.mma.asy_decr = num(w); });
    scalar("mma.bound_ramp", [this, &c](std::string_view w) { c.mma.bound_ramp = integer(w); });

    scalar("output.history", [this, &c](std::string_view w) { c.output.history = boolean(w); });
    scalar("output.raster", [this, &c](std::string_view w) { c.output.raster = boolean(w); });
    scalar("output.boundaries", [this, &c](std::string_view w) { c.output.boundaries = boolean(w); });
    scalar("output.control_points",
           [this, &c](std::string_view w) { c.output.control_points = boolean(w); });
    scalar("output.seed", [this, &c](std::string_view w) {
      const int s = integer(w);
      if (s < 0) fail("must be non-negative");
      c.output.seed = static_cast<unsigned>(s);
    });
  }

  std::vector<std::array<double, 2>> pairs(std::string_view v) const {
    const auto w = split_words(v);
    if (w.empty() || w.size() % 2 != 0) fail("expected cosine/sine coefficient pairs");
    std::vector<std::array<double, 2>> out;
    for (std::size_t i = 0; i < w.size(); i += 2) out.push_back({num(w[i]), num(w[i + 1])});
    return out;
  }

  VoidCurve curve(std::string_view v, bool inverted) const {
    const auto w = split_words(v);
    if (w.size() < 5) fail("expected a center and at least three radii");
    VoidCurve c;
    c.center = {num(w[0]), num(w[1])};
    for (std::size_t i = 2; i < w.size(); ++i) c.radii.push_back(num(w[i]));
    c.inverted = inverted;
    return c;
  }

  void handle_line(std::string_view raw) {
    const auto hash = raw.find_first_of("#;");
    const std::string_view s = trim(hash == std::string_view::npos ? raw : raw.substr(0, hash));
    if (s.empty()) return;
    if (s.front() == '[') {
      if (s.back() != ']') fail("<header>", "unterminated section header", line_);
      section_ = std::string(trim(s.substr(1, s.size() - 2)));
      static const std::set<std::string> known{"domain", "grid",        "material",  "loads",
                                               "bcs",    "lattice",     "shell",     "constraints",
                                               "heaviside", "ks",       "mma",       "output"};
      if (!known.count(section_)) fail(section_, "unknown section", line_);
      return;
    }
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) fail(section_.empty() ? "<none>" : section_, "expected key = value", line_);
    const std::string name(trim(s.substr(0, eq)));
    if (section_.empty()) fail(name, "key outside any section", line_);
    key_ = section_ + "." + name;
    const auto it = handlers_.find(key_);
    if (it == handlers_.end()) fail("unknown key");
    lines_[key_] = line_;
    it->second(trim(s.substr(eq + 1)));
  }

  void finish() {
    for (const char* req : {"domain.length", "domain.height", "grid.nx", "grid.ny",
                            "lattice.cells_x", "lattice.cells_y", "shell.delta_d",
                            "constraints.v_bar", "constraints.v_lower"})
      if (!seen_.count(req)) fail(req, "missing required key", 0);

    auto& lat = cfg_.lattice;
    key_ = "lattice.cpf_beta";
    line_ = lines_.count(key_) ? lines_[key_] : 0;
    if (alphas_.size() != betas_.size()) fail("cpf_alpha and cpf_beta line counts differ");
    lat.cpfs.clear();
    for (std::size_t i = 0; i < alphas_.size(); ++i) {
      CPFCoefficients cpf;
      cpf.alpha = alphas_[i];
      cpf.beta = betas_[i];
      cpf.length = cfg_.length;
      cpf.height = cfg_.height;
      lat.cpfs.push_back(std::move(cpf));
    }
    if (lat.cpfs.empty())
      lat.cpfs.assign(lat.shared_cpf ? 1 : lat.prototype.size(),
                      CPFCoefficients::zeros(lat.n1, lat.n2, cfg_.length, cfg_.height));
    for (auto& p : lat.prototype) p.exponent = lat.exponent;
    for (auto& v : cfg_.shell.voids) v.spline_order = cfg_.shell.spline_order;

    try {
      cfg_.validate();
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      const auto colon = msg.find(": ");
      const std::string key = msg.substr(0, colon);
      auto it = lines_.find(key);
      if (it == lines_.end()) {
        // list keys are reported under their prefix
        for (auto j = lines_.begin(); j != lines_.end(); ++j)
          if (key.rfind(j->first, 0) == 0 || j->first.rfind(key, 0) == 0) it = j;
      }
      fail(key, colon == std::string::npos ? msg : msg.substr(colon + 2),
           it == lines_.end() ? 0 : it->second);
    }
  }

  std::string source_;
  ProblemConfig cfg_;
  std::map<std::string, Handler> handlers_;
  std::set<std::string> seen_;
  std::map<std::string, int> lines_;
  std::vector<std::vector<std::array<double, 2>>> alphas_, betas_;
  std::string section_;
  std::string key_;
  int line_ = 0;
};

}  // namespace

ProblemConfig parse_config_string(std::string_view text, const std::string& source) {
  return Parser(source).parse(text);
}

ProblemConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_string(ss.str(), path.string());
}

std::string serialize_config(const ProblemConfig& c) {
  std::ostringstream o;
  o << "[domain]\nname = " << c.name << "\nlength = " << fmt(c.length)
    << "\nheight = " << fmt(c.height) << "\n\n";
  o << "[grid]\nnx = " << c.nx << "\nny = " << c.ny << "\n\n";
  o << "[material]\nyoungs = " << fmt(c.material.youngs) << "\npoisson = " << fmt(c.material.poisson)
    << "\n\n";

  o << "[loads]\n";
  for (const auto& lc : c.loads) {
    o << "case = " << fmt(lc.weight) << "\n";
    for (const auto& l : lc.loads)
      o << "point = " << fmt(l.location.x) << " " << fmt(l.location.y) << " "
        << (l.direction == 0 ? "x" : "y") << " " << fmt(l.magnitude) << "\n";
  }
  o << "\n[bcs]\n";
  for (const auto& s : c.supports) {
    if (s.kind == SupportSpec::Kind::Edge)
      o << "edge = " << edge_name(s.edge) << " " << dof_name(s.fix_x, s.fix_y) << "\n";
    else
      o << "point = " << fmt(s.location.x) << " " << fmt(s.location.y) << " "
        << dof_name(s.fix_x, s.fix_y) << "\n";
  }

  const auto& lat = c.lattice;
  o << "\n[lattice]\ncells_x = " << lat.cells_x << "\ncells_y = " << lat.cells_y
    << "\nn1 = " << lat.n1 << "\nn2 = " << lat.n2 << "\nexponent = " << lat.exponent
    << "\nshared_cpf = " << fmt(lat.shared_cpf) << "\nfreeze_cpf = " << fmt(lat.freeze_cpf)
    << "\nmovable_centers = " << fmt(lat.movable_centers) << "\ncenter_lo = " << fmt(lat.center_lo)
    << "\ncenter_hi = " << fmt(lat.center_hi) << "\n";
  for (const auto& p : lat.prototype)
    o << "component = " << fmt(p.center.x) << " " << fmt(p.center.y) << " " << fmt(p.half_length)
      << " " << fmt(p.angle) << " " << fmt(p.t1) << " " << fmt(p.t2) << "\n";
  for (const auto& cpf : lat.cpfs) {
    o << "cpf_alpha =";
    for (const auto& a : cpf.alpha) o << " " << fmt(a[0]) << " " << fmt(a[1]);
    o << "\ncpf_beta =";
    for (const auto& b : cpf.beta) o << " " << fmt(b[0]) << " " << fmt(b[1]);
    o << "\n";
  }

  const auto& sh = c.shell;
  o << "\n[shell]\ndelta_d = " << fmt(sh.delta_d) << "\ncontrol_count = " << sh.control_count
    << "\nspline_order = " << sh.spline_order << "\nsamples_per_control = " << sh.samples_per_control
    << "\n";
  for (const auto& v : sh.voids) {
    o << (v.inverted ? "boundary = " : "void = ") << fmt(v.center.x) << " " << fmt(v.center.y);
    for (double d : v.radii) o << " " << fmt(d);
    o << "\n";
  }

  o << "\n[constraints]\nv_bar = " << fmt(c.constraints.v_bar) << "\nv_lower = "
    << fmt(c.constraints.v_lower) << "\ninfill_constraint = " << fmt(c.constraints.infill_constraint)
    << "\n\n";
  o << "[heaviside]\nepsilon_factor = " << fmt(c.heaviside.epsilon_factor)
    << "\nalpha = " << fmt(c.heaviside.alpha) << "\npenal = " << fmt(c.heaviside.penal) << "\n\n";
  o << "[ks]\nl_plus = " << fmt(c.ks.l_plus) << "\nl_minus = " << fmt(c.ks.l_minus) << "\n\n";
  o << "[mma]\nmax_iters = " << c.mma.max_iters << "\nmin_iters = " << c.mma.min_iters
    << "\ntolerance = " << fmt(c.mma.tolerance) << "\nmove_limit = " << fmt(c.mma.move_limit)
    << "\nasy_init = " << fmt(c.mma.asy_init) << "\nasy_incr = " << fmt(c.mma.asy_incr)
    << "\nasy_decr = " << fmt(c.mma.asy_decr) << "\nbound_ramp = " << c.mma.bound_ramp << "\n\n";
  o << "[output]\nhistory = " << fmt(c.output.history) << "\nraster = " << fmt(c.output.raster)
    << "\nboundaries = " << fmt(c.output.boundaries) << "\ncontrol_points = "
    << fmt(c.output.control_points) << "\nseed = " << c.output.seed << "\n";
  return o.str();
}

void write_config(const ProblemConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(path.string() + ": cannot write file");
  out << serialize_config(cfg);
  if (!out) throw ConfigError(path.string() + ": write failed");
}

}  // namespace shellfill
