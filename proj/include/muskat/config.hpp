#pragma once

#include <charconv>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "muskat/evolution.hpp"
#include "muskat/io.hpp"
#include "muskat/stability.hpp"

namespace muskat::io {

// Experiment configuration file format: one `key = value` per line, where a
// value is a number, a double-quoted string, or a bracketed numeric array.
// Full-line comments start with '#'; inline comments are not supported.
// Unknown keys are rejected.  Serialization is canonical (fixed key order,
// round-trip number formatting), so serialize(parse(text)) == text for any
// canonically written file.

using ConfigValue = std::variant<double, std::string, std::vector<double>>;

namespace detail {

inline std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_number(const std::string& token, int line_no) {
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw ConfigError("line " + std::to_string(line_no) + ": invalid number '" + token +
                      "'");
  return v;
}

}  // namespace detail

inline std::vector<std::pair<std::string, ConfigValue>> parse_config(
    const std::string& text) {
  std::vector<std::pair<std::string, ConfigValue>> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string raw =
        text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    const std::string line = detail::strip(raw);
    if (line.empty() || line[0] == '#') continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = detail::strip(line.substr(0, eq));
    const std::string val = detail::strip(line.substr(eq + 1));
    if (key.empty() || key.find_first_not_of(
                           "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_") !=
                           std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": invalid key '" + key + "'");
    for (const auto& [k, v] : out)
      if (k == key)
        throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key +
                          "'");
    if (val.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": missing value for '" + key +
                        "'");

    if (val.front() == '"') {
      if (val.size() < 2 || val.back() != '"' ||
          val.find('"', 1) != val.size() - 1)
        throw ConfigError("line " + std::to_string(line_no) + ": malformed string");
      out.emplace_back(key, val.substr(1, val.size() - 2));
    } else if (val.front() == '[') {
      if (val.back() != ']')
        throw ConfigError("line " + std::to_string(line_no) + ": malformed array");
      std::vector<double> arr;
      const std::string body = detail::strip(val.substr(1, val.size() - 2));
      std::size_t p = 0;
      while (p < body.size()) {
        std::size_t comma = body.find(',', p);
        if (comma == std::string::npos) comma = body.size();
        const std::string token = detail::strip(body.substr(p, comma - p));
        if (token.empty())
          throw ConfigError("line " + std::to_string(line_no) + ": empty array element");
        arr.push_back(detail::parse_number(token, line_no));
        p = comma + 1;
      }
      out.emplace_back(key, std::move(arr));
    } else {
      out.emplace_back(key, detail::parse_number(val, line_no));
    }
  }
  return out;
}

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::string model = "mu";
  double sigma = 1.0;
  double k1 = 1.0;
  double k2 = 1.0;
  double rho1 = 1.0;
  double rho2 = 2.0;
  double wall_radius = 2.0;
  std::vector<double> wall_center{0.0, 0.0};
  std::vector<double> centers_x{0.0};
  std::vector<double> centers_y{0.0};
  std::vector<double> radii{1.0};
  std::vector<double> nodes{49};
  std::vector<double> perturb_cos;  ///< flat triples: component, mode, amplitude
  std::vector<double> perturb_sin;  ///< flat triples: component, mode, amplitude
  double t_end = 1.0;
  double dt_safety = 0.25;
  double equilibrium_tol = 1e-8;
  double ball_tol_rel = 1e-3;
  double curvature_cap = 1e3;
  double tail_cap = 0.1;
  int output_every = 10;
  int max_steps = 20'000'000;
  int wall_nodes = 0;
  int spectrum_nodes = 33;
  int seed = 20260821;
  std::string out_dir = "out";

  PhysicalParams physical_params() const {
    PhysicalParams p;
    if (model == "mu") {
      p.model = Model::Mu;
    } else if (model == "mut") {
      p.model = Model::MuT;
    } else {
      throw ConfigError("model must be \"mu\" or \"mut\"");
    }
    p.sigma = sigma;
    p.k1 = k1;
    p.k2 = k2;
    p.rho1 = rho1;
    p.rho2 = rho2;
    p.validate();
    return p;
  }

  InterfaceSet interface_set() const {
    const std::size_t m = radii.size();
    if (centers_x.size() != m || centers_y.size() != m || nodes.size() != m || m == 0)
      throw ConfigError("centers_x, centers_y, radii, nodes must have equal nonzero length");
    std::vector<std::map<int, Cplx>> modes(m);
    const auto fold = [&](const std::vector<double>& triples, bool sine) {
      if (triples.size() % 3 != 0)
        throw ConfigError("perturbation lists must be flat (component, mode, amplitude) triples");
      for (std::size_t i = 0; i < triples.size(); i += 3) {
        const int comp = static_cast<int>(triples[i]);
        const int mode = static_cast<int>(triples[i + 1]);
        if (comp < 0 || comp >= static_cast<int>(m))
          throw ConfigError("perturbation component index out of range");
        if (mode < 1) throw ConfigError("perturbation modes must be positive");
        // Heights are Re(c e^{i m theta}): cosine feeds the real part,
        // sine amplitude s corresponds to coefficient -i s.
        modes[comp][mode] += sine ? Cplx(0.0, -triples[i + 2]) : Cplx(triples[i + 2], 0.0);
      }
    };
    fold(perturb_cos, false);
    fold(perturb_sin, true);

    InterfaceSet set;
    for (std::size_t j = 0; j < m; ++j) {
      const Vec2 center(centers_x[j], centers_y[j]);
      const int n = static_cast<int>(nodes[j]);
      if (modes[j].empty()) {
        set.components.push_back(InterfaceCurve::circle(center, radii[j], n));
      } else {
        set.components.push_back(make_perturbed_circle(center, radii[j], modes[j], n));
      }
    }
    set.wall_radius = wall_radius;
    if (wall_center.size() != 2) throw ConfigError("wall_center must have two entries");
    set.wall_center = Vec2(wall_center[0], wall_center[1]);
    return set;
  }

  SimConfig sim_config() const {
    SimConfig c;
    c.params = physical_params();
    c.initial = interface_set();
    c.dt_safety = dt_safety;
    c.t_end = t_end;
    c.equilibrium_tol = equilibrium_tol;
    c.ball_tol_rel = ball_tol_rel;
    c.curvature_cap = curvature_cap;
    c.tail_cap = tail_cap;
    c.output_every = output_every;
    c.max_steps = max_steps;
    c.wall_nodes = wall_nodes;
    c.validate();
    return c;
  }

  /// The unperturbed circles as an equilibrium (perturbations are a
  /// simulation concern and are ignored here).
  EquilibriumConfig equilibrium_config() const {
    EquilibriumConfig eq;
    const std::size_t m = radii.size();
    if (centers_x.size() != m || centers_y.size() != m || m == 0)
      throw ConfigError("centers_x, centers_y, radii must have equal nonzero length");
    for (std::size_t j = 0; j < m; ++j)
      eq.circles.push_back(Circle{Vec2(centers_x[j], centers_y[j]), radii[j]});
    eq.wall_radius = wall_radius;
    if (wall_center.size() != 2) throw ConfigError("wall_center must have two entries");
    eq.wall_center = Vec2(wall_center[0], wall_center[1]);
    eq.model = physical_params().model;
    eq.validate();
    return eq;
  }

  static ExperimentConfig from_text(const std::string& text) {
    ExperimentConfig c;
    bool saw_version = false;
    const auto as_number = [](const std::string& key, const ConfigValue& v) {
      if (!std::holds_alternative<double>(v))
        throw ConfigError("key '" + key + "' must be a number");
      return std::get<double>(v);
    };
    const auto as_int = [&](const std::string& key, const ConfigValue& v) {
      const double d = as_number(key, v);
      const int i = static_cast<int>(d);
      if (static_cast<double>(i) != d)
        throw ConfigError("key '" + key + "' must be an integer");
      return i;
    };
    const auto as_string = [](const std::string& key, const ConfigValue& v) {
      if (!std::holds_alternative<std::string>(v))
        throw ConfigError("key '" + key + "' must be a string");
      return std::get<std::string>(v);
    };
    const auto as_array = [](const std::string& key, const ConfigValue& v) {
      if (!std::holds_alternative<std::vector<double>>(v))
        throw ConfigError("key '" + key + "' must be an array");
      return std::get<std::vector<double>>(v);
    };
    for (const auto& [key, value] : parse_config(text)) {
      if (key == "schema_version") {
        if (as_int(key, value) != kSchemaVersion)
          throw ConfigError("unsupported schema_version");
        saw_version = true;
      } else if (key == "model") {
        c.model = as_string(key, value);
      } else if (key == "sigma") {
        c.sigma = as_number(key, value);
      } else if (key == "k1") {
        c.k1 = as_number(key, value);
      } else if (key == "k2") {
        c.k2 = as_number(key, value);
      } else if (key == "rho1") {
        c.rho1 = as_number(key, value);
      } else if (key == "rho2") {
        c.rho2 = as_number(key, value);
      } else if (key == "wall_radius") {
        c.wall_radius = as_number(key, value);
      } else if (key == "wall_center") {
        c.wall_center = as_array(key, value);
      } else if (key == "centers_x") {
        c.centers_x = as_array(key, value);
      } else if (key == "centers_y") {
        c.centers_y = as_array(key, value);
      } else if (key == "radii") {
        c.radii = as_array(key, value);
      } else if (key == "nodes") {
        c.nodes = as_array(key, value);
      } else if (key == "perturb_cos") {
        c.perturb_cos = as_array(key, value);
      } else if (key == "perturb_sin") {
        c.perturb_sin = as_array(key, value);
      } else if (key == "t_end") {
        c.t_end = as_number(key, value);
      } else if (key == "dt_safety") {
        c.dt_safety = as_number(key, value);
      } else if (key == "equilibrium_tol") {
        c.equilibrium_tol = as_number(key, value);
      } else if (key == "ball_tol_rel") {
        c.ball_tol_rel = as_number(key, value);
      } else if (key == "curvature_cap") {
        c.curvature_cap = as_number(key, value);
      } else if (key == "tail_cap") {
        c.tail_cap = as_number(key, value);
      } else if (key == "output_every") {
        c.output_every = as_int(key, value);
      } else if (key == "max_steps") {
        c.max_steps = as_int(key, value);
      } else if (key == "wall_nodes") {
        c.wall_nodes = as_int(key, value);
      } else if (key == "spectrum_nodes") {
        c.spectrum_nodes = as_int(key, value);
      } else if (key == "seed") {
        c.seed = as_int(key, value);
      } else if (key == "out_dir") {
        c.out_dir = as_string(key, value);
      } else {
        throw ConfigError("unknown key '" + key + "'");
      }
    }
    if (!saw_version) throw ConfigError("missing schema_version");
    return c;
  }

  std::string to_text() const {
    const auto num = [](double v) { return format_double(v); };
    const auto arr = [&](const std::vector<double>& a) {
      std::string s = "[";
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ", ";
        s += num(a[i]);
      }
      return s + "]";
    };
    std::string s;
    s += "schema_version = " + std::to_string(schema_version) + "\n";
    s += "model = \"" + model + "\"\n";
    s += "sigma = " + num(sigma) + "\n";
    s += "k1 = " + num(k1) + "\n";
    s += "k2 = " + num(k2) + "\n";
    s += "rho1 = " + num(rho1) + "\n";
    s += "rho2 = " + num(rho2) + "\n";
    s += "wall_radius = " + num(wall_radius) + "\n";
    s += "wall_center = " + arr(wall_center) + "\n";
    s += "centers_x = " + arr(centers_x) + "\n";
    s += "centers_y = " + arr(centers_y) + "\n";
    s += "radii = " + arr(radii) + "\n";
    s += "nodes = " + arr(nodes) + "\n";
    s += "perturb_cos = " + arr(perturb_cos) + "\n";
    s += "perturb_sin = " + arr(perturb_sin) + "\n";
    s += "t_end = " + num(t_end) + "\n";
    s += "dt_safety = " + num(dt_safety) + "\n";
    s += "equilibrium_tol = " + num(equilibrium_tol) + "\n";
    s += "ball_tol_rel = " + num(ball_tol_rel) + "\n";
    s += "curvature_cap = " + num(curvature_cap) + "\n";
    s += "tail_cap = " + num(tail_cap) + "\n";
    s += "output_every = " + std::to_string(output_every) + "\n";
    s += "max_steps = " + std::to_string(max_steps) + "\n";
    s += "wall_nodes = " + std::to_string(wall_nodes) + "\n";
    s += "spectrum_nodes = " + std::to_string(spectrum_nodes) + "\n";
    s += "seed = " + std::to_string(seed) + "\n";
    s += "out_dir = \"" + out_dir + "\"\n";
    return s;
  }
};

}  // namespace muskat::io
