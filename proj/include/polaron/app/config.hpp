#pragma once

// Run configuration: JSON in, validated RunConfig out, and a normalised echo
// for manifests. Physical parameters may be scalars or lists; lists span a
// cartesian grid of parameter points.

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "polaron/bath.hpp"
#include "polaron/bloch.hpp"
#include "polaron/dynamics.hpp"
#include "polaron/errors.hpp"

namespace polaron::app {

using Json = nlohmann::json;

struct CrossoverSpec {
  std::string axis = "omega_c";  // omega_c | mu | inverse_mu | alpha | V
  std::vector<double> values;
  std::string series;  // optional second axis, same names
  std::vector<double> series_values;
  double T_lo = 0.2;
  double T_hi = 100.0;
  std::size_t scan_points = 32;
  bool approx = true;
};

struct BathGridSpec {
  double omega_max = 20.0;
  std::size_t n_omega = 201;
  double tau_max = 10.0;
  std::size_t n_tau = 101;
  bool responses = true;
};

struct RunConfig {
  std::vector<double> epsilon{0.0};
  std::vector<double> V;
  std::vector<double> alpha;
  std::vector<double> omega_c;
  std::vector<double> mu;
  std::vector<double> temperature;
  int dimension = 3;
  std::string regime = "auto";
  double t_max = 30.0;
  std::size_t n_points = 601;
  BlochVector initial = BlochVector::donor();
  double rel_tol = 1e-11;
  double abs_tol = 1e-15;
  std::string out_dir = ".";
  std::string prefix = "run";
  std::size_t threads = 1;
  std::size_t max_points = 10000;
  CrossoverSpec crossover;
  BathGridSpec bath_grid;
};

/// One parameter point of the grid.
struct Point {
  double epsilon = 0.0;
  double V = 0.5;
  double alpha = 0.05;
  double omega_c = 4.0;
  double mu = 0.0;
  double temperature = 1.0;

  SystemModel system() const { return {epsilon, V}; }
  BathModel bath(int dimension) const { return {alpha, omega_c, dimension, mu}; }
  ThermalState thermal() const { return {temperature}; }
};

inline const std::vector<std::string>& regime_names() {
  static const std::vector<std::string> names{"auto", "resonant", "full", "weak", "high_temperature"};
  return names;
}

inline Regime parse_regime(const std::string& name) {
  if (name == "resonant") return Regime::resonant;
  if (name == "full") return Regime::full;
  if (name == "weak") return Regime::weak;
  if (name == "high_temperature") return Regime::high_temperature;
  throw ConfigError("unknown regime '" + name + "'");
}

/// auto means resonant on resonance, full otherwise.
inline Regime resolve_regime(const std::string& name, double epsilon) {
  if (name == "auto") return epsilon == 0.0 ? Regime::resonant : Regime::full;
  return parse_regime(name);
}

namespace detail {

inline void expect_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
}

inline double number(const Json& j, const std::string& where, bool allow_inf = false) {
  if (j.is_number()) return j.get<double>();
  if (allow_inf && j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity" || s == "Infinity") return std::numeric_limits<double>::infinity();
  }
  throw ConfigError(where + " must be a number" + (allow_inf ? " or \"inf\"" : ""));
}

inline std::vector<double> numbers(const Json& j, const std::string& where, bool allow_inf = false,
                                   bool allow_empty = false) {
  std::vector<double> out;
  if (j.is_array()) {
    if (j.empty() && !allow_empty) throw ConfigError(where + " must not be an empty list");
    for (std::size_t i = 0; i < j.size(); ++i)
      out.push_back(number(j[i], where + "[" + std::to_string(i) + "]", allow_inf));
  } else {
    out.push_back(number(j, where, allow_inf));
  }
  return out;
}

inline std::size_t count(const Json& j, const std::string& where) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ConfigError(where + " must be a non-negative integer");
  return j.get<std::size_t>();
}

inline std::string text(const Json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + " must be a string");
  return j.get<std::string>();
}

inline bool flag(const Json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + " must be true or false");
  return j.get<bool>();
}

template <class Pred>
void require_all(const std::vector<double>& v, Pred ok, const std::string& what) {
  for (double x : v)
    if (!ok(x)) throw ConfigError(what);
}

inline Json number_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

inline Json list_json(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number_json(x));
  return a;
}

}  // namespace detail

/// Checks cross-field invariants; called after parsing and after CLI overrides.
inline void validate(const RunConfig& c) {
  using detail::require_all;
  auto finite = [](double x) { return std::isfinite(x); };
  require_all(c.epsilon, finite, "system.epsilon must be finite");
  require_all(c.V, [](double x) { return std::isfinite(x) && x > 0.0; }, "system.V must be finite and > 0");
  require_all(c.alpha, [](double x) { return std::isfinite(x) && x >= 0.0; }, "bath.alpha must be finite and >= 0");
  require_all(c.omega_c, [](double x) { return std::isfinite(x) && x > 0.0; }, "bath.omega_c must be finite and > 0");
  require_all(c.mu, [](double x) { return x >= 0.0; }, "bath.mu must be >= 0 or \"inf\"");
  require_all(c.temperature, [](double x) { return std::isfinite(x) && x > 0.0; },
              "temperature must be finite and > 0");
  if (c.dimension < 1 || c.dimension > 3) throw ConfigError("bath.dimension must be 1, 2 or 3");
  bool known = false;
  for (const auto& r : regime_names()) known = known || r == c.regime;
  if (!known) throw ConfigError("regime must be one of auto, resonant, full, weak, high_temperature");
  for (double e : c.epsilon) {
    if (c.regime == "resonant" && e != 0.0) throw ConfigError("regime resonant requires epsilon = 0");
    if (c.regime == "high_temperature" && e == 0.0)
      throw ConfigError("regime high_temperature requires epsilon != 0");
  }
  if (!(c.t_max > 0.0) || !std::isfinite(c.t_max)) throw ConfigError("time.t_max must be finite and > 0");
  if (c.n_points < 2) throw ConfigError("time.n_points must be >= 2");
  if (c.n_points > 10'000'000) throw ConfigError("time.n_points must be <= 10000000");
  const double norm = std::sqrt(c.initial.ax * c.initial.ax + c.initial.ay * c.initial.ay + c.initial.az * c.initial.az);
  if (!std::isfinite(norm) || norm > 1.0 + 1e-12) throw ConfigError("initial_state must have length <= 1");
  if (!(c.rel_tol > 0.0) || !(c.abs_tol > 0.0)) throw ConfigError("tolerances must be > 0");
  if (c.threads < 1) throw ConfigError("threads must be >= 1");
  if (c.max_points < 1) throw ConfigError("max_points must be >= 1");
  if (c.prefix.empty() || c.prefix.find('/') != std::string::npos)
    throw ConfigError("output.prefix must be a non-empty file name stem");
  const auto& x = c.crossover;
  if (!(x.T_lo > 0.0) || !(x.T_hi > x.T_lo) || !std::isfinite(x.T_hi))
    throw ConfigError("crossover bracket must satisfy 0 < T_lo < T_hi < inf");
  if (x.scan_points < 2) throw ConfigError("crossover.scan_points must be >= 2");
  const auto& g = c.bath_grid;
  if (!(g.omega_max > 0.0) || !std::isfinite(g.omega_max) || g.n_omega < 2)
    throw ConfigError("bath_grid needs omega_max > 0 and n_omega >= 2");
  if (!(g.tau_max > 0.0) || !std::isfinite(g.tau_max) || g.n_tau < 2)
    throw ConfigError("bath_grid needs tau_max > 0 and n_tau >= 2");
}

inline RunConfig parse_config(const Json& j) {
  using namespace detail;
  expect_keys(j, {"system", "bath", "temperature", "regime", "time", "initial_state", "tolerances", "output",
                  "threads", "max_points", "crossover", "bath_grid"},
              "config");
  RunConfig c;
  if (!j.contains("system")) throw ConfigError("missing required key 'system'");
  if (!j.contains("bath")) throw ConfigError("missing required key 'bath'");

  const auto& s = j["system"];
  expect_keys(s, {"epsilon", "V"}, "system");
  if (!s.contains("V")) throw ConfigError("missing required key 'system.V'");
  c.V = numbers(s["V"], "system.V");
  if (s.contains("epsilon")) c.epsilon = numbers(s["epsilon"], "system.epsilon");

  const auto& b = j["bath"];
  expect_keys(b, {"alpha", "omega_c", "mu", "dimension"}, "bath");
  for (const char* key : {"alpha", "omega_c", "mu"})
    if (!b.contains(key)) throw ConfigError(std::string("missing required key 'bath.") + key + "'");
  c.alpha = numbers(b["alpha"], "bath.alpha");
  c.omega_c = numbers(b["omega_c"], "bath.omega_c");
  c.mu = numbers(b["mu"], "bath.mu", true);
  if (b.contains("dimension")) c.dimension = static_cast<int>(count(b["dimension"], "bath.dimension"));

  if (j.contains("temperature")) c.temperature = numbers(j["temperature"], "temperature");
  if (j.contains("regime")) c.regime = text(j["regime"], "regime");

  if (j.contains("time")) {
    const auto& t = j["time"];
    expect_keys(t, {"t_max", "n_points"}, "time");
    if (t.contains("t_max")) c.t_max = number(t["t_max"], "time.t_max");
    if (t.contains("n_points")) c.n_points = count(t["n_points"], "time.n_points");
  }
  if (j.contains("initial_state")) {
    const auto& a = j["initial_state"];
    expect_keys(a, {"ax", "ay", "az", "frame"}, "initial_state");
    BlochVector v{0.0, 0.0, 0.0, Frame::polaron};
    if (a.contains("ax")) v.ax = number(a["ax"], "initial_state.ax");
    if (a.contains("ay")) v.ay = number(a["ay"], "initial_state.ay");
    if (a.contains("az")) v.az = number(a["az"], "initial_state.az");
    if (a.contains("frame")) {
      const auto f = text(a["frame"], "initial_state.frame");
      if (f == "lab") {
        v.frame = Frame::lab;
      } else if (f != "polaron") {
        throw ConfigError("initial_state.frame must be \"polaron\" or \"lab\"");
      }
    }
    c.initial = v;
  }
  if (j.contains("tolerances")) {
    const auto& t = j["tolerances"];
    expect_keys(t, {"rel_tol", "abs_tol"}, "tolerances");
    if (t.contains("rel_tol")) c.rel_tol = number(t["rel_tol"], "tolerances.rel_tol");
    if (t.contains("abs_tol")) c.abs_tol = number(t["abs_tol"], "tolerances.abs_tol");
  }
  if (j.contains("output")) {
    const auto& o = j["output"];
    expect_keys(o, {"directory", "prefix"}, "output");
    if (o.contains("directory")) c.out_dir = text(o["directory"], "output.directory");
    if (o.contains("prefix")) c.prefix = text(o["prefix"], "output.prefix");
  }
  if (j.contains("threads")) c.threads = count(j["threads"], "threads");
  if (j.contains("max_points")) c.max_points = count(j["max_points"], "max_points");

  if (j.contains("crossover")) {
    const auto& x = j["crossover"];
    expect_keys(x, {"axis", "values", "series", "series_values", "T_lo", "T_hi", "scan_points", "approx"},
                "crossover");
    auto& cx = c.crossover;
    if (x.contains("axis")) cx.axis = text(x["axis"], "crossover.axis");
    if (x.contains("values")) cx.values = numbers(x["values"], "crossover.values", true, true);
    if (x.contains("series")) cx.series = text(x["series"], "crossover.series");
    if (x.contains("series_values")) cx.series_values = numbers(x["series_values"], "crossover.series_values", true, true);
    if (x.contains("T_lo")) cx.T_lo = number(x["T_lo"], "crossover.T_lo");
    if (x.contains("T_hi")) cx.T_hi = number(x["T_hi"], "crossover.T_hi");
    if (x.contains("scan_points")) cx.scan_points = count(x["scan_points"], "crossover.scan_points");
    if (x.contains("approx")) cx.approx = flag(x["approx"], "crossover.approx");
  }
  if (j.contains("bath_grid")) {
    const auto& g = j["bath_grid"];
    expect_keys(g, {"omega_max", "n_omega", "tau_max", "n_tau", "responses"}, "bath_grid");
    auto& bg = c.bath_grid;
    if (g.contains("omega_max")) bg.omega_max = number(g["omega_max"], "bath_grid.omega_max");
    if (g.contains("n_omega")) bg.n_omega = count(g["n_omega"], "bath_grid.n_omega");
    if (g.contains("tau_max")) bg.tau_max = number(g["tau_max"], "bath_grid.tau_max");
    if (g.contains("n_tau")) bg.n_tau = count(g["n_tau"], "bath_grid.n_tau");
    if (g.contains("responses")) bg.responses = flag(g["responses"], "bath_grid.responses");
  }
  validate(c);
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  Json j;
  try {
    j = Json::parse(buffer.str());
  } catch (const Json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

/// Normalised echo: every field, defaults filled in, lists always as arrays.
inline Json to_json(const RunConfig& c) {
  using detail::list_json;
  Json j;
  j["system"] = {{"epsilon", list_json(c.epsilon)}, {"V", list_json(c.V)}};
  j["bath"] = {{"alpha", list_json(c.alpha)},
               {"omega_c", list_json(c.omega_c)},
               {"mu", list_json(c.mu)},
               {"dimension", c.dimension}};
  j["temperature"] = list_json(c.temperature);
  j["regime"] = c.regime;
  j["time"] = {{"t_max", c.t_max}, {"n_points", c.n_points}};
  j["initial_state"] = {{"ax", c.initial.ax},
                        {"ay", c.initial.ay},
                        {"az", c.initial.az},
                        {"frame", c.initial.frame == Frame::lab ? "lab" : "polaron"}};
  j["tolerances"] = {{"rel_tol", c.rel_tol}, {"abs_tol", c.abs_tol}};
  j["output"] = {{"directory", c.out_dir}, {"prefix", c.prefix}};
  j["threads"] = c.threads;
  j["max_points"] = c.max_points;
  const auto& x = c.crossover;
  j["crossover"] = {{"axis", x.axis},
                    {"values", list_json(x.values)},
                    {"series", x.series},
                    {"series_values", list_json(x.series_values)},
                    {"T_lo", x.T_lo},
                    {"T_hi", x.T_hi},
                    {"scan_points", x.scan_points},
                    {"approx", x.approx}};
  const auto& g = c.bath_grid;
  j["bath_grid"] = {{"omega_max", g.omega_max},
                    {"n_omega", g.n_omega},
                    {"tau_max", g.tau_max},
                    {"n_tau", g.n_tau},
                    {"responses", g.responses}};
  return j;
}

/// Cartesian product, temperature varying fastest.
inline std::vector<Point> grid_points(const RunConfig& c) {
  std::size_t n = 1;
  for (const auto* axis : {&c.epsilon, &c.V, &c.alpha, &c.omega_c, &c.mu, &c.temperature}) {
    if (axis->empty()) throw ConfigError("parameter list is empty; is temperature set?");
    n *= axis->size();
    if (n > c.max_points)
      throw ConfigError("grid has more than max_points = " + std::to_string(c.max_points) + " points");
  }
  std::vector<Point> out;
  out.reserve(n);
  for (double e : c.epsilon)
    for (double v : c.V)
      for (double a : c.alpha)
        for (double w : c.omega_c)
          for (double m : c.mu)
            for (double t : c.temperature) out.push_back({e, v, a, w, m, t});
  return out;
}

}  // namespace polaron::app
