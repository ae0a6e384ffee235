#pragma once

// The four CLI commands. run_* computes in memory; cmd_* writes CSV files
// plus a JSON manifest into the output directory and returns an exit code.

#include <algorithm>
#include <array>
#include <chrono>
#include <complex>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "polaron/app/config.hpp"
#include "polaron/app/output.hpp"
#include "polaron/bath.hpp"
#include "polaron/bloch.hpp"
#include "polaron/correlations.hpp"
#include "polaron/crossover.hpp"
#include "polaron/dynamics.hpp"

#ifndef POLARON_VERSION
#define POLARON_VERSION "0.0.0"
#endif

namespace polaron::app {

enum ExitCode : int { kSuccess = 0, kConfigError = 2, kNumericalFailure = 3, kPartialFailure = 4 };

/// 0 when nothing failed, 3 when everything did, 4 in between.
inline int exit_code_for(std::size_t failed, std::size_t total) {
  if (failed == 0) return kSuccess;
  return failed == total ? kNumericalFailure : kPartialFailure;
}

inline BuildOptions build_options(const RunConfig& c, ResponseCache* cache = nullptr) {
  BuildOptions o;
  o.response.rel_tol = c.rel_tol;
  o.response.abs_tol = c.abs_tol;
  o.cache = cache;
  return o;
}

inline std::string describe(const Point& p) {
  return "epsilon=" + format_number(p.epsilon) + ", V=" + format_number(p.V) + ", alpha=" + format_number(p.alpha) +
         ", omega_c=" + format_number(p.omega_c) + ", mu=" + format_number(p.mu) +
         ", T=" + format_number(p.temperature);
}

inline Json point_json(const Point& p) {
  return {{"epsilon", json_number(p.epsilon)}, {"V", json_number(p.V)},
          {"alpha", json_number(p.alpha)},     {"omega_c", json_number(p.omega_c)},
          {"mu", json_number(p.mu)},           {"temperature", json_number(p.temperature)}};
}

/// File-name suffix built from the axes that actually vary; temperature is
/// always included when `with_T` is set.
inline std::string point_label(const RunConfig& c, const Point& p, bool with_T) {
  std::string out;
  auto add = [&](const char* tag, const std::vector<double>& axis, double v, bool force = false) {
    if (axis.size() > 1 || force) out += std::string("_") + tag + format_number(v);
  };
  add("eps", c.epsilon, p.epsilon);
  add("V", c.V, p.V);
  add("alpha", c.alpha, p.alpha);
  add("wc", c.omega_c, p.omega_c);
  add("mu", c.mu, p.mu);
  add("T", c.temperature, p.temperature, with_T);
  return out;
}

inline Json telemetry_json(const Generator& g) {
  const auto& t = g.telemetry;
  return {{"V_over_omega_c", json_number(t.V_over_omega_c)},
          {"beta_VR", json_number(t.beta_VR)},
          {"VR_over_epsilon", json_number(t.VR_over_epsilon)},
          {"phi0", json_number(t.phi0)},
          {"x", json_number(t.x)},
          {"y", json_number(t.y)},
          {"validity", json_number(t.validity)},
          {"B", json_number(g.polaron.B)},
          {"V_R", json_number(g.polaron.V_R)},
          {"eta", json_number(g.polaron.eta)}};
}

inline std::array<std::complex<double>, 3> sorted_eigenvalues(const Generator& g) {
  auto q = eigenvalues(g);
  std::sort(q.begin(), q.end(), [](auto a, auto b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return q;
}

inline Json manifest_base(const std::string& command, const RunConfig& c) {
  return {{"artifact", "polaron_transfer"},
          {"version", POLARON_VERSION},
          {"command", command},
          {"config", to_json(c)},
          {"frame", "alpha_x_lab and alpha_y_lab are lab-frame coherences; polaron-frame values are these divided by B"}};
}

using Clock = std::chrono::steady_clock;

/// Everything but "timing" is a function of config and version only.
inline void write_manifest(const RunConfig& c, Json manifest, Clock::time_point start) {
  manifest["timing"] = {{"wall_seconds", std::chrono::duration<double>(Clock::now() - start).count()}};
  write_text(std::filesystem::path(c.out_dir) / (c.prefix + "_manifest.json"), manifest.dump(2) + "\n");
}

// ---------------------------------------------------------------- dynamics

struct DynamicsSeries {
  Point point;
  Generator generator;
  BlochTrajectory trajectory;
  std::vector<std::string> warnings;
  std::string file;
};

struct DynamicsRun {
  std::vector<DynamicsSeries> series;
};

inline DynamicsRun run_dynamics(const RunConfig& c) {
  validate(c);
  const auto points = grid_points(c);
  const auto times = uniform_times(c.t_max, c.n_points);
  ResponseCache cache;
  const auto opts = build_options(c, &cache);
  DynamicsRun run;
  run.series.resize(points.size());
  const auto errors = parallel_for(points.size(), c.threads, [&](std::size_t i) {
    auto& s = run.series[i];
    s.point = points[i];
    const Regime regime = resolve_regime(c.regime, s.point.epsilon);
    s.generator = build(regime, s.point.system(), s.point.bath(c.dimension), s.point.thermal(), opts);
    s.trajectory = evolve(s.generator, c.initial, times);
    s.warnings = s.generator.warnings;
    if (s.trajectory.positivity_violations > 0)
      s.warnings.push_back(std::to_string(s.trajectory.positivity_violations) + " samples with |alpha_z| > 1");
    if (s.generator.polaron.B == 0.0) s.warnings.emplace_back("B underflows to 0; polaron-frame columns are nan");
    s.file = c.prefix + point_label(c, s.point, true) + ".csv";
  });
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (errors[i]) throw Error("dynamics failed at " + describe(points[i]) + ": " + describe(errors[i]));
  return run;
}

inline Table dynamics_table(const DynamicsSeries& s) {
  Table t;
  t.header = {"t", "alpha_x_lab", "alpha_y_lab", "alpha_z", "alpha_x_polaron", "alpha_y_polaron"};
  const double B = s.generator.polaron.B;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < s.trajectory.times.size(); ++k) {
    const auto& a = s.trajectory.states[k];
    t.add({format_number(s.trajectory.times[k]), format_number(a.ax), format_number(a.ay), format_number(a.az),
           format_number(B > 0.0 ? a.ax / B : nan), format_number(B > 0.0 ? a.ay / B : nan)});
  }
  return t;
}

inline int cmd_dynamics(const RunConfig& c) {
  const auto start = Clock::now();
  const auto run = run_dynamics(c);
  auto manifest = manifest_base("dynamics", c);
  Json outputs = Json::array();
  std::set<std::string> all_warnings;
  for (const auto& s : run.series) {
    write_text(std::filesystem::path(c.out_dir) / s.file, dynamics_table(s).csv());
    Json eig = Json::array();
    for (auto q : sorted_eigenvalues(s.generator)) eig.push_back({json_number(q.real()), json_number(q.imag())});
    Json steady = nullptr;
    if (s.trajectory.steady) {
      const auto& v = *s.trajectory.steady;
      steady = {json_number(v.ax), json_number(v.ay), json_number(v.az)};
    }
    outputs.push_back({{"file", s.file},
                       {"parameters", point_json(s.point)},
                       {"regime", to_string(s.generator.regime)},
                       {"telemetry", telemetry_json(s.generator)},
                       {"evolve_method", s.trajectory.method == EvolveMethod::ode ? "ode" : "eigen"},
                       {"steady_state_lab", steady},
                       {"eigenvalues", eig},
                       {"positivity_violations", s.trajectory.positivity_violations},
                       {"warnings", s.warnings}});
    all_warnings.insert(s.warnings.begin(), s.warnings.end());
  }
  manifest["outputs"] = outputs;
  manifest["warnings"] = std::vector<std::string>(all_warnings.begin(), all_warnings.end());
  write_manifest(c, manifest, start);
  return kSuccess;
}

// --------------------------------------------------------------- crossover

inline const std::vector<std::string>& crossover_axes() {
  static const std::vector<std::string> axes{"omega_c", "mu", "inverse_mu", "alpha", "V"};
  return axes;
}

/// inverse_mu = 0 is the fully correlated limit.
inline void set_axis(Point& p, const std::string& axis, double value) {
  if (axis == "omega_c") {
    p.omega_c = value;
  } else if (axis == "mu") {
    p.mu = value;
  } else if (axis == "inverse_mu") {
    p.mu = value == 0.0 ? kInfiniteCorrelation : 1.0 / value;
  } else if (axis == "alpha") {
    p.alpha = value;
  } else if (axis == "V") {
    p.V = value;
  } else {
    throw ConfigError("unknown crossover axis '" + axis + "'");
  }
}

struct CrossoverRow {
  double axis_value = 0.0;
  double series_value = 0.0;
  Point point;
  std::optional<CrossoverResult> full;
  std::optional<CrossoverResult> approx;
  std::string status_full = "ok";
  std::string status_approx = "ok";
  std::string message;
  bool failed = false;
};

struct CrossoverRun {
  std::vector<CrossoverRow> rows;
  std::size_t failed = 0;
};

inline CrossoverRun run_crossover(const RunConfig& c) {
  validate(c);
  const auto& x = c.crossover;
  auto known = [](const std::string& a) {
    const auto& axes = crossover_axes();
    return std::find(axes.begin(), axes.end(), a) != axes.end();
  };
  if (!known(x.axis)) throw ConfigError("crossover.axis must be one of omega_c, mu, inverse_mu, alpha, V");
  if (x.values.empty()) throw ConfigError("crossover.values must list the sweep values");
  if (x.series.empty() != x.series_values.empty())
    throw ConfigError("crossover.series and crossover.series_values go together");
  if (!x.series.empty() && !known(x.series)) throw ConfigError("crossover.series must name a crossover axis");
  if (x.series == x.axis) throw ConfigError("crossover.series must differ from crossover.axis");
  auto mu_axis = [](const std::string& a) { return a == "mu" || a == "inverse_mu"; };
  if (mu_axis(x.axis) && mu_axis(x.series)) throw ConfigError("crossover axis and series both set mu");
  for (double e : c.epsilon)
    if (e != 0.0) throw ConfigError("crossover requires epsilon = 0");
  auto scalar = [&](const std::vector<double>& v, const std::string& name, bool swept) {
    if (!swept && v.size() != 1) throw ConfigError(name + " must be a scalar for crossover; sweep it via crossover.axis");
  };
  auto swept = [&](const std::string& name) {
    return x.axis == name || x.series == name || (name == "mu" && (mu_axis(x.axis) || mu_axis(x.series)));
  };
  scalar(c.V, "system.V", swept("V"));
  scalar(c.alpha, "bath.alpha", swept("alpha"));
  scalar(c.omega_c, "bath.omega_c", swept("omega_c"));
  scalar(c.mu, "bath.mu", swept("mu"));
  for (double v : x.values)
    if (!(v >= 0.0) || (x.axis != "inverse_mu" && x.axis != "mu" && !std::isfinite(v)))
      throw ConfigError("crossover.values must be non-negative");
  std::vector<double> series = x.series_values.empty() ? std::vector<double>{0.0} : x.series_values;
  if (series.size() * x.values.size() > c.max_points)
    throw ConfigError("crossover grid has more than max_points = " + std::to_string(c.max_points) + " points");

  Point base{0.0, c.V.front(), c.alpha.front(), c.omega_c.front(), c.mu.front(), 1.0};
  CrossoverRun run;
  for (double sv : series) {
    for (double av : x.values) {
      CrossoverRow r;
      r.axis_value = av;
      r.series_value = sv;
      r.point = base;
      if (!x.series.empty()) set_axis(r.point, x.series, sv);
      set_axis(r.point, x.axis, av);
      run.rows.push_back(r);
    }
  }
  CrossoverOptions opts;
  opts.T_lo = x.T_lo;
  opts.T_hi = x.T_hi;
  opts.scan_points = x.scan_points;
  opts.build = build_options(c);
  auto solve = [&](auto&& fn, std::optional<CrossoverResult>& out, std::string& status, CrossoverRow& row) {
    try {
      out = fn();
    } catch (const NoCrossing& e) {
      status = e.coherent_everywhere() ? "coherent_everywhere" : "incoherent_everywhere";
    } catch (const UnsupportedDimension& e) {
      status = "unsupported";
      row.message += e.what();
    } catch (const std::exception& e) {
      status = "error";
      row.failed = true;
      if (!row.message.empty()) row.message += "; ";
      row.message += e.what();
    }
  };
  const auto errors = parallel_for(run.rows.size(), c.threads, [&](std::size_t i) {
    auto& r = run.rows[i];
    const auto sys = r.point.system();
    const auto bath = r.point.bath(c.dimension);
    solve([&] { return solve_Tc_full(sys, bath, opts); }, r.full, r.status_full, r);
    if (x.approx) {
      solve([&] { return solve_Tc_approx(sys, bath, opts); }, r.approx, r.status_approx, r);
    } else {
      r.status_approx = "disabled";
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) {
      run.rows[i].failed = true;
      run.rows[i].message = describe(errors[i]);
    }
    if (run.rows[i].failed) ++run.failed;
  }
  return run;
}

inline Table crossover_table(const RunConfig& c, const CrossoverRun& run) {
  const auto& x = c.crossover;
  Table t;
  t.header = {x.axis};
  if (!x.series.empty()) t.header.push_back(x.series);
  for (const char* h : {"T_c_full", "T_c_approx", "rel_diff", "residual_full", "residual_approx", "status_full",
                        "status_approx", "T0", "Tx", "Ty", "phi0_full", "x_full", "y_full", "phi0_approx", "message"})
    t.header.emplace_back(h);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : run.rows) {
    std::vector<std::string> row{format_number(r.axis_value)};
    if (!x.series.empty()) row.push_back(format_number(r.series_value));
    const double Tf = r.full ? r.full->T_c : nan;
    const double Ta = r.approx ? r.approx->T_c : nan;
    const auto ts = temperature_scales(r.point.bath(c.dimension));
    row.push_back(format_number(Tf));
    row.push_back(format_number(Ta));
    row.push_back(format_number(std::abs(Ta - Tf) / Tf));
    row.push_back(format_number(r.full ? r.full->residual : nan));
    row.push_back(format_number(r.approx ? r.approx->residual : nan));
    row.push_back(r.status_full);
    row.push_back(r.status_approx);
    row.push_back(format_number(ts.T0));
    row.push_back(format_number(ts.Tx));
    row.push_back(format_number(ts.Ty));
    row.push_back(format_number(r.full ? r.full->diagnostics.phi0 : nan));
    row.push_back(format_number(r.full ? r.full->diagnostics.x : nan));
    row.push_back(format_number(r.full ? r.full->diagnostics.y : nan));
    row.push_back(format_number(r.approx ? r.approx->diagnostics.phi0 : nan));
    row.push_back(r.message);
    t.add(std::move(row));
  }
  return t;
}

inline int cmd_crossover(const RunConfig& c) {
  const auto start = Clock::now();
  const auto run = run_crossover(c);
  const std::string file = c.prefix + "_crossover.csv";
  write_text(std::filesystem::path(c.out_dir) / file, crossover_table(c, run).csv());
  auto manifest = manifest_base("crossover", c);
  std::vector<std::string> warnings;
  for (const auto& r : run.rows) {
    if (r.full && r.full->diagnostics.phi0 <= 1.0)
      warnings.push_back("phi0 <= 1 at T_c for " + describe(r.point) + "; multiphonon picture is marginal");
    if (r.failed) warnings.push_back("failed at " + describe(r.point) + ": " + r.message);
  }
  manifest["outputs"] = Json::array({{{"file", file},
                                      {"regime", "resonant"},
                                      {"rows", run.rows.size()},
                                      {"failed_rows", run.failed},
                                      {"warnings", warnings}}});
  manifest["warnings"] = warnings;
  write_manifest(c, manifest, start);
  return exit_code_for(run.failed, run.rows.size());
}

// -------------------------------------------------------------------- bath

struct BathPoint {
  Point point;
  double B = 1.0;
  double phi_at_zero = 0.0;  // Re φ(0), numeric
  std::optional<RenormalizationFactors> factored;
  double max_tilde_diff = std::numeric_limits<double>::quiet_NaN();
  Table omega;
  Table tau;
  std::string omega_file;
  std::string tau_file;
  std::vector<std::string> warnings;
};

struct BathRun {
  std::vector<BathPoint> points;
  std::vector<std::string> errors;  // per point, empty when fine
  std::size_t failed = 0;
};

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = i + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

/// Grid over (alpha, omega_c, mu, temperature); system parameters play no role.
inline BathRun run_bath(const RunConfig& c) {
  validate(c);
  RunConfig bath_only = c;
  bath_only.epsilon = {0.0};
  bath_only.V = {c.V.front()};
  const auto points = grid_points(bath_only);
  const auto& g = c.bath_grid;
  const auto omegas = linspace(0.0, g.omega_max, g.n_omega);
  const auto taus = linspace(0.0, g.tau_max, g.n_tau);
  ResponseOptions ropts;
  ropts.rel_tol = c.rel_tol;
  ropts.abs_tol = c.abs_tol;
  BathRun run;
  run.points.resize(points.size());
  run.errors.resize(points.size());
  const auto errors = parallel_for(points.size(), c.threads, [&](std::size_t i) {
    auto& bp = run.points[i];
    bp.point = points[i];
    const auto bath = bp.point.bath(c.dimension);
    const auto thermal = bp.point.thermal();
    const std::string label = point_label(bath_only, bp.point, false);
    bp.omega_file = c.prefix + "_omega" + label + ".csv";
    bp.tau_file = c.prefix + "_tau" + label + ".csv";
    bp.B = renormalization_B(bath, thermal);
    bp.phi_at_zero = propagator_phi(0.0, bath, thermal, PropagatorMethod::numeric).real();
    if (c.dimension == 3) bp.factored = renormalization_B_factored(bath, thermal);

    bp.omega.header = {"omega", "J", "F_D"};
    if (g.responses)
      for (const char* h : {"gamma_xx_pos", "gamma_xx_neg", "S_xx_pos", "S_xx_neg", "gamma_yy_pos", "gamma_yy_neg",
                            "S_yy_pos", "S_yy_neg"})
        bp.omega.header.emplace_back(h);
    const CorrelationContext ctx(bath, thermal);
    for (double w : omegas) {
      std::vector<std::string> row{format_number(w), format_number(spectral_density(w, bath)),
                                   format_number(spatial_kernel(w, bath))};
      if (g.responses) {
        const auto [p, m] = response_pair(w, ctx, ropts);
        if (p.negative_gamma || m.negative_gamma)
          bp.warnings.push_back("negative rate beyond noise floor at omega = " + format_number(w));
        for (double v : {p.gamma_xx, m.gamma_xx, p.S_xx, m.S_xx, p.gamma_yy, m.gamma_yy, p.S_yy, m.S_yy})
          row.push_back(format_number(v));
      }
      bp.omega.add(std::move(row));
    }

    const bool analytic = c.dimension == 3;
    if (!analytic) bp.warnings.emplace_back("analytic propagator needs D = 3; analytic columns are nan");
    bp.tau.header = {"tau", "phi_re", "phi_im", "phi_tilde_numeric", "phi_tilde_analytic", "phi_tilde_diff"};
    double worst = 0.0;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (double tau : taus) {
      const auto phi = propagator_phi(tau, bath, thermal);
      const double num = propagator_phi_tilde(tau, bath, thermal, PropagatorMethod::numeric);
      const double ana = analytic ? propagator_phi_tilde(tau, bath, thermal, PropagatorMethod::analytic) : nan;
      worst = std::max(worst, std::abs(num - ana));
      bp.tau.add({format_number(tau), format_number(phi.real()), format_number(phi.imag()), format_number(num),
                  format_number(ana), format_number(analytic ? num - ana : nan)});
    }
    if (analytic) bp.max_tilde_diff = worst;
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) {
      run.errors[i] = describe(errors[i]);
      ++run.failed;
    }
  }
  return run;
}

inline Table bath_summary_table(const BathRun& run) {
  Table t;
  t.header = {"alpha", "omega_c", "mu", "temperature", "B", "B_squared", "exp_minus_phi0", "identity_residual",
              "B0", "B_th", "B_factored", "phi0_scale", "x", "y", "max_phi_tilde_diff", "status", "message"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < run.points.size(); ++i) {
    const auto& bp = run.points[i];
    const auto& p = bp.point;
    const auto s = propagator_scales(p.bath(3), p.thermal());
    const bool ok = run.errors[i].empty();
    const double e = std::exp(-bp.phi_at_zero);
    t.add({format_number(p.alpha), format_number(p.omega_c), format_number(p.mu), format_number(p.temperature),
           format_number(ok ? bp.B : nan), format_number(ok ? bp.B * bp.B : nan), format_number(ok ? e : nan),
           format_number(ok ? std::abs(bp.B * bp.B - e) : nan),
           format_number(bp.factored ? bp.factored->B0 : nan), format_number(bp.factored ? bp.factored->Bth : nan),
           format_number(bp.factored ? bp.factored->B() : nan), format_number(s.phi0), format_number(s.x),
           format_number(s.y), format_number(bp.max_tilde_diff), ok ? "ok" : "error", run.errors[i]});
  }
  return t;
}

inline int cmd_bath(const RunConfig& c) {
  const auto start = Clock::now();
  const auto run = run_bath(c);
  const std::filesystem::path dir(c.out_dir);
  const std::string summary = c.prefix + "_bath.csv";
  write_text(dir / summary, bath_summary_table(run).csv());
  auto manifest = manifest_base("bath", c);
  Json outputs = Json::array();
  outputs.push_back({{"file", summary}, {"regime", "none"}, {"rows", run.points.size()}});
  std::set<std::string> all_warnings;
  for (std::size_t i = 0; i < run.points.size(); ++i) {
    const auto& bp = run.points[i];
    if (!run.errors[i].empty()) {
      all_warnings.insert("failed at " + describe(bp.point) + ": " + run.errors[i]);
      continue;
    }
    write_text(dir / bp.omega_file, bp.omega.csv());
    write_text(dir / bp.tau_file, bp.tau.csv());
    Json params = point_json(bp.point);
    params.erase("epsilon");
    params.erase("V");
    for (const auto& f : {bp.omega_file, bp.tau_file})
      outputs.push_back({{"file", f}, {"regime", "none"}, {"parameters", params}, {"warnings", bp.warnings}});
    all_warnings.insert(bp.warnings.begin(), bp.warnings.end());
  }
  manifest["outputs"] = outputs;
  manifest["warnings"] = std::vector<std::string>(all_warnings.begin(), all_warnings.end());
  write_manifest(c, manifest, start);
  return exit_code_for(run.failed, run.points.size());
}

// ------------------------------------------------------------------- sweep

struct SweepRow {
  Point point;
  std::optional<Generator> generator;
  std::optional<BlochVector> steady;
  std::array<std::complex<double>, 3> eigen{};
  std::optional<double> xi_squared;
  double amplitude = std::numeric_limits<double>::quiet_NaN();
  std::string status = "ok";
  std::string message;
};

struct SweepRun {
  std::vector<SweepRow> rows;
  std::size_t failed = 0;
};

inline SweepRun run_sweep(const RunConfig& c) {
  validate(c);
  const auto points = grid_points(c);
  ResponseCache cache;
  const auto opts = build_options(c, &cache);
  SweepRun run;
  run.rows.resize(points.size());
  const auto errors = parallel_for(points.size(), c.threads, [&](std::size_t i) {
    auto& r = run.rows[i];
    r.point = points[i];
    const Regime regime = resolve_regime(c.regime, r.point.epsilon);
    const auto g = build(regime, r.point.system(), r.point.bath(c.dimension), r.point.thermal(), opts);
    r.eigen = sorted_eigenvalues(g);
    try {
      r.steady = steady_state(g);
    } catch (const SingularGenerator& e) {
      r.message = e.what();
    }
    if (r.point.epsilon == 0.0 && (regime == Regime::resonant || regime == Regime::full))
      r.xi_squared = resonant_xi_squared(g.polaron, g.rates);
    r.amplitude = 4.0 * g.polaron.V_R * g.polaron.V_R / (g.polaron.eta * g.polaron.eta);
    for (const auto& w : g.warnings) r.message += (r.message.empty() ? "" : "; ") + w;
    r.generator = g;
  });
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (errors[i]) {
      run.rows[i].status = "error";
      run.rows[i].message = describe(errors[i]);
      ++run.failed;
    }
  }
  return run;
}

inline Table sweep_table(const SweepRun& run) {
  Table t;
  t.header = {"epsilon", "V", "alpha", "omega_c", "mu", "temperature", "regime", "status", "B", "V_R", "eta",
              "Gamma_x", "Gamma_y", "Gamma_z", "lambda_3", "steady_ax_lab", "steady_ay_lab", "steady_az",
              "q1_re", "q1_im", "q2_re", "q2_im", "q3_re", "q3_im", "xi_squared", "amplitude",
              "V_over_omega_c", "beta_VR", "phi0", "x", "y", "validity", "message"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : run.rows) {
    const auto& p = r.point;
    std::vector<std::string> row{format_number(p.epsilon), format_number(p.V),     format_number(p.alpha),
                                 format_number(p.omega_c), format_number(p.mu),    format_number(p.temperature)};
    const Generator* g = r.generator ? &*r.generator : nullptr;
    auto val = [&](auto f) { return format_number(g ? f(*g) : nan); };
    row.push_back(g ? to_string(g->regime) : "");
    row.push_back(r.status);
    row.push_back(val([](const Generator& x) { return x.polaron.B; }));
    row.push_back(val([](const Generator& x) { return x.polaron.V_R; }));
    row.push_back(val([](const Generator& x) { return x.polaron.eta; }));
    row.push_back(val([](const Generator& x) { return x.rates.Gamma_x; }));
    row.push_back(val([](const Generator& x) { return x.rates.Gamma_y; }));
    row.push_back(val([](const Generator& x) { return x.rates.Gamma_z; }));
    row.push_back(val([](const Generator& x) { return x.rates.lambda_3; }));
    row.push_back(format_number(r.steady ? r.steady->ax : nan));
    row.push_back(format_number(r.steady ? r.steady->ay : nan));
    row.push_back(format_number(r.steady ? r.steady->az : nan));
    for (const auto& q : r.eigen) {
      row.push_back(format_number(g ? q.real() : nan));
      row.push_back(format_number(g ? q.imag() : nan));
    }
    row.push_back(format_number(r.xi_squared.value_or(nan)));
    row.push_back(format_number(r.amplitude));
    row.push_back(val([](const Generator& x) { return x.telemetry.V_over_omega_c; }));
    row.push_back(val([](const Generator& x) { return x.telemetry.beta_VR; }));
    row.push_back(val([](const Generator& x) { return x.telemetry.phi0; }));
    row.push_back(val([](const Generator& x) { return x.telemetry.x; }));
    row.push_back(val([](const Generator& x) { return x.telemetry.y; }));
    row.push_back(val([](const Generator& x) { return x.telemetry.validity; }));
    row.push_back(r.message);
    t.add(std::move(row));
  }
  return t;
}

inline int cmd_sweep(const RunConfig& c) {
  const auto start = Clock::now();
  const auto run = run_sweep(c);
  const std::string file = c.prefix + "_sweep.csv";
  write_text(std::filesystem::path(c.out_dir) / file, sweep_table(run).csv());
  auto manifest = manifest_base("sweep", c);
  std::set<std::string> regimes;
  Json warnings = Json::array();
  for (std::size_t i = 0; i < run.rows.size(); ++i) {
    const auto& r = run.rows[i];
    if (r.generator) {
      regimes.insert(to_string(r.generator->regime));
      for (const auto& w : r.generator->warnings) warnings.push_back({{"row", i}, {"warning", w}});
    }
    if (r.status != "ok") warnings.push_back({{"row", i}, {"warning", "failed: " + r.message}});
  }
  manifest["outputs"] = Json::array({{{"file", file},
                                      {"regime", std::vector<std::string>(regimes.begin(), regimes.end())},
                                      {"rows", run.rows.size()},
                                      {"failed_rows", run.failed},
                                      {"warnings", warnings}}});
  manifest["warnings"] = warnings;
  write_manifest(c, manifest, start);
  return exit_code_for(run.failed, run.rows.size());
}

}  // namespace polaron::app
