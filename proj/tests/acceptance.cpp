// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "polaron/app/commands.hpp"
#include "polaron/mathkit/special_functions.hpp"

using namespace polaron;
using namespace polaron::app;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Check {
  bool ok = true;
  std::ostringstream failures;
  std::ostringstream info;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures << what << "; ";
    }
  }
  template <class T>
  void note(const std::string& key, const T& value) {
    info << key << "=" << value << " ";
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

BathModel fig_bath(double mu = 0.5, double omega_c = 4.0, double alpha = 0.05) {
  return {.alpha = alpha, .omega_c = omega_c, .dimension = 3, .mu = mu};
}

RunConfig config_file(const std::string& name) {
  return load_config((fs::path(POLARON_SOURCE_DIR) / "configs" / name).string());
}

RunConfig crossover_config(const Json& crossover) {
  Json j = {{"system", {{"epsilon", 0.0}, {"V", 0.5}}},
            {"bath", {{"alpha", 0.05}, {"omega_c", 4.0}, {"mu", 0.0}}},
            {"crossover", crossover}};
  return parse_config(j);
}

std::vector<double> component(const DynamicsSeries& s, double BlochVector::*field) {
  std::vector<double> out;
  for (const auto& a : s.trajectory.states) out.push_back(a.*field);
  return out;
}

std::size_t zero_crossings(const std::vector<double>& v) {
  std::size_t n = 0;
  for (std::size_t i = 2; i < v.size(); ++i)
    if ((v[i - 1] < 0.0) != (v[i] < 0.0)) ++n;
  return n;
}

const DynamicsSeries& find_series(const DynamicsRun& run, double T, double mu = -1.0) {
  for (const auto& s : run.series)
    if (s.point.temperature == T && (mu < 0.0 || s.point.mu == mu)) return s;
  throw Error("no trajectory at T = " + format_number(T));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 1 -------------------------------------------------------------------------
Check frame_identities() {
  Check c;
  const ThermalState warm{2.0};
  const auto correlated = fig_bath(kInfiniteCorrelation);
  c.require(renormalization_B(correlated, warm) == 1.0, "B(mu=inf) != 1 (integral)");
  c.require(renormalization_B_factored(correlated, warm).B() == 1.0, "B(mu=inf) != 1 (closed form)");
  c.require(build_resonant({0.0, 0.5}, correlated, warm).polaron.B == 1.0, "B(mu=inf) != 1 (generator)");

  double worst_identity = 0.0;
  double worst_factored = 0.0;
  for (double mu : {0.0, 0.5}) {
    for (double alpha : {0.01, 0.025, 0.05, 0.1, 0.2}) {
      for (double wc : {1.0, 2.0, 4.0, 6.0, 8.0}) {
        for (double T : {0.5, 1.0, 3.0, 10.0, 20.0}) {
          const auto bath = fig_bath(mu, wc, alpha);
          const ThermalState t{T};
          const double B = renormalization_B(bath, t);
          const double phi0 = propagator_phi(0.0, bath, t, PropagatorMethod::analytic).real();
          worst_identity = std::max(worst_identity, std::abs(B * B - std::exp(-phi0)));
          worst_factored = std::max(worst_factored, std::abs(renormalization_B_factored(bath, t).B() - B));
        }
      }
    }
  }
  c.require(worst_identity < 1e-10, "B^2 vs exp(-phi(0)) " + sci(worst_identity));
  c.require(worst_factored < 1e-6, "B0*Bth vs integral " + sci(worst_factored));
  c.note("max|B^2-e^-phi(0)|", sci(worst_identity));
  c.note("max|B0*Bth-B|", sci(worst_factored));
  return c;
}

// 2 -------------------------------------------------------------------------
Check propagator_consistency() {
  Check c;
  double worst = 0.0;
  for (double T : {1.0, 5.0, 12.0, 20.0}) {
    const ThermalState t{T};
    for (std::size_t k = 0; k <= 200; ++k) {
      const double tau = 10.0 * static_cast<double>(k) / 200.0;
      const double a = propagator_phi_tilde(tau, fig_bath(), t, PropagatorMethod::analytic);
      const double n = propagator_phi_tilde(tau, fig_bath(), t, PropagatorMethod::numeric);
      worst = std::max(worst, std::abs(a - n));
    }
  }
  c.require(worst < 1e-6, "max|analytic-numeric| " + sci(worst));
  c.note("max|dphi_tilde|", sci(worst));
  return c;
}

// 3 -------------------------------------------------------------------------
Check detailed_balance() {
  Check c;
  double worst = 0.0;
  for (double T : {1.0, 5.0, 20.0}) {
    const ThermalState t{T};
    const CorrelationContext ctx(fig_bath(), t);
    const double VR = 0.5 * renormalization_B(fig_bath(), t);
    for (double w : {0.5, 1.0, 2.0 * VR}) {
      const auto [plus, minus] = response_pair(w, ctx);
      const double expected = std::exp(w / T);
      worst = std::max(worst, std::abs(plus.gamma_xx / minus.gamma_xx / expected - 1.0));
      worst = std::max(worst, std::abs(plus.gamma_yy / minus.gamma_yy / expected - 1.0));
    }
  }
  c.require(worst < 1e-3, "relative deviation " + sci(worst));
  c.note("max relative deviation", sci(worst));
  return c;
}

// 4 -------------------------------------------------------------------------
Check closed_form_equivalence() {
  Check c;
  const auto times = uniform_times(30.0, 601);
  double worst = 0.0;
  for (double T : {1.0, 5.0, 12.0, 20.0}) {
    const ThermalState t{T};
    const auto g = build_resonant({0.0, 0.5}, fig_bath(), t);
    const auto cf = closed_form_resonant(g, t, times);
    const auto ev = evolve(g, BlochVector::donor(), times, EvolveMethod::eigen);
    for (std::size_t k = 0; k < times.size(); ++k) {
      worst = std::max({worst, std::abs(cf.states[k].ax - ev.states[k].ax), std::abs(cf.states[k].ay - ev.states[k].ay),
                        std::abs(cf.states[k].az - ev.states[k].az)});
    }
  }
  c.require(worst < 1e-8, "closed form vs eigen " + sci(worst));

  // Across ξ_R = 0: rates placed exactly on the boundary, then nudged by ±1e-9.
  const PolaronQuantities pq{0.8, 0.4, 0.8};
  const double Gy = 0.05;
  const double gap0 = std::sqrt(16.0 * pq.V_R * pq.V_R);
  auto run = [&](double delta) {
    RateSet r;
    r.Gamma_y = Gy;
    r.Gamma_z = Gy + gap0 + delta;
    return closed_form_resonant({0.0, 0.5}, pq, r, ThermalState{3.0}, times);
  };
  const auto at = run(0.0), above = run(1e-9), below = run(-1e-9);
  double jump = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    for (const auto* side : {&above, &below}) {
      jump = std::max({jump, std::abs(side->states[k].az - at.states[k].az),
                       std::abs(side->states[k].ay - at.states[k].ay)});
    }
  }
  c.require(*above.xi_squared < 0.0 && *below.xi_squared > 0.0, "nudges do not straddle xi = 0");
  c.require(jump < 1e-8, "discontinuity " + sci(jump));

  // And at a physical crossover: the Fig-1 bath at T_c(1 ± 1e-10).
  const double Tc = solve_Tc_full({0.0, 0.5}, fig_bath()).T_c;
  double physical = 0.0;
  std::vector<BlochTrajectory> sides;
  for (double f : {1.0 - 1e-10, 1.0 + 1e-10}) {
    const ThermalState t{Tc * f};
    sides.push_back(closed_form_resonant(build_resonant({0.0, 0.5}, fig_bath(), t), t, times));
  }
  for (std::size_t k = 0; k < times.size(); ++k)
    physical = std::max(physical, std::abs(sides[0].states[k].az - sides[1].states[k].az));
  c.require(physical < 1e-8, "discontinuity at physical T_c " + sci(physical));
  c.note("max|closed-eigen|", sci(worst));
  c.note("jump@xi=0", sci(std::max(jump, physical)));
  return c;
}

// 5 -------------------------------------------------------------------------
Check regime_reductions() {
  Check c;
  double entrywise = 0.0;
  for (double mu : {0.0, 0.5, 2.0}) {
    for (double T : {1.0, 5.0, 12.0, 20.0}) {
      const ThermalState t{T};
      const auto full = build_full({0.0, 0.5}, fig_bath(mu), t);
      const auto res = build_resonant({0.0, 0.5}, fig_bath(mu), t);
      entrywise = std::max({entrywise, (full.M - res.M).cwiseAbs().maxCoeff(), (full.b - res.b).cwiseAbs().maxCoeff()});
    }
  }
  c.require(entrywise < 1e-10, "full vs resonant " + sci(entrywise));

  double ratio_dev = 0.0;
  for (double eps : {0.0, 0.5}) {
    const ThermalState t{1.0};
    const auto bath = fig_bath(0.5, 4.0, 1e-3);
    const auto full = build_full({eps, 0.5}, bath, t);
    const auto weak = build_weak({eps, 0.5}, bath, t);
    ratio_dev = std::max({ratio_dev, std::abs(full.rates.Gamma_x / weak.rates.Gamma_x - 1.0),
                          std::abs(full.rates.Gamma_z / weak.rates.Gamma_z - 1.0)});
  }
  c.require(ratio_dev < 0.05, "Gamma_full/Gamma_W off by " + sci(ratio_dev));

  const SystemModel fig4{1.0, 0.5};
  const ThermalState hot{20.0};
  const auto times = uniform_times(30.0, 601);
  const auto full = evolve(build_full(fig4, fig_bath(), hot), times);
  const auto ht = closed_form_high_T(build_high_temperature(fig4, fig_bath(), hot), times);
  double az_dev = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) az_dev = std::max(az_dev, std::abs(full.states[k].az - ht.az.values[k]));
  c.require(az_dev < 0.05, "high-T closed form vs full " + sci(az_dev));
  c.note("full-resonant", sci(entrywise));
  c.note("|Gamma ratio-1|", sci(ratio_dev));
  c.note("high-T az dev", sci(az_dev));
  return c;
}

// 6 -------------------------------------------------------------------------
Check figure_shapes() {
  Check c;
  const auto fig1 = run_dynamics(config_file("fig1_dynamics.json"));
  auto turns = [](const DynamicsSeries& s) {
    return count_derivative_sign_changes(s.trajectory.times, component(s, &BlochVector::az));
  };
  std::ostringstream f1;
  for (double T : {1.0, 5.0, 20.0}) {
    const auto n = turns(find_series(fig1, T));
    f1 << "T" << T << ":" << n << ",";
    c.require(T < 10.0 ? n > 0 : n == 0, "Fig-1 T=" + format_number(T));
  }
  const auto fig2 = run_dynamics(config_file("fig2_correlations.json"));
  const auto uncorrelated = turns(find_series(fig2, 10.0, 0.0));
  const auto strong = turns(find_series(fig2, 10.0, 2.0));
  c.require(uncorrelated == 0, "Fig-2 mu=0 oscillates");
  c.require(strong > 0, "Fig-2 mu=2 does not oscillate");
  const auto fig7 = run_dynamics(config_file("fig7_large_mismatch.json"));
  const auto& cold = find_series(fig7, 1.0);
  const auto ay = zero_crossings(component(cold, &BlochVector::ay));
  const auto az = zero_crossings(component(cold, &BlochVector::az));
  c.require(ay >= 3, "Fig-7 alpha_y crossings " + std::to_string(ay));
  c.require(az <= 1, "Fig-7 alpha_z crossings " + std::to_string(az));
  c.note("Fig-1 turns", f1.str());
  c.note("Fig-2 turns(mu=0,2)", std::to_string(uncorrelated) + "," + std::to_string(strong));
  c.note("Fig-7 crossings(ay,az)", std::to_string(ay) + "," + std::to_string(az));
  return c;
}

// 7 -------------------------------------------------------------------------
Check crossover_boundary() {
  Check c;
  std::size_t solved = 0;
  double min_phi0 = std::numeric_limits<double>::infinity();
  auto record_phi0 = [&](const CrossoverRow& r) {
    for (const auto* res : {&r.full, &r.approx}) {
      if (*res) {
        ++solved;
        min_phi0 = std::min(min_phi0, (*res)->diagnostics.phi0);
      }
    }
  };

  // T_c increasing in μ at each ω_c.
  const auto by_mu = run_crossover(crossover_config({{"axis", "mu"},
                                                     {"values", {0.0, 0.25, 0.5, 1.0, 2.0}},
                                                     {"series", "omega_c"},
                                                     {"series_values", {2.0, 3.0, 4.0}},
                                                     {"T_hi", 1000.0}}));
  for (std::size_t i = 0; i < by_mu.rows.size(); ++i) {
    const auto& r = by_mu.rows[i];
    record_phi0(r);
    c.require(r.full.has_value(), "no T_c at " + describe(r.point));
    if (i % 5 != 0 && r.full && by_mu.rows[i - 1].full)
      c.require(r.full->T_c > by_mu.rows[i - 1].full->T_c, "T_c not increasing in mu at " + describe(r.point));
  }

  // T_c(ω_c) at μ = 0: falls, then rises.
  std::vector<double> wcs;
  for (double w = 2.0; w <= 12.0 + 1e-9; w += 0.5) wcs.push_back(w);
  const auto by_wc = run_crossover(crossover_config({{"axis", "omega_c"}, {"values", wcs}}));
  std::vector<double> Tc;
  for (const auto& r : by_wc.rows) {
    record_phi0(r);
    c.require(r.full.has_value(), "no T_c at " + describe(r.point));
    Tc.push_back(r.full ? r.full->T_c : std::nan(""));
  }
  const auto k = static_cast<std::size_t>(std::min_element(Tc.begin(), Tc.end()) - Tc.begin());
  bool falls = k > 0, rises = k + 1 < Tc.size();
  for (std::size_t i = 1; i <= k; ++i) falls = falls && Tc[i] < Tc[i - 1];
  for (std::size_t i = k + 1; i < Tc.size(); ++i) rises = rises && Tc[i] > Tc[i - 1];
  c.require(falls && rises, "T_c(omega_c) at mu=0 is not decreasing-then-increasing");
  bool falls_to_8 = true;
  for (std::size_t i = 1; i < wcs.size() && wcs[i] <= 8.0; ++i) falls_to_8 = falls_to_8 && Tc[i] < Tc[i - 1];

  // Approximate vs full on the Fig-3 grid.
  const auto fig3 = run_crossover(config_file("fig3_crossover.json"));
  double worst_dev = 0.0, dev_at_2 = 0.0;
  for (const auto& r : fig3.rows) {
    record_phi0(r);
    c.require(r.full && r.approx, "missing T_c at " + describe(r.point));
    if (!r.full || !r.approx) continue;
    const double dev = std::abs(r.approx->T_c - r.full->T_c) / r.full->T_c;
    if (r.point.omega_c >= 3.0 && r.point.mu <= 1.0) worst_dev = std::max(worst_dev, dev);
    if (r.point.omega_c < 3.0) dev_at_2 = std::max(dev_at_2, dev);
  }
  c.require(worst_dev < 0.1, "approx vs full " + sci(worst_dev));
  c.require(min_phi0 > 1.0, "phi0 at T_c below 1: " + sci(min_phi0));
  c.note("min T_c(omega_c) at omega_c", format_number(wcs[k]));
  c.note("strictly falling on [2,8]", falls_to_8 ? "yes" : "no");
  c.note("max|approx-full|/full (omega_c>=3)", sci(worst_dev));
  c.note("(omega_c=2)", sci(dev_at_2));
  c.note("min phi0", sci(min_phi0));
  c.note("solves", solved);
  return c;
}

// 8 -------------------------------------------------------------------------
Check steady_states() {
  Check c;
  double res = 0.0, weak = 0.0, ht = 0.0;
  for (double mu : {0.0, 0.5, 2.0}) {
    for (double T : {1.0, 5.0, 12.0, 20.0}) {
      const auto g = build_resonant({0.0, 0.5}, fig_bath(mu), ThermalState{T});
      const auto s = steady_state(g), e = resonant_steady_state(g);
      res = std::max({res, std::abs(s.ax - e.ax), std::abs(s.ay - e.ay), std::abs(s.az - e.az)});
    }
  }
  for (double eps : {0.2, 0.5, 2.0}) {
    for (double T : {0.5, 1.0, 5.0}) {
      const auto g = build_weak({eps, 0.5}, fig_bath(2.0, 4.0, 0.01), ThermalState{T});
      const auto s = steady_state(g), e = weak_steady_state(g);
      weak = std::max({weak, std::abs(s.ax - e.ax), std::abs(s.ay - e.ay), std::abs(s.az - e.az)});
    }
  }
  // The high-T formula is exact only to (V_R/ε)²; its regime here is V_R/ε ≤ 1e-3.
  std::size_t ht_points = 0;
  double ht_outside = 0.0;
  for (double mu : {0.0, 0.5}) {
    for (double eps : {0.5, 1.0, 2.0}) {
      for (double T : {5.0, 12.0, 20.0, 40.0}) {
        const auto g = build_high_temperature({eps, 0.5}, fig_bath(mu), ThermalState{T});
        const double d = std::abs(steady_state(g).az - high_temperature_steady_az(g));
        if (g.polaron.V_R / eps <= 1e-3) {
          ht = std::max(ht, d);
          ++ht_points;
        } else {
          ht_outside = std::max(ht_outside, d);
        }
      }
    }
  }
  c.require(ht_points >= 8, "too few high-T points inside V_R/eps <= 1e-3");
  c.require(res < 1e-8, "resonant " + sci(res));
  c.require(weak < 1e-8, "weak " + sci(weak));
  c.require(ht < 1e-8, "high-T " + sci(ht));
  c.note("resonant", sci(res));
  c.note("weak", sci(weak));
  c.note("high-T", sci(ht) + "(" + std::to_string(ht_points) + "pts)");
  c.note("high-T outside regime", sci(ht_outside));
  return c;
}

// 9 -------------------------------------------------------------------------
Check special_functions() {
  using mathkit::Complex;
  Check c;
  std::size_t checks = 0;
  auto near = [&](double a, double b, double tol, const std::string& what) {
    ++checks;
    c.require(std::abs(a - b) <= tol, what + " off by " + sci(std::abs(a - b)));
  };
  const double gamma = 0.5772156649015329;
  near(mathkit::digamma(1.0), -gamma, 1e-14, "psi(1)");
  near(mathkit::digamma(0.5), -gamma - 2.0 * std::log(2.0), 1e-13, "psi(1/2)");
  near(mathkit::digamma(-0.5), mathkit::digamma(0.5) + 2.0, 1e-12, "psi(-1/2)");
  near(mathkit::polygamma(1, 1.0), pi * pi / 6.0, 1e-13, "psi'(1)");
  near(mathkit::polygamma(3, 1.0), std::pow(pi, 4) / 15.0, 1e-12, "psi'''(1)");
  // ζ(3) by direct summation with an Euler–Maclaurin tail.
  const int n = 200000;
  double zeta3 = 0.0;
  for (int k = n; k >= 1; --k) zeta3 += 1.0 / (static_cast<double>(k) * k * k);
  zeta3 += 1.0 / (2.0 * n * static_cast<double>(n)) - 1.0 / (2.0 * n * static_cast<double>(n) * n);
  near(mathkit::polygamma(2, 1.0), -2.0 * zeta3, 1e-12, "psi''(1)");
  near(mathkit::hurwitz_zeta(2.0, 0.5), pi * pi / 2.0, 1e-12, "zeta(2,1/2)");
  near(mathkit::hurwitz_zeta(2.0, 1.0), pi * pi / 6.0, 1e-14, "zeta(2,1)");
  near(mathkit::harmonic_number(Complex(3.0, 0.0)).real(), 11.0 / 6.0, 1e-14, "H(3)");
  near(mathkit::harmonic_number(Complex(0.5, 0.0)).real(), 2.0 - 2.0 * std::log(2.0), 1e-13, "H(1/2)");
  for (double x : {0.3, 1.7, 4.2, 9.9}) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 60; ++k) {
      term *= -(x * x / 4.0) / (static_cast<double>(k) * k);
      sum += term;
    }
    near(mathkit::bessel_j0(x), sum, 1e-10, "J0(" + format_number(x) + ")");
  }
  double recurrence = 0.0, conjugate = 0.0, shift = 0.0;
  for (double re : {-3.3, -0.7, 0.2, 1.1, 4.5, 17.0}) {
    for (double im : {-6.0, -0.4, 0.3, 2.5, 9.0}) {
      const Complex z(re, im);
      recurrence = std::max(recurrence, std::abs(mathkit::digamma(z + 1.0) - mathkit::digamma(z) - 1.0 / z));
      for (int order = 1; order <= 3; ++order) {
        const double sign = order % 2 == 0 ? 1.0 : -1.0;
        const double fact = order == 3 ? 6.0 : order;
        const Complex lhs = mathkit::polygamma(order, z + 1.0);
        const Complex rhs = mathkit::polygamma(order, z) + sign * fact / std::pow(z, order + 1);
        recurrence = std::max(recurrence, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        conjugate = std::max(conjugate, std::abs(mathkit::polygamma(order, std::conj(z)) -
                                                 std::conj(mathkit::polygamma(order, z))));
      }
      checks += 7;
    }
  }
  for (double a : {0.1, 0.37, 1.5, 7.25, 40.0}) {
    const double z2 = mathkit::hurwitz_zeta(2.0, a);
    shift = std::max({shift, std::abs(mathkit::hurwitz_zeta(2.0, a + 1.0) - z2 + 1.0 / (a * a)) / z2,
                      std::abs(z2 - mathkit::polygamma(1, a)) / z2});
    checks += 2;
  }
  c.require(recurrence < 1e-10, "recurrence " + sci(recurrence));
  c.require(conjugate < 1e-12, "conjugate symmetry " + sci(conjugate));
  c.require(shift < 1e-10, "Hurwitz shift/polygamma link " + sci(shift));
  c.note("checks", checks);
  c.note("max recurrence residual", sci(recurrence));
  return c;
}

// 10 ------------------------------------------------------------------------
Check determinism() {
  Check c;
  const auto root = fs::temp_directory_path() / "polaron_acceptance_determinism";
  fs::remove_all(root);
  auto cfg = config_file("fig1_dynamics.json");
  std::vector<fs::path> dirs;
  for (std::size_t threads : {1, 1, 4}) {
    cfg.threads = threads;
    cfg.out_dir = (root / ("run" + std::to_string(dirs.size()))).string();
    c.require(cmd_dynamics(cfg) == kSuccess, "cmd_dynamics failed");
    dirs.push_back(cfg.out_dir);
  }
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    const auto ref = slurp(entry.path());
    for (std::size_t i = 1; i < dirs.size(); ++i)
      c.require(slurp(dirs[i] / entry.path().filename()) == ref, entry.path().filename().string() + " differs");
  }
  auto manifest = [&](const fs::path& dir) {
    auto m = Json::parse(slurp(dir / (cfg.prefix + "_manifest.json")));
    m.erase("timing");
    m["config"]["output"].erase("directory");
    m["config"].erase("threads");
    return m;
  };
  for (std::size_t i = 1; i < dirs.size(); ++i)
    c.require(manifest(dirs[i]) == manifest(dirs[0]), "manifest differs outside timing");
  c.require(files == 4, "expected four trajectory files, found " + std::to_string(files));
  c.note("files compared", files);
  c.note("runs", dirs.size());
  fs::remove_all(root);
  return c;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Check()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "frame/renormalization identities", 10.0, frame_identities},
      {2, "propagator consistency", 30.0, propagator_consistency},
      {3, "detailed balance", 60.0, detailed_balance},
      {4, "closed form vs solver", 10.0, closed_form_equivalence},
      {5, "regime reductions", 60.0, regime_reductions},
      {6, "figure shapes", 60.0, figure_shapes},
      {7, "crossover boundary", 600.0, crossover_boundary},
      {8, "steady-state formulas", 10.0, steady_states},
      {9, "special functions", 5.0, special_functions},
      {10, "determinism", 5.0, determinism},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Check result;
    try {
      result = cr.run();
    } catch (const std::exception& e) {
      result.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.require(secs <= cr.budget_seconds, "runtime over budget");
    if (!result.ok) ++failed;
    char head[160];
    std::snprintf(head, sizeof head, "%s %2d %-34s %7.2fs / %4.0fs  ", result.ok ? "PASS" : "FAIL", cr.id, cr.name,
                  secs, cr.budget_seconds);
    std::cout << head << result.info.str();
    if (!result.ok) std::cout << "| " << result.failures.str();
    std::cout << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
