#pragma once

// Coherent/incoherent classification of resonant transfer and the crossover
// temperature T_c where ξ_R² = 8V_R(2V_R + λ₃) - (Γz - Γy)² changes sign.

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polaron/bath.hpp"
#include "polaron/bloch.hpp"
#include "polaron/correlations.hpp"
#include "polaron/dynamics.hpp"
#include "polaron/errors.hpp"

namespace polaron {

/// Counts sign changes of the discrete derivative of `values` after
/// `t_min`. A change is only registered once the curve has moved more than
/// `deadband` away from the last extremum, so rounding wiggles on a flat
/// tail do not count.
inline std::size_t count_derivative_sign_changes(const std::vector<double>& times,
                                                 const std::vector<double>& values,
                                                 double t_min = 1.0, double deadband = 1e-4) {
  if (times.size() != values.size()) throw DomainError("times and values differ in length");
  std::size_t k = 0;
  while (k < times.size() && times[k] <= t_min) ++k;
  if (k >= times.size()) return 0;
  int direction = 0;
  std::size_t changes = 0;
  double extreme = values[k];
  double hi = values[k];
  double lo = values[k];
  for (++k; k < values.size(); ++k) {
    const double v = values[k];
    if (direction == 0) {
      hi = std::max(hi, v);
      lo = std::min(lo, v);
      if (v > lo && v - lo > deadband) {
        direction = 1;
        extreme = v;
      } else if (v < hi && hi - v > deadband) {
        direction = -1;
        extreme = v;
      }
      continue;
    }
    if (direction > 0) {
      if (v > extreme) {
        extreme = v;
      } else if (extreme - v > deadband) {
        direction = -1;
        extreme = v;
        ++changes;
      }
    } else {
      if (v < extreme) {
        extreme = v;
      } else if (v - extreme > deadband) {
        direction = 1;
        extreme = v;
        ++changes;
      }
    }
  }
  return changes;
}

struct CrossoverOptions {
  double T_lo = 0.2;
  double T_hi = 100.0;
  std::size_t scan_points = 32;
  double rel_tol_T = 1e-6;
  double residual_tol = 1e-8;  // relative to the criterion's natural scale
  std::size_t max_iterations = 200;
  BuildOptions build;
};

inline double xi_squared(const SystemModel& system, const BathModel& bath, const ThermalState& thermal,
                         const BuildOptions& opts = {}) {
  if (system.epsilon != 0.0) throw RegimeError("xi_squared is defined for epsilon = 0 only");
  const auto g = build_resonant(system, bath, thermal, opts);
  return resonant_xi_squared(g.polaron, g.rates);
}

inline double xi_squared(const SystemModel& system, const BathModel& bath, double temperature,
                         const BuildOptions& opts = {}) {
  return xi_squared(system, bath, ThermalState{temperature}, opts);
}

enum class CrossoverMethod { full, approx };

inline const char* to_string(CrossoverMethod m) { return m == CrossoverMethod::full ? "full" : "approx"; }

struct CrossoverDiagnostics {
  double T0 = 0.0;
  double Tx = 0.0;
  double Ty = 0.0;
  double phi0 = 0.0;
  double x = 0.0;
  double y = 0.0;
};

struct CrossoverResult {
  double T_c = 0.0;
  CrossoverMethod method = CrossoverMethod::full;
  std::pair<double, double> bracket{0.0, 0.0};  // final sign-change interval
  double residual = 0.0;                        // criterion at T_c
  double scale = 1.0;                           // residual is small against this
  std::size_t evaluations = 0;
  CrossoverDiagnostics diagnostics;
};

namespace detail {

inline CrossoverDiagnostics crossover_diagnostics(const BathModel& bath, double T) {
  const auto ts = temperature_scales(bath);
  const auto ps = propagator_scales(bath, ThermalState{T});
  return {ts.T0, ts.Tx, ts.Ty, ps.phi0, ps.x, ps.y};
}

/// Root of f on [T_lo, T_hi] where f > 0 means coherent. A log-spaced scan
/// finds the first coherent → incoherent change, then secant steps refine
/// it, with bisection whenever a step leaves the bracket or stalls.
inline CrossoverResult solve_crossover(const std::function<double(double)>& f, double scale,
                                       const CrossoverOptions& opts, CrossoverMethod method) {
  if (!(opts.T_lo > 0.0) || !(opts.T_hi > opts.T_lo)) throw DomainError("crossover bracket must satisfy 0 < T_lo < T_hi");
  if (opts.scan_points < 2) throw DomainError("crossover scan needs at least two points");
  CrossoverResult out;
  out.method = method;
  out.scale = scale;
  const double log_lo = std::log(opts.T_lo);
  const double log_hi = std::log(opts.T_hi);
  double a = 0.0, fa = 0.0, b = 0.0, fb = 0.0;
  bool found = false;
  bool any_coherent = false;
  double prev_T = 0.0, prev_f = 0.0;
  for (std::size_t i = 0; i < opts.scan_points; ++i) {
    const double T = i + 1 == opts.scan_points
                         ? opts.T_hi
                         : std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(i) /
                                                 static_cast<double>(opts.scan_points - 1));
    const double v = f(T);
    ++out.evaluations;
    if (!std::isfinite(v)) throw Error("crossover criterion is not finite at T = " + std::to_string(T));
    any_coherent = any_coherent || v > 0.0;
    if (i > 0 && prev_f > 0.0 && v <= 0.0) {
      a = prev_T, fa = prev_f, b = T, fb = v;
      found = true;
      break;
    }
    prev_T = T;
    prev_f = v;
  }
  if (!found) {
    throw NoCrossing(any_coherent ? "coherent everywhere on bracket" : "incoherent everywhere on bracket",
                     any_coherent);
  }
  if (fb == 0.0) {
    out.T_c = b;
    out.bracket = {a, b};
    return out;
  }

  // Work in log T: the criterion is smoother there across decades.
  double la = std::log(a), lb = std::log(b);
  double best = lb, fbest = fb;
  int last_side = 0;
  int repeats = 0;
  for (std::size_t it = 0; it < opts.max_iterations; ++it) {
    const double width = std::exp(lb) - std::exp(la);
    if (width <= opts.rel_tol_T * std::exp(la) && std::abs(fbest) <= opts.residual_tol * scale) break;
    if (lb - la <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(lb))) break;
    double lm = lb - fb * (lb - la) / (fb - fa);
    const double margin = 0.01 * (lb - la);
    // Secant unless it leaves the bracket or keeps moving the same end.
    if (!(lm > la + margin && lm < lb - margin) || repeats >= 2) {
      lm = 0.5 * (la + lb);
      repeats = 0;
      last_side = 0;
    }
    const double fm = f(std::exp(lm));
    ++out.evaluations;
    if (!std::isfinite(fm)) throw Error("crossover criterion is not finite during refinement");
    if (std::abs(fm) < std::abs(fbest)) {
      best = lm;
      fbest = fm;
    }
    if (fm == 0.0) {
      la = lb = lm;
      break;
    }
    const int side = fm > 0.0 ? -1 : 1;
    repeats = (side == last_side) ? repeats + 1 : 1;
    last_side = side;
    if (fm > 0.0) {
      la = lm;
      fa = fm;
    } else {
      lb = lm;
      fb = fm;
    }
  }
  out.T_c = std::exp(best);
  out.residual = fbest;
  out.bracket = {std::exp(la), std::exp(lb)};
  if (out.bracket.first > out.T_c) out.bracket.first = out.T_c;
  if (out.bracket.second < out.T_c) out.bracket.second = out.T_c;
  if (out.bracket.second - out.bracket.first > opts.rel_tol_T * out.T_c * 10.0)
    throw ConvergenceError("crossover refinement did not converge", out.bracket.second - out.bracket.first);
  return out;
}

}  // namespace detail

/// T_c from the full rates, λ₃ included.
inline CrossoverResult solve_Tc_full(const SystemModel& system, const BathModel& bath,
                                     const CrossoverOptions& opts = {}) {
  if (system.epsilon != 0.0) throw RegimeError("crossover temperature is defined for epsilon = 0 only");
  system.validate();
  bath.validate();
  if (bath.fully_correlated() || bath.alpha == 0.0)
    throw NoCrossing("coherent everywhere on bracket", true);
  auto f = [&](double T) { return xi_squared(system, bath, ThermalState{T}, opts.build); };
  // Natural size of ξ²: 16V_R² with rates switched off.
  const double scale = 16.0 * system.V * system.V;
  auto out = detail::solve_crossover(f, scale, opts, CrossoverMethod::full);
  out.diagnostics = detail::crossover_diagnostics(bath, out.T_c);
  return out;
}

/// Criterion of the high-temperature approximation in log form,
/// 2 ln T - ln[V B e^{φ₀C₀} / (4√(2π³αC₂))], positive when coherent.
inline double approx_criterion(const SystemModel& system, const BathModel& bath, double T) {
  const ThermalState thermal{T};
  const auto c = saddle_coefficients(bath, thermal);
  if (!(c.C2 > 0.0)) throw DomainError("saddle curvature C2 must be positive");
  const double pi = std::numbers::pi;
  const double B = renormalization_B_factored(bath, thermal).B();
  const double log_rhs = std::log(system.V) + std::log(B) + c.phi0 * c.C0 -
                         std::log(4.0 * std::sqrt(2.0 * pi * pi * pi * bath.alpha * c.C2));
  return 2.0 * std::log(T) - log_rhs;
}

/// T_c from the saddle-point rates with λ₃ dropped: (Γz - Γy) = 4V_R.
inline CrossoverResult solve_Tc_approx(const SystemModel& system, const BathModel& bath,
                                       const CrossoverOptions& opts = {}) {
  if (system.epsilon != 0.0) throw RegimeError("crossover temperature is defined for epsilon = 0 only");
  system.validate();
  bath.validate();
  if (bath.dimension != 3) throw UnsupportedDimension("approximate crossover requires D = 3");
  if (bath.fully_correlated() || bath.alpha == 0.0)
    throw NoCrossing("coherent everywhere on bracket", true);
  auto f = [&](double T) { return approx_criterion(system, bath, T); };
  auto out = detail::solve_crossover(f, 1.0, opts, CrossoverMethod::approx);
  out.diagnostics = detail::crossover_diagnostics(bath, out.T_c);
  return out;
}

enum class Coherence { coherent, incoherent, boundary, undefined };

inline const char* to_string(Coherence c) {
  switch (c) {
    case Coherence::coherent: return "coherent";
    case Coherence::incoherent: return "incoherent";
    case Coherence::boundary: return "boundary";
    case Coherence::undefined: return "undefined";
  }
  return "unknown";
}

struct Classification {
  Coherence kind = Coherence::undefined;
  std::optional<double> xi_squared;  // resonant only
  std::optional<double> amplitude;   // 4V_R²/η², off resonance only
  std::string reason;
};

/// Resonant: sign of ξ_R². Off resonance there is no strict criterion, so the
/// answer is a refusal carrying the oscillation amplitude 4V_R²/η² instead.
inline Classification classify(const SystemModel& system, const BathModel& bath, const ThermalState& thermal,
                               const BuildOptions& opts = {}) {
  Classification out;
  if (system.epsilon != 0.0) {
    const CorrelationContext ctx(bath, thermal, opts.response.method);
    const double B = ctx.trivial() ? 1.0 : std::exp(0.5 * ctx.log_B2());
    const auto pq = polaron_quantities(system, B);
    out.amplitude = 4.0 * pq.V_R * pq.V_R / (pq.eta * pq.eta);
    out.reason = "no strict coherence criterion off resonance; see oscillation amplitude 4V_R^2/eta^2";
    return out;
  }
  const double xi2 = xi_squared(system, bath, thermal, opts);
  out.xi_squared = xi2;
  if (std::abs(xi2) < 1e-10) {
    out.kind = Coherence::boundary;
  } else {
    out.kind = xi2 > 0.0 ? Coherence::coherent : Coherence::incoherent;
  }
  return out;
}

}  // namespace polaron
