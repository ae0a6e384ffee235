#pragma once

// Polaron-frame bath correlation functions Λ_xx, Λ_yy and their half-line
// Fourier transforms K(ω) = ∫₀^∞ e^{iωτ} Λ(τ) dτ = γ(ω)/2 + i S(ω).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include "polaron/bath.hpp"
#include "polaron/mathkit/quadrature.hpp"

namespace polaron {

enum class Channel { xx, yy };

struct ResponseOptions {
  double rel_tol = 1e-11;
  double abs_tol = 1e-15;
  // Negative γ above -negative_floor is treated as rounding noise and zeroed.
  double negative_floor = 1e-12;
  PropagatorMethod method = PropagatorMethod::automatic;

  friend bool operator==(const ResponseOptions&, const ResponseOptions&) = default;
};

struct Response {
  double gamma = 0.0;
  double S = 0.0;
  double error = 0.0;
  bool negative_gamma = false;  // a negative rate beyond the floor was seen
};

struct ResponseSample {
  double omega = 0.0;
  double gamma_xx = 0.0;
  double gamma_yy = 0.0;
  double S_xx = 0.0;
  double S_yy = 0.0;
  bool negative_gamma = false;
};

/// Bath and temperature with the propagator normalisation fixed once:
/// ln B² = -φ(0), evaluated with the same propagator method as φ(τ).
class CorrelationContext {
 public:
  CorrelationContext(const BathModel& bath, const ThermalState& thermal,
                     PropagatorMethod method = PropagatorMethod::automatic)
      : bath_(bath), thermal_(thermal), method_(method) {
    bath_.validate();
    thermal_.validate();
    if (method_ == PropagatorMethod::automatic)
      method_ = detail::analytic_available(bath_) ? PropagatorMethod::analytic
                                                  : PropagatorMethod::numeric;
    trivial_ = bath_.fully_correlated() || bath_.alpha == 0.0;
    if (!trivial_) log_B2_ = -phi(0.0).real();
  }

  const BathModel& bath() const { return bath_; }
  const ThermalState& thermal() const { return thermal_; }
  bool trivial() const { return trivial_; }
  double log_B2() const { return log_B2_; }

  Complex phi(double tau) const {
    if (trivial_) return 0.0;
    return propagator_phi(tau, bath_, thermal_, method_);
  }

  /// (Λ_xx(τ), Λ_yy(τ)). Written through e^{±φ + ln B²} so that large φ(0)
  /// at high temperature cannot overflow.
  std::pair<Complex, Complex> lambdas(double tau) const {
    if (trivial_) return {0.0, 0.0};
    const Complex p = phi(tau);
    if (std::abs(p) < 1.0) {
      // Small-φ branch keeps relative precision in the tails.
      const double B2 = std::exp(log_B2_);
      const Complex s = std::sinh(0.5 * p);
      return {2.0 * B2 * s * s, B2 * std::sinh(p)};
    }
    const Complex up = std::exp(p + log_B2_);
    const Complex down = std::exp(-p + log_B2_);
    const double B2 = std::exp(log_B2_);
    return {0.5 * (up + down) - B2, 0.5 * (up - down)};
  }

  /// Characteristic decay length of Λ(τ).
  double time_scale() const {
    double s = std::max(1.0 / bath_.omega_c, thermal_.beta());
    if (!bath_.uncorrelated() && !bath_.fully_correlated()) s = std::max(s, bath_.separation());
    return 4.0 * s;
  }

  /// Width of the central peak of Λ(τ): φ(0) - φ(τ) reaches O(1) after about
  /// 1/(ω_c √φ(0)), which is tiny when φ(0) is large.
  double inner_time_scale() const {
    const double t = std::min(1.0 / bath_.omega_c, thermal_.beta());
    return t / std::sqrt(1.0 + std::abs(log_B2_));
  }

 private:
  BathModel bath_;
  ThermalState thermal_;
  PropagatorMethod method_;
  bool trivial_ = false;
  double log_B2_ = 0.0;
};

inline Complex lambda_xx(double tau, const BathModel& bath, const ThermalState& thermal) {
  return CorrelationContext(bath, thermal).lambdas(tau).first;
}

inline Complex lambda_yy(double tau, const BathModel& bath, const ThermalState& thermal) {
  return CorrelationContext(bath, thermal).lambdas(tau).second;
}

namespace detail {

inline Response to_response(Complex K, double err, const ResponseOptions& opts) {
  Response r{2.0 * K.real(), K.imag(), err, false};
  if (r.gamma < 0.0) {
    if (r.gamma > -opts.negative_floor) {
      r.gamma = 0.0;
    } else {
      r.negative_gamma = true;
    }
  }
  return r;
}

}  // namespace detail

/// Responses of both channels at +ω and -ω from one pass over Λ(τ).
inline std::pair<ResponseSample, ResponseSample> response_pair(double omega,
                                                               const CorrelationContext& ctx,
                                                               const ResponseOptions& opts = {}) {
  ResponseSample plus{omega};
  ResponseSample minus{-omega};
  if (ctx.trivial()) return {plus, minus};
  omega = std::abs(omega);
  plus.omega = omega;
  minus.omega = -omega;
  auto h = [&](double t) {
    const auto [lx, ly] = ctx.lambdas(t);
    const Complex e = std::exp(Complex(0.0, omega * t));
    const Complex ec = std::conj(e);
    return mathkit::CVec<4>{e * lx, ec * lx, e * ly, ec * ly};
  };
  mathkit::QuadratureOptions q;
  q.abs_tol = opts.abs_tol;
  q.rel_tol = opts.rel_tol;
  q.scale = ctx.time_scale();
  q.inner_scale = ctx.inner_time_scale();
  q.max_intervals = 2000;
  q.max_panels = 2000;
  const double half_period = omega > 0.0 ? std::numbers::pi / omega : 0.0;
  const auto K = mathkit::integrate_halfline_accelerated<4>(h, half_period, q);
  const auto xp = detail::to_response(K.value[0], K.error_estimate, opts);
  const auto xm = detail::to_response(K.value[1], K.error_estimate, opts);
  const auto yp = detail::to_response(K.value[2], K.error_estimate, opts);
  const auto ym = detail::to_response(K.value[3], K.error_estimate, opts);
  plus.gamma_xx = xp.gamma;
  plus.S_xx = xp.S;
  plus.gamma_yy = yp.gamma;
  plus.S_yy = yp.S;
  plus.negative_gamma = xp.negative_gamma || yp.negative_gamma;
  minus.gamma_xx = xm.gamma;
  minus.S_xx = xm.S;
  minus.gamma_yy = ym.gamma;
  minus.S_yy = ym.S;
  minus.negative_gamma = xm.negative_gamma || ym.negative_gamma;
  return {plus, minus};
}

/// γ_ii(ω) = 2 Re K_ii(ω) and S_ii(ω) = Im K_ii(ω) for a single channel.
inline Response response(double omega, Channel which, const BathModel& bath,
                         const ThermalState& thermal, const ResponseOptions& opts = {}) {
  CorrelationContext ctx(bath, thermal, opts.method);
  if (ctx.trivial()) return {};
  auto h = [&](double t) {
    const auto [lx, ly] = ctx.lambdas(t);
    return mathkit::CVec<1>{std::exp(Complex(0.0, omega * t)) * (which == Channel::xx ? lx : ly)};
  };
  mathkit::QuadratureOptions q;
  q.abs_tol = opts.abs_tol;
  q.rel_tol = opts.rel_tol;
  q.scale = ctx.time_scale();
  q.inner_scale = ctx.inner_time_scale();
  q.max_intervals = 2000;
  q.max_panels = 2000;
  const double half_period = omega != 0.0 ? std::numbers::pi / std::abs(omega) : 0.0;
  const auto K = mathkit::integrate_halfline_accelerated<1>(h, half_period, q);
  return detail::to_response(K.value[0], K.error_estimate, opts);
}

/// Thread-safe memo of response samples keyed by content
/// (bath, temperature, ω, options). Entries are only ever added.
class ResponseCache {
 public:
  ResponseSample get(double omega, const BathModel& bath, const ThermalState& thermal,
                     const ResponseOptions& opts = {}) {
    const Key key = make_key(omega, bath, thermal, opts);
    {
      std::shared_lock lock(mutex_);
      if (auto it = entries_.find(key); it != entries_.end()) {
        hits_.fetch_add(1, std::memory_order_relaxed);
        return it->second;
      }
    }
    CorrelationContext ctx(bath, thermal, opts.method);
    const auto [plus, minus] = response_pair(omega, ctx, opts);
    std::unique_lock lock(mutex_);
    // A concurrent writer may have inserted the same values; emplace keeps
    // the first, which is identical.
    entries_.emplace(make_key(plus.omega, bath, thermal, opts), plus);
    entries_.emplace(make_key(minus.omega, bath, thermal, opts), minus);
    misses_.fetch_add(1, std::memory_order_relaxed);
    return omega >= 0.0 ? plus : minus;
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
  }
  std::size_t hits() const { return hits_.load(); }
  /// Every frequency held, ascending.
  std::vector<double> omegas() const {
    std::shared_lock lock(mutex_);
    std::vector<double> out;
    for (const auto& [key, value] : entries_) out.push_back(std::get<5>(key));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }
  std::size_t misses() const { return misses_.load(); }

 private:
  using Key = std::tuple<double, double, int, double, double, double, double, double, int>;

  static Key make_key(double omega, const BathModel& b, const ThermalState& t,
                      const ResponseOptions& o) {
    // -0.0 and 0.0 share an entry.
    if (omega == 0.0) omega = 0.0;
    return {b.alpha, b.omega_c, b.dimension, b.mu, t.temperature, omega, o.rel_tol, o.abs_tol,
            static_cast<int>(o.method)};
  }

  mutable std::shared_mutex mutex_;
  std::map<Key, ResponseSample> entries_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
};

/// Steepest-descent estimate of γ_ll(η) in the multiphonon regime.
struct SaddleRate {
  double value = 0.0;     // general η
  double at_zero = 0.0;   // βB²e^{φ₀C₀}/(2√(πC₂φ₀))
  bool multiphonon = false;
  SaddleCoefficients coefficients;
};

inline SaddleRate gamma_saddle(double eta, const BathModel& bath, const ThermalState& thermal) {
  SaddleRate out;
  out.coefficients = saddle_coefficients(bath, thermal);
  const auto& c = out.coefficients;
  out.multiphonon = c.multiphonon;
  if (bath.fully_correlated() || bath.alpha == 0.0 || c.C2 <= 0.0) return out;
  const double pi = std::numbers::pi;
  const double beta = thermal.beta();
  const double log_B2 = 2.0 * std::log(renormalization_B_factored(bath, thermal).B());
  const double width = c.C2 * c.phi0;
  const double log_zero = std::log(beta / (2.0 * std::sqrt(pi * width))) + log_B2 + c.phi0 * c.C0;
  out.at_zero = std::exp(log_zero);
  out.value = std::exp(log_zero + 0.5 * beta * eta -
                       beta * beta * eta * eta / (4.0 * pi * pi * width));
  return out;
}

}  // namespace polaron
