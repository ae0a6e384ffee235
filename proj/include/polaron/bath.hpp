#pragma once

// Phonon bath: super-Ohmic spectral density, spatial correlation kernels,
// the polaron renormalisation factor B and the phonon propagators φ(τ) and
// φ̃(τ) = φ(τ - iβ/2).
//
// Units: ħ = k_B = ω₀ = 1. Frequencies and temperatures are ratios to ω₀,
// times are in units of 1/ω₀.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

#include "polaron/errors.hpp"
#include "polaron/mathkit/quadrature.hpp"
#include "polaron/mathkit/special_functions.hpp"

namespace polaron {

using mathkit::Complex;

inline constexpr double kInfiniteCorrelation = std::numeric_limits<double>::infinity();

/// Spectral density J(ω) = α ω³ e^{-ω/ω_c} plus the donor–acceptor spatial
/// correlation μ = c/(ω₀ d). μ = 0 is the uncorrelated limit d → ∞ and
/// μ = kInfiniteCorrelation the fully correlated limit d → 0; both are
/// treated exactly.
struct BathModel {
  double alpha = 0.05;
  double omega_c = 4.0;
  int dimension = 3;
  double mu = 0.0;

  bool uncorrelated() const { return mu == 0.0; }
  bool fully_correlated() const { return std::isinf(mu); }
  /// d/c in units of 1/ω₀; infinite when uncorrelated.
  double separation() const {
    return uncorrelated() ? std::numeric_limits<double>::infinity() : 1.0 / mu;
  }

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be finite and >= 0");
    if (!(omega_c > 0.0) || !std::isfinite(omega_c)) throw DomainError("omega_c must be finite and > 0");
    if (dimension < 1 || dimension > 3) throw DomainError("dimension must be 1, 2 or 3");
    if (!(mu >= 0.0)) throw DomainError("mu must be >= 0 or infinite");
  }

  friend bool operator==(const BathModel&, const BathModel&) = default;
};

struct ThermalState {
  double temperature = 1.0;  // k_B T / ω₀

  double beta() const { return 1.0 / temperature; }
  void validate() const {
    if (!(temperature > 0.0) || !std::isfinite(temperature))
      throw DomainError("temperature must be finite and > 0");
  }

  friend bool operator==(const ThermalState&, const ThermalState&) = default;
};

/// Temperature scales governing the crossover: coupling (T₀), correlation
/// (T_x) and cut-off (T_y).
struct TemperatureScales {
  double T0 = 0.0;
  double Tx = 0.0;
  double Ty = 0.0;
};

inline TemperatureScales temperature_scales(const BathModel& bath) {
  const double pi = std::numbers::pi;
  return {1.0 / (std::sqrt(2.0 * bath.alpha) * pi), bath.mu / pi, bath.omega_c};
}

inline double spectral_density(double omega, const BathModel& bath) {
  if (omega < 0.0) throw DomainError("spectral density needs omega >= 0");
  return bath.alpha * omega * omega * omega * std::exp(-omega / bath.omega_c);
}

/// F_D(ω, d): cos, J₀ or sinc of ωd/c for D = 1, 2, 3.
inline double spatial_kernel(double omega, const BathModel& bath) {
  if (omega < 0.0) throw DomainError("spatial kernel needs omega >= 0");
  if (bath.fully_correlated()) return 1.0;
  if (bath.uncorrelated()) return omega == 0.0 ? 1.0 : 0.0;
  const double z = omega / bath.mu;
  switch (bath.dimension) {
    case 1: return std::cos(z);
    case 2: return mathkit::bessel_j0(z);
    default:
      if (z < 1e-4) return 1.0 - z * z / 6.0 + z * z * z * z / 120.0;
      return std::sin(z) / z;
  }
}

/// 1 - F_D(ω, d), expanded near ω = 0 so small frequencies keep full
/// relative precision.
inline double decorrelation(double omega, const BathModel& bath) {
  if (bath.fully_correlated()) return 0.0;
  if (bath.uncorrelated()) return omega == 0.0 ? 0.0 : 1.0;
  const double z = omega / bath.mu;
  if (z < 1e-4) {
    const double z2 = z * z;
    switch (bath.dimension) {
      case 1: return z2 / 2.0 - z2 * z2 / 24.0;
      case 2: return z2 / 4.0 - z2 * z2 / 64.0;
      default: return z2 / 6.0 - z2 * z2 / 120.0;
    }
  }
  return 1.0 - spatial_kernel(omega, bath);
}

namespace detail {

// J(ω)/ω² (1 - F_D) = α ω e^{-ω/ω_c} (1 - F_D)
inline double bath_weight(double omega, const BathModel& bath) {
  return bath.alpha * omega * std::exp(-omega / bath.omega_c) * decorrelation(omega, bath);
}

inline double coth(double x) { return 1.0 / std::tanh(x); }

// 1/sinh(x) without overflow for large x.
inline double csch(double x) {
  if (x > 20.0) return 2.0 * std::exp(-x) / (-std::expm1(-2.0 * x));
  return 1.0 / std::sinh(x);
}

// ∫_W^∞ α ω e^{-ω/ω_c} · 2 · g dω with g bounding the thermal factor on [W, ∞).
inline double weight_tail_bound(double W, const BathModel& bath, double thermal_bound) {
  const double wc = bath.omega_c;
  return 2.0 * bath.alpha * thermal_bound * wc * (W + wc) * std::exp(-W / wc);
}

template <class F, class ThermalBound>
double integrate_bath(F&& f, const BathModel& bath, ThermalBound&& bound, double abs_tol,
                      double rel_tol) {
  // Extend the integration range until the certified tail is negligible.
  const double wc = bath.omega_c;
  double W = 10.0 * wc;
  while (weight_tail_bound(W, bath, bound(W)) > abs_tol / 10.0 && W < 2000.0 * wc) W += 5.0 * wc;
  // Panel breaks at multiples of ω_c keep the adaptive heap small.
  double total = 0.0;
  const int panels = static_cast<int>(std::ceil(W / (2.0 * wc)));
  for (int k = 0; k < panels; ++k) {
    const double a = 2.0 * wc * k;
    total += mathkit::integrate(f, a, a + 2.0 * wc, abs_tol / (2.0 * panels),
                                rel_tol).value;
  }
  return total;
}

inline constexpr double kBathAbsTol = 1e-13;
inline constexpr double kBathRelTol = 1e-13;

}  // namespace detail

/// ln B = -∫ J(ω)ω⁻² (1 - F_D) coth(βω/2) dω.
inline double log_renormalization(const BathModel& bath, const ThermalState& thermal) {
  bath.validate();
  thermal.validate();
  if (bath.fully_correlated() || bath.alpha == 0.0) return 0.0;
  const double beta = thermal.beta();
  auto f = [&](double w) { return detail::bath_weight(w, bath) * detail::coth(0.5 * beta * w); };
  auto bound = [&](double W) { return detail::coth(0.5 * beta * W); };
  return -detail::integrate_bath(f, bath, bound, detail::kBathAbsTol, detail::kBathRelTol);
}

inline double renormalization_B(const BathModel& bath, const ThermalState& thermal) {
  return std::exp(log_renormalization(bath, thermal));
}

struct RenormalizationFactors {
  double B0 = 1.0;   // vacuum part
  double Bth = 1.0;  // thermal part
  double B() const { return B0 * Bth; }
};

/// Parameters of the closed-form propagator: φ₀ = 2π²α/β², x = πd/(cβ),
/// y = ω_c β.
struct PropagatorScales {
  double phi0 = 0.0;
  double x = 0.0;
  double y = 0.0;
};

inline PropagatorScales propagator_scales(const BathModel& bath, const ThermalState& thermal) {
  const double pi = std::numbers::pi;
  const double beta = thermal.beta();
  const double x = bath.uncorrelated() ? std::numeric_limits<double>::infinity()
                                       : (bath.fully_correlated() ? 0.0 : pi / (bath.mu * beta));
  return {2.0 * pi * pi * bath.alpha / (beta * beta), x, bath.omega_c * beta};
}

/// B = B₀ B_th in closed form (D = 3): B₀ from the vacuum integral and B_th
/// through harmonic numbers of complex argument (Hurwitz zeta when
/// uncorrelated).
inline RenormalizationFactors renormalization_B_factored(const BathModel& bath,
                                                         const ThermalState& thermal) {
  bath.validate();
  thermal.validate();
  if (bath.dimension != 3) throw UnsupportedDimension("factored B requires D = 3");
  if (bath.fully_correlated() || bath.alpha == 0.0) return {};
  const double pi = std::numbers::pi;
  const double wc = bath.omega_c;
  // (dω_c/c)² / (1 + (dω_c/c)²) = ω_c² / (μ² + ω_c²)
  const double geometric = bath.uncorrelated() ? 1.0 : wc * wc / (bath.mu * bath.mu + wc * wc);
  RenormalizationFactors out;
  out.B0 = std::exp(-bath.alpha * wc * wc * geometric);

  const auto [phi0, x, y] = propagator_scales(bath, thermal);
  const double inv_y = 1.0 / y;
  if (bath.uncorrelated()) {
    out.Bth = std::exp(bath.alpha * wc * wc *
                       (1.0 - inv_y * inv_y *
                                  (mathkit::hurwitz_zeta(2.0, 1.0 + inv_y) +
                                   mathkit::hurwitz_zeta(2.0, inv_y))));
    return out;
  }
  // (iπ/x)(H(1/y - ix/π) - H(1/y + ix/π)) = (2π/x) Im H(1/y + ix/π)
  const Complex h = mathkit::harmonic_number(Complex(inv_y, x / pi));
  const double correlated = 2.0 * pi / x * h.imag();
  const double exponent =
      phi0 / (2.0 * pi * pi) * (correlated - 2.0 * mathkit::polygamma(1, 1.0 + inv_y));
  out.Bth = std::exp(exponent);
  return out;
}

enum class PropagatorMethod { automatic, numeric, analytic };

namespace detail {

inline bool analytic_available(const BathModel& bath) {
  return bath.dimension == 3 || bath.uncorrelated() || bath.fully_correlated();
}

// [ψ(w + is) - ψ(w - is)] / (2is), continuous as s → 0.
inline Complex digamma_difference(Complex w, double s) {
  if (s < 1e-4) {
    return mathkit::polygamma(1, w) - s * s / 6.0 * mathkit::polygamma(3, w);
  }
  const Complex is(0.0, s);
  return (mathkit::digamma(w + is) - mathkit::digamma(w - is)) / (2.0 * is);
}

// ψ'(w) - [ψ(w + is) - ψ(w - is)]/(2is). For |w| ≫ s the two terms agree to
// O(s²/w³) and subtracting them loses most digits, so the difference is
// summed directly: Σ_k (-1)^{k+1} s^{2k} ψ^{(2k+1)}(w)/(2k+1)! with the
// polygammas in their large-|w| expansion.
inline Complex correlated_trigamma(Complex w, double s) {
  if (w.real() <= 0.0 || std::abs(w) < std::max(30.0, 3.0 * s)) {
    return mathkit::polygamma(1, w) - digamma_difference(w, s);
  }
  const Complex u = 1.0 / w;
  const Complex u2 = u * u;
  const Complex su2 = s * s * u2;
  Complex sum = 0.0;
  Complex power = su2 * u;  // (su)^{2k} u
  for (int k = 1; k <= 60; ++k) {
    const double m = 2.0 * k + 1.0;
    Complex bracket = 1.0 / m + 0.5 * u;
    Complex up = u2;
    double binom = 1.0;  // C(2j+2k, 2j)
    for (int j = 1; j <= 10; ++j) {
      binom *= (2.0 * j + 2.0 * k - 1.0) * (2.0 * j + 2.0 * k) / ((2.0 * j - 1.0) * (2.0 * j));
      bracket += mathkit::detail::kBernoulliEven[j - 1] * binom / m * up;
      up *= u2;
    }
    sum += ((k % 2) ? 1.0 : -1.0) * power * bracket;
    if (std::abs(power) < 1e-18 * std::abs(sum)) break;
    power *= su2;
  }
  return sum;
}

}  // namespace detail

/// Closed-form φ(τ) at complex τ (D = 3, or μ ∈ {0, ∞} for any D), obtained
/// by summing the Bose series term by term. Valid for -β - 1/ω_c < Im τ < 1/ω_c.
inline Complex propagator_phi_closed_form(Complex tau, const BathModel& bath,
                                          const ThermalState& thermal) {
  if (!detail::analytic_available(bath))
    throw UnsupportedDimension("closed-form propagator requires D = 3 (or mu in {0, inf})");
  if (bath.fully_correlated() || bath.alpha == 0.0) return 0.0;
  const double beta = thermal.beta();
  const double inv_y = 1.0 / (bath.omega_c * beta);
  const Complex i(0.0, 1.0);
  const Complex w1 = inv_y + i * tau / beta;
  const Complex w2 = 1.0 + inv_y - i * tau / beta;
  const double pref = 2.0 * bath.alpha / (beta * beta);
  if (bath.uncorrelated()) return pref * (mathkit::polygamma(1, w1) + mathkit::polygamma(1, w2));
  const double s = bath.separation() / beta;
  return pref * (detail::correlated_trigamma(w1, s) + detail::correlated_trigamma(w2, s));
}

/// φ(τ) = 2∫ J ω⁻² (1 - F_D)(cos ωτ coth(βω/2) - i sin ωτ) dω.
inline Complex propagator_phi(double tau, const BathModel& bath, const ThermalState& thermal,
                              PropagatorMethod method = PropagatorMethod::automatic) {
  bath.validate();
  thermal.validate();
  if (bath.fully_correlated() || bath.alpha == 0.0) return 0.0;
  if (method == PropagatorMethod::automatic)
    method = detail::analytic_available(bath) ? PropagatorMethod::analytic : PropagatorMethod::numeric;
  if (method == PropagatorMethod::analytic) return propagator_phi_closed_form(tau, bath, thermal);

  const double beta = thermal.beta();
  auto re = [&](double w) {
    return 2.0 * detail::bath_weight(w, bath) * std::cos(w * tau) * detail::coth(0.5 * beta * w);
  };
  auto im = [&](double w) { return -2.0 * detail::bath_weight(w, bath) * std::sin(w * tau); };
  auto coth_bound = [&](double W) { return 2.0 * detail::coth(0.5 * beta * W); };
  auto unit_bound = [&](double) { return 2.0; };
  const double tol = detail::kBathAbsTol * 10.0;
  return {detail::integrate_bath(re, bath, coth_bound, tol, detail::kBathRelTol),
          tau == 0.0 ? 0.0 : detail::integrate_bath(im, bath, unit_bound, tol, detail::kBathRelTol)};
}

/// C(x, y, τ') with φ̃(τ) = φ₀ C(x, y, πτ/β); x = ∞ (uncorrelated) drops the
/// correlation bracket and x = 0 gives C ≡ 0.
inline double tilde_shape(double x, double y, double tau_prime) {
  const double pi = std::numbers::pi;
  if (x == 0.0) return 0.0;
  const Complex i(0.0, 1.0);
  const double p = 0.5 + 1.0 / y;
  const Complex a = p - i * tau_prime / pi;
  const Complex b = p + i * tau_prime / pi;
  Complex value = (mathkit::polygamma(1, a) + mathkit::polygamma(1, b)) / (pi * pi);
  if (std::isfinite(x)) {
    // -(1/π²)[Δ(a) + Δ(b)] where Δ(w) = [ψ(w + ix/π) - ψ(w - ix/π)] / (2ix/π);
    // equal to the (-i/2πx)[ψ...] bracket of the digamma form.
    value -= (detail::digamma_difference(a, x / pi) + detail::digamma_difference(b, x / pi)) /
             (pi * pi);
  }
  return value.real();
}

/// φ̃(τ) = 2∫ J ω⁻² (1 - F_D) cos(ωτ) / sinh(βω/2) dω; even and real.
inline double propagator_phi_tilde(double tau, const BathModel& bath, const ThermalState& thermal,
                                   PropagatorMethod method = PropagatorMethod::automatic) {
  bath.validate();
  thermal.validate();
  if (bath.fully_correlated() || bath.alpha == 0.0) return 0.0;
  if (method == PropagatorMethod::automatic)
    method = (bath.dimension == 3) ? PropagatorMethod::analytic : PropagatorMethod::numeric;
  const double beta = thermal.beta();
  if (method == PropagatorMethod::analytic) {
    if (bath.dimension != 3) throw UnsupportedDimension("analytic phi_tilde requires D = 3");
    const auto s = propagator_scales(bath, thermal);
    return s.phi0 * tilde_shape(s.x, s.y, std::numbers::pi * tau / beta);
  }
  auto f = [&](double w) {
    return 2.0 * detail::bath_weight(w, bath) * std::cos(w * tau) * detail::csch(0.5 * beta * w);
  };
  auto bound = [&](double W) { return 2.0 * detail::csch(0.5 * beta * W); };
  return detail::integrate_bath(f, bath, bound, detail::kBathAbsTol * 10.0, detail::kBathRelTol);
}

/// Second-order expansion of φ̃ about τ = 0: φ̃ ≈ φ₀ (C₀ - τ'² C₂).
struct SaddleCoefficients {
  double phi0 = 0.0;
  double x = 0.0;
  double y = 0.0;
  double C0 = 0.0;
  double C2 = 0.0;
  /// Multiphonon validity of the expansion (φ₀ ≫ 1 for large x, φ₀x² ≫ 1
  /// for small x; φ₀x²y³/π⁴ ≫ 1 or φ₀y ≫ 1 when y < 1), evaluated as "> 1".
  bool multiphonon = false;
};

inline SaddleCoefficients saddle_coefficients(const BathModel& bath, const ThermalState& thermal) {
  bath.validate();
  thermal.validate();
  if (bath.dimension != 3) throw UnsupportedDimension("saddle coefficients require D = 3");
  const double pi = std::numbers::pi;
  const auto [phi0, x, y] = propagator_scales(bath, thermal);
  SaddleCoefficients out{phi0, x, y, 0.0, 0.0, false};
  const double p = 0.5 + 1.0 / y;
  const double tri = mathkit::polygamma(1, p);
  const double tetra = mathkit::polygamma(3, p);
  out.C0 = 2.0 / (pi * pi) * tri;
  out.C2 = tetra / std::pow(pi, 4);
  if (x == 0.0) {
    out.C0 = 0.0;
    out.C2 = 0.0;
  } else if (std::isfinite(x)) {
    const double u = x / pi;
    if (u < 1e-4) {
      // Removable limit of the digamma brackets.
      const double fifth = mathkit::detail::polygamma_any(5, Complex(p, 0.0)).real();
      out.C0 -= 2.0 / (pi * pi) * (tri - u * u / 6.0 * tetra);
      out.C2 -= (tetra - u * u / 6.0 * fifth) / std::pow(pi, 4);
    } else {
      const Complex zp(p, u);
      const Complex zm(p, -u);
      const Complex c0 = Complex(0.0, 1.0) / (pi * x) * (mathkit::digamma(zp) - mathkit::digamma(zm));
      const Complex c2 = Complex(0.0, 1.0) / (2.0 * std::pow(pi, 3) * x) *
                         (mathkit::polygamma(2, zp) - mathkit::polygamma(2, zm));
      if (std::abs(c0.imag()) > 1e-12 * std::max(1.0, std::abs(c0)) ||
          std::abs(c2.imag()) > 1e-12 * std::max(1.0, std::abs(c2))) {
        throw Error("saddle coefficients acquired an imaginary part");
      }
      out.C0 += c0.real();
      out.C2 += c2.real();
    }
  }
  if (y >= 1.0) {
    out.multiphonon = (x >= 1.0) ? phi0 > 1.0 : phi0 * x * x > 1.0;
  } else {
    out.multiphonon = std::isfinite(x) ? phi0 * x * x * y * y * y / std::pow(pi, 4) > 1.0
                                       : phi0 * y > 1.0;
  }
  return out;
}

}  // namespace polaron
