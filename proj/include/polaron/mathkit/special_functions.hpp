#pragma once

// Digamma/polygamma of complex argument, Hurwitz zeta, harmonic numbers and
// J0. Polygammas use upward recurrence into |z| >= 10 followed by the
// asymptotic (Bernoulli) series; Re z < 0 goes through reflection first.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "polaron/errors.hpp"

namespace polaron::mathkit {

using Complex = std::complex<double>;

inline constexpr double kEulerGamma = 0.577215664901532860606512090082402431;

namespace detail {

// B_2, B_4, ..., B_20
inline constexpr std::array<double, 10> kBernoulliEven = {
    1.0 / 6.0,         -1.0 / 30.0,   1.0 / 42.0,       -1.0 / 30.0,
    5.0 / 66.0,        -691.0 / 2730.0, 7.0 / 6.0,      -3617.0 / 510.0,
    43867.0 / 798.0,   -174611.0 / 330.0};

inline constexpr double kAsymptoticRadius = 10.0;

inline bool is_pole(Complex z) {
  return z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real());
}

inline Complex ipow(Complex z, int n) {
  Complex r = 1.0;
  for (int k = 0; k < n; ++k) r *= z;
  return r;
}

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// ψ⁽ⁿ⁾ for |z| >= kAsymptoticRadius, Re z >= 0.
inline Complex polygamma_asymptotic(int n, Complex z) {
  const Complex inv = 1.0 / z;
  const Complex inv2 = inv * inv;
  if (n == 0) {
    Complex sum = std::log(z) - 0.5 * inv;
    Complex power = inv2;
    for (int k = 1; k <= 10; ++k) {
      sum -= kBernoulliEven[k - 1] / (2.0 * k) * power;
      power *= inv2;
    }
    return sum;
  }
  // (-1)^{n+1} [ (n-1)!/z^n + n!/(2 z^{n+1}) + Σ B_2k (2k+n-1)!/((2k)! z^{2k+n}) ]
  Complex inv_n = ipow(inv, n);
  Complex sum = factorial(n - 1) * inv_n + 0.5 * factorial(n) * inv_n * inv;
  Complex power = inv_n * inv2;
  for (int k = 1; k <= 10; ++k) {
    // (2k+n-1)!/(2k)! = Π_{j=1}^{n-1} (2k+j)
    double ratio = 1.0;
    for (int j = 1; j <= n - 1; ++j) ratio *= 2.0 * k + j;
    sum += kBernoulliEven[k - 1] * ratio * power;
    power *= inv2;
  }
  return (n % 2 == 0) ? -sum : sum;
}

// d^n/dz^n cot(πz) for n <= 3.
inline Complex cot_pi_derivative(int n, Complex z) {
  const double pi = std::numbers::pi;
  const Complex c = 1.0 / std::tan(pi * z);
  const Complex c2 = c * c;
  switch (n) {
    case 0: return c;
    case 1: return -pi * (1.0 + c2);
    case 2: return 2.0 * pi * pi * c * (1.0 + c2);
    case 3: return -2.0 * pi * pi * pi * (1.0 + c2) * (1.0 + 3.0 * c2);
    default: throw DomainError("reflection formula implemented for orders <= 3");
  }
}

// Any order n >= 0; used internally with n up to 5 for series expansions.
inline Complex polygamma_any(int n, Complex z) {
  if (is_pole(z)) throw PoleError("polygamma evaluated at a non-positive integer");
  if (z.real() < 0.0) {
    // (-1)^n ψ⁽ⁿ⁾(1-z) - ψ⁽ⁿ⁾(z) = π dⁿ/dzⁿ cot(πz)
    const Complex reflected = polygamma_any(n, 1.0 - z);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * reflected - std::numbers::pi * cot_pi_derivative(n, z);
  }
  // ψ⁽ⁿ⁾(z) = ψ⁽ⁿ⁾(z+1) - (-1)^n n!/z^{n+1}
  Complex correction = 0.0;
  const double nfact = factorial(n);
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  while (std::abs(z) < kAsymptoticRadius) {
    correction += sign * nfact * ipow(1.0 / z, n + 1);
    z += 1.0;
  }
  return polygamma_asymptotic(n, z) - correction;
}

}  // namespace detail

/// ψ(z). Throws PoleError at z = 0, -1, -2, ...
inline Complex digamma(Complex z) { return detail::polygamma_any(0, z); }

inline double digamma(double x) { return digamma(Complex(x, 0.0)).real(); }

/// ψ⁽ⁿ⁾(z) for n in {1, 2, 3}; these are the orders the propagator closed
/// forms need.
inline Complex polygamma(int n, Complex z) {
  if (n < 1 || n > 3) throw DomainError("polygamma order must be 1, 2 or 3");
  return detail::polygamma_any(n, z);
}

inline double polygamma(int n, double x) { return polygamma(n, Complex(x, 0.0)).real(); }

/// Bessel function of the first kind, order zero.
inline double bessel_j0(double x) { return std::cyl_bessel_j(0.0, std::abs(x)); }

/// ζ(s, a) = Σ_{k>=0} (k+a)^{-s} for s > 1, a > 0 via Euler–Maclaurin.
inline double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0)) throw DomainError("hurwitz_zeta requires s > 1 and a > 0");
  constexpr double kShift = 15.0;
  double sum = 0.0;
  double w = a;
  while (w < kShift) {
    sum += std::pow(w, -s);
    w += 1.0;
  }
  sum += std::pow(w, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(w, -s);
  // Σ_j B_2j/(2j)! s(s+1)...(s+2j-2) w^{-s-2j+1}
  double rising = s;
  double fact = 2.0;
  double power = std::pow(w, -s - 1.0);
  for (int j = 1; j <= 10; ++j) {
    sum += detail::kBernoulliEven[j - 1] / fact * rising * power;
    rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
    fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
    power /= w * w;
  }
  return sum;
}

/// H(m) = ψ(m+1) + γ_E, the analytic continuation of Σ_{i=1}^{m} 1/i.
inline Complex harmonic_number(Complex m) {
  if (detail::is_pole(m + 1.0)) throw PoleError("harmonic_number pole at negative integer m");
  return digamma(m + 1.0) + kEulerGamma;
}

}  // namespace polaron::mathkit
