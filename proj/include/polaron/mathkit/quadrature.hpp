#pragma once

// Adaptive Gauss–Kronrod quadrature, semi-infinite integrals of decaying
// integrands, and half-line Fourier transforms of slowly decaying functions.
//
// Integrand values are fixed-size arrays of complex numbers so the same
// machinery evaluates one transform or a batch of transforms sharing the
// expensive part of the integrand (e.g. K(ω) and K(-ω) from one Λ(τ)).

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <queue>
#include <type_traits>
#include <vector>

#include "polaron/errors.hpp"

namespace polaron::mathkit {

template <class T>
struct QuadratureResult {
  T value{};
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-8;
  double rel_tol = 0.0;
  // Characteristic length of the integrand (decay scale for semi-infinite
  // integrals, structure scale for Fourier transforms).
  double scale = 1.0;
  // Width of any sharp feature at the origin. When set, the head interval is
  // cut geometrically from this width so the feature cannot be stepped over.
  double inner_scale = 0.0;
  std::size_t max_intervals = 4000;
  std::size_t max_panels = 400;

  double target(double magnitude) const { return std::max(abs_tol, rel_tol * magnitude); }
};

template <std::size_t N>
using CVec = std::array<std::complex<double>, N>;

namespace detail {

template <std::size_t N>
inline CVec<N>& operator+=(CVec<N>& a, const CVec<N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] += b[i];
  return a;
}

template <std::size_t N>
inline CVec<N> operator+(CVec<N> a, const CVec<N>& b) { return a += b; }

template <std::size_t N>
inline CVec<N> operator-(CVec<N> a, const CVec<N>& b) {
  for (std::size_t i = 0; i < N; ++i) a[i] -= b[i];
  return a;
}

template <std::size_t N>
inline CVec<N> operator*(double s, CVec<N> a) {
  for (auto& x : a) x *= s;
  return a;
}

template <std::size_t N>
inline double magnitude(const CVec<N>& a) {
  double m = 0.0;
  for (const auto& x : a) m = std::max(m, std::abs(x));
  return m;
}

// 15-point Kronrod / 7-point Gauss abscissae and weights on [-1, 1].
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Segment {
  double a = 0.0;
  double b = 0.0;
  CVec<N> value{};
  double error = 0.0;
  bool at_roundoff = false;
  bool operator<(const Segment& other) const { return error < other.error; }
};

// One GK15 panel with the QUADPACK error heuristic.
template <std::size_t N, class F>
Segment<N> gk15(F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<CVec<N>, 15> fx;
  fx[7] = f(center);
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fx[j] = f(center - dx);
    fx[14 - j] = f(center + dx);
  }
  CVec<N> kronrod = kWgk[7] * fx[7];
  CVec<N> gauss = kWg[3] * fx[7];
  for (std::size_t j = 0; j < 7; ++j) {
    kronrod += kWgk[j] * (fx[j] + fx[14 - j]);
    if (j % 2 == 1) gauss += kWg[j / 2] * (fx[j] + fx[14 - j]);
  }
  const CVec<N> mean = 0.5 * kronrod;
  double resasc = kWgk[7] * magnitude(fx[7] - mean);
  for (std::size_t j = 0; j < 7; ++j)
    resasc += kWgk[j] * (magnitude(fx[j] - mean) + magnitude(fx[14 - j] - mean));
  resasc *= std::abs(half);

  Segment<N> seg{a, b, half * kronrod, 0.0};
  double err = magnitude(half * (kronrod - gauss));
  if (resasc > 0.0 && err > 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * magnitude(seg.value);
  seg.error = std::max(err, roundoff);
  seg.at_roundoff = err <= roundoff;
  return seg;
}

}  // namespace detail

/// Globally adaptive GK15 on [a, b] for array-valued integrands.
template <std::size_t N, class F>
QuadratureResult<CVec<N>> integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                             double rel_tol = 0.0,
                                             std::size_t max_intervals = 4000) {
  using namespace detail;
  QuadratureResult<CVec<N>> out;
  if (a == b) return out;
  std::priority_queue<detail::Segment<N>> heap;
  auto first = detail::gk15<N>(f, a, b);
  out.evaluations = 15;
  CVec<N> total = first.value;
  double error = first.error;
  heap.push(first);
  auto converged = [&] {
    return error <= std::max(abs_tol, rel_tol * detail::magnitude(total));
  };
  while (!converged()) {
    // The worst panel is already at its rounding floor, so bisecting further
    // cannot help; the remaining estimate is reported as is.
    if (heap.top().at_roundoff) break;
    if (heap.size() >= max_intervals) {
      throw ConvergenceError("adaptive quadrature exceeded interval budget", error);
    }
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > std::min(worst.a, worst.b) && mid < std::max(worst.a, worst.b))) {
      throw ConvergenceError("adaptive quadrature hit floating-point resolution", error);
    }
    auto left = detail::gk15<N>(f, worst.a, mid);
    auto right = detail::gk15<N>(f, mid, worst.b);
    out.evaluations += 30;
    total = total - worst.value + left.value + right.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to drop accumulated cancellation from the running updates.
  CVec<N> resummed{};
  double err_sum = 0.0;
  while (!heap.empty()) {
    resummed += heap.top().value;
    err_sum += heap.top().error;
    heap.pop();
  }
  out.value = resummed;
  out.error_estimate = err_sum;
  return out;
}

/// Scalar real convenience wrapper of integrate_adaptive.
template <class F>
QuadratureResult<double> integrate(F&& f, double a, double b, double abs_tol, double rel_tol = 0.0) {
  auto r = integrate_adaptive<1>(
      [&](double x) { return CVec<1>{std::complex<double>(f(x), 0.0)}; }, a, b, abs_tol, rel_tol);
  return {r.value[0].real(), r.error_estimate, r.evaluations};
}

namespace detail {

// Wynn's epsilon algorithm on a sequence of partial sums. Returns the
// estimate from the highest even column and a rough error: the distance to
// the estimate obtained without the newest partial sum.
inline std::pair<std::complex<double>, double> wynn_epsilon(
    const std::vector<std::complex<double>>& sums) {
  using C = std::complex<double>;
  auto extrapolate = [](const std::vector<C>& s) -> C {
    const std::size_t n = s.size();
    if (n < 3) return s.back();
    std::vector<C> prev(n, C{});  // column k-1
    std::vector<C> curr(s);       // column k
    C best = s.back();
    for (std::size_t k = 1; k < n; ++k) {
      std::vector<C> next(n - k);
      for (std::size_t i = 0; i + k < n; ++i) {
        const C diff = curr[i + 1] - curr[i];
        const bool estimates = (k - 1) % 2 == 0;
        if (std::abs(diff) == 0.0 ||
            (estimates && std::abs(diff) <= 1e-15 * std::abs(curr[i + 1]))) {
          return estimates ? curr[i + 1] : best;
        }
        next[i] = prev[i + 1] + 1.0 / diff;
      }
      prev = std::move(curr);
      curr = std::move(next);
      if (k % 2 == 0) best = curr.back();
    }
    return best;
  };
  constexpr std::size_t kWindow = 24;
  std::vector<std::complex<double>> window(
      sums.begin() + static_cast<std::ptrdiff_t>(sums.size() > kWindow ? sums.size() - kWindow : 0),
      sums.end());
  const C now = extrapolate(window);
  window.pop_back();
  const C before = window.empty() ? now : extrapolate(window);
  return {now, std::abs(now - before)};
}

}  // namespace detail

/// ∫_0^∞ h(τ) dτ where h already carries any oscillatory factor.
///
/// `half_period` > 0: the tail is summed over successive intervals of that
/// length (alternating contributions) and the partial sums are accelerated
/// with the epsilon algorithm. `half_period` == 0: geometric panels
/// [s, 2s], [2s, 4s], ... with the same acceleration, suitable for
/// non-oscillatory algebraic tails.
template <std::size_t N, class F>
QuadratureResult<CVec<N>> integrate_halfline_accelerated(F&& h, double half_period,
                                                         const QuadratureOptions& opts) {
  using namespace detail;
  QuadratureResult<CVec<N>> out;
  double head_end = opts.scale;
  if (half_period > 0.0) head_end = std::ceil(opts.scale / half_period) * half_period;

  QuadratureResult<CVec<N>> head;
  {
    std::vector<double> cuts{0.0};
    if (opts.inner_scale > 0.0)
      for (double c = opts.inner_scale; c < head_end; c *= 4.0) cuts.push_back(c);
    cuts.push_back(head_end);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      auto part = integrate_adaptive<N>(h, cuts[i], cuts[i + 1], opts.abs_tol, opts.rel_tol,
                                        opts.max_intervals);
      head.value += part.value;
      head.error_estimate += part.error_estimate;
      head.evaluations += part.evaluations;
    }
  }
  out.evaluations += head.evaluations;
  const double target = opts.target(detail::magnitude(head.value));
  const double panel_tol = target / 20.0;

  std::vector<std::vector<std::complex<double>>> sums(N);
  CVec<N> running = head.value;
  for (std::size_t c = 0; c < N; ++c) sums[c].push_back(running[c]);
  double quad_error = head.error_estimate;

  double a = head_end;
  std::size_t stable = 0;
  std::size_t small_terms = 0;
  CVec<N> last_estimate = running;
  for (std::size_t panel = 0; panel < opts.max_panels; ++panel) {
    const double b = (half_period > 0.0) ? a + half_period : 2.0 * a;
    auto piece = integrate_adaptive<N>(h, a, b, panel_tol, 0.0, opts.max_intervals);
    out.evaluations += piece.evaluations;
    quad_error += piece.error_estimate;
    running += piece.value;
    for (std::size_t c = 0; c < N; ++c) sums[c].push_back(running[c]);
    a = b;

    // A negligible term twice in a row means the tail itself is negligible.
    small_terms = (detail::magnitude(piece.value) < panel_tol) ? small_terms + 1 : 0;
    if (small_terms >= 2) {
      out.value = running;
      out.error_estimate = quad_error + detail::magnitude(piece.value);
      return out;
    }
    if (sums[0].size() < 5) continue;

    CVec<N> estimate{};
    double extrap_error = 0.0;
    for (std::size_t c = 0; c < N; ++c) {
      auto [value, err] = detail::wynn_epsilon(sums[c]);
      estimate[c] = value;
      extrap_error = std::max(extrap_error, err);
    }
    const double change = detail::magnitude(estimate - last_estimate);
    last_estimate = estimate;
    stable = (std::max(change, extrap_error) < target / 2.0) ? stable + 1 : 0;
    if (stable >= 2) {
      out.value = estimate;
      out.error_estimate = quad_error + std::max(change, extrap_error);
      return out;
    }
  }
  throw ConvergenceError("half-line integral did not converge", detail::magnitude(last_estimate - running));
}

/// ∫_0^∞ f(x) dx for integrands decaying at least exponentially beyond
/// opts.scale. Panels of width 2·scale are added until a geometric bound on
/// the remaining tail drops below tol/10.
template <class F>
QuadratureResult<double> integrate_semi_infinite(F&& f, const QuadratureOptions& opts) {
  if (!(opts.scale > 0.0)) throw DomainError("integrate_semi_infinite needs a positive scale");
  QuadratureResult<double> out;
  const double width = 2.0 * opts.scale;
  double prev_mag = std::numeric_limits<double>::infinity();
  double total = 0.0;
  std::size_t quiet = 0;
  for (std::size_t k = 0; k < opts.max_panels; ++k) {
    const double a = width * static_cast<double>(k);
    const double tol = opts.target(std::abs(total)) / 8.0;
    auto piece = integrate(f, a, a + width, tol, opts.rel_tol);
    out.evaluations += piece.evaluations;
    out.error_estimate += piece.error_estimate;
    total += piece.value;
    const double mag = std::abs(piece.value);
    if (k >= 1 && mag < prev_mag) {
      const double ratio = mag / prev_mag;
      const double tail = mag * ratio / (1.0 - ratio);
      quiet = (tail < opts.target(std::abs(total)) / 10.0 && ratio < 0.9) ? quiet + 1 : 0;
      if (quiet >= 2) {
        out.value = total;
        out.error_estimate += tail;
        if (out.error_estimate > opts.target(std::abs(total))) {
          throw ConvergenceError("semi-infinite quadrature missed tolerance", out.error_estimate);
        }
        return out;
      }
    } else {
      quiet = 0;
    }
    if (mag == 0.0 && k >= 2 && prev_mag == 0.0) {
      out.value = total;
      return out;
    }
    prev_mag = mag;
  }
  throw ConvergenceError("semi-infinite quadrature did not reach a negligible tail",
                         out.error_estimate);
}

/// ∫_0^∞ e^{iωτ} g(τ) dτ for g decaying to zero, possibly only algebraically.
template <class G>
QuadratureResult<std::complex<double>> fourier_halfline(G&& g, double omega,
                                                        const QuadratureOptions& opts) {
  const double half_period = (omega != 0.0) ? std::numbers::pi / std::abs(omega) : 0.0;
  auto r = integrate_halfline_accelerated<1>(
      [&](double t) {
        return CVec<1>{std::exp(std::complex<double>(0.0, omega * t)) * std::complex<double>(g(t))};
      },
      half_period, opts);
  return {r.value[0], r.error_estimate, r.evaluations};
}

}  // namespace polaron::mathkit
