#pragma once

// Time evolution of the Bloch vector: steady states, eigen-decomposition
// propagation (with an ODE fallback for near-defective generators), the
// closed-form trajectories of the resonant, weak-coupling and
// high-temperature limits, and the polaron/lab frame mapping.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "polaron/bloch.hpp"
#include "polaron/errors.hpp"

namespace polaron {

enum class Frame { polaron, lab };

struct BlochVector {
  double ax = 0.0;
  double ay = 0.0;
  double az = 0.0;
  Frame frame = Frame::lab;

  Eigen::Vector3d vec() const { return {ax, ay, az}; }
  static BlochVector from(const Eigen::Vector3d& v, Frame f) { return {v(0), v(1), v(2), f}; }
  static BlochVector donor() { return {0.0, 0.0, 1.0, Frame::polaron}; }
};

/// Polaron → lab: (B ax, B ay, az).
inline BlochVector to_lab_frame(const BlochVector& v, double B) {
  if (v.frame != Frame::polaron) throw DomainError("to_lab_frame expects a polaron-frame vector");
  return {B * v.ax, B * v.ay, v.az, Frame::lab};
}

inline BlochVector to_polaron_frame(const BlochVector& v, double B) {
  if (v.frame != Frame::lab) throw DomainError("to_polaron_frame expects a lab-frame vector");
  if (B == 0.0) throw DomainError("to_polaron_frame needs B > 0");
  return {v.ax / B, v.ay / B, v.az, Frame::polaron};
}

enum class EvolveMethod { automatic, eigen, ode };

struct BlochTrajectory {
  std::vector<double> times;
  std::vector<BlochVector> states;  // lab frame
  std::optional<BlochVector> steady;
  std::array<std::complex<double>, 3> eigenvalues{};
  EvolveMethod method = EvolveMethod::eigen;
  double condition_number = 1.0;
  std::optional<double> xi_squared;  // closed forms only
  std::size_t positivity_violations = 0;
};

inline constexpr double kPositivityTolerance = 1e-6;
inline constexpr double kDefectiveThreshold = 1e8;

namespace detail {

inline bool invertible(const Eigen::Matrix3d& M) {
  const double norm = M.norm();
  return norm > 0.0 && std::abs(M.determinant()) > 1e-14 * norm * norm * norm;
}

inline std::size_t count_violations(const std::vector<BlochVector>& states) {
  return static_cast<std::size_t>(std::count_if(states.begin(), states.end(), [](const BlochVector& s) {
    return std::abs(s.az) > 1.0 + kPositivityTolerance;
  }));
}

inline Eigen::Vector3d initial_lab(const Generator& gen, const BlochVector& a0) {
  return a0.frame == Frame::lab ? a0.vec() : to_lab_frame(a0, gen.polaron.B).vec();
}

// (e^{qt} - 1)/q, equal to t at q = 0.
inline std::complex<double> phi1(std::complex<double> q, double t) {
  const std::complex<double> z = q * t;
  if (std::abs(z) < 1e-5) return t * (1.0 + z / 2.0 + z * z / 6.0);
  return (std::exp(z) - 1.0) / q;
}

}  // namespace detail

/// α(∞) = -M⁻¹ b (lab frame).
inline BlochVector steady_state(const Generator& gen) {
  if (!detail::invertible(gen.M))
    throw SingularGenerator("generator matrix is singular; no unique steady state");
  const Eigen::Vector3d s = gen.M.partialPivLu().solve(-gen.b);
  return BlochVector::from(s, Frame::lab);
}

inline std::array<std::complex<double>, 3> eigenvalues(const Generator& gen) {
  Eigen::EigenSolver<Eigen::Matrix3d> es(gen.M, false);
  const auto ev = es.eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

/// Solve dα/dt = Mα + b from a0 on the given time grid.
///
/// Eigen path: α(t) = V[e^{Dt} c + φ₁(D, t) d] with c = V⁻¹α₀, d = V⁻¹b and
/// φ₁(q, t) = (e^{qt} - 1)/q, which needs no steady state and so also
/// covers singular M. Falls back to adaptive Dormand–Prince integration
/// when the eigenvector matrix is ill-conditioned.
inline BlochTrajectory evolve(const Generator& gen, const BlochVector& a0,
                              const std::vector<double>& times,
                              EvolveMethod method = EvolveMethod::automatic) {
  using C = std::complex<double>;
  BlochTrajectory out;
  out.times = times;
  if (!std::is_sorted(times.begin(), times.end()) || (!times.empty() && times.front() < 0.0))
    throw DomainError("time grid must be ordered and non-negative");
  const Eigen::Vector3d x0 = detail::initial_lab(gen, a0);
  if (detail::invertible(gen.M)) out.steady = steady_state(gen);

  Eigen::EigenSolver<Eigen::Matrix3d> es(gen.M, true);
  const Eigen::Vector3cd q = es.eigenvalues();
  const Eigen::Matrix3cd V = es.eigenvectors();
  for (int i = 0; i < 3; ++i) out.eigenvalues[i] = q(i);
  Eigen::JacobiSVD<Eigen::Matrix3cd> svd(V);
  const auto sv = svd.singularValues();
  out.condition_number = sv(2) > 0.0 ? sv(0) / sv(2) : std::numeric_limits<double>::infinity();

  if (method == EvolveMethod::automatic)
    method = out.condition_number > kDefectiveThreshold ? EvolveMethod::ode : EvolveMethod::eigen;
  out.method = method;
  out.states.reserve(times.size());

  if (method == EvolveMethod::eigen) {
    const auto lu = V.fullPivLu();
    const Eigen::Vector3cd c = lu.solve(x0.cast<C>());
    const Eigen::Vector3cd d = lu.solve(gen.b.cast<C>());
    for (double t : times) {
      Eigen::Vector3cd w;
      for (int i = 0; i < 3; ++i) w(i) = std::exp(q(i) * t) * c(i) + detail::phi1(q(i), t) * d(i);
      const Eigen::Vector3d x = (V * w).real();
      out.states.push_back(BlochVector::from(x, Frame::lab));
    }
  } else {
    namespace odeint = boost::numeric::odeint;
    using State = std::array<double, 3>;
    const Eigen::Matrix3d M = gen.M;
    const Eigen::Vector3d b = gen.b;
    auto rhs = [&](const State& s, State& ds, double) {
      const Eigen::Vector3d v(s[0], s[1], s[2]);
      const Eigen::Vector3d dv = M * v + b;
      ds = {dv(0), dv(1), dv(2)};
    };
    State s{x0(0), x0(1), x0(2)};
    auto stepper = odeint::make_dense_output(1e-10, 1e-10, odeint::runge_kutta_dopri5<State>());
    std::vector<double> grid = times;
    if (!grid.empty() && grid.front() > 0.0) grid.insert(grid.begin(), 0.0);
    std::vector<State> samples;
    if (!grid.empty()) {
      const double dt0 = grid.size() > 1 ? std::max((grid.back() - grid.front()) / 1000.0, 1e-6) : 1e-3;
      odeint::integrate_times(stepper, rhs, s, grid.begin(), grid.end(), dt0,
                              [&](const State& st, double) { samples.push_back(st); });
    }
    const std::size_t offset = samples.size() - times.size();
    for (std::size_t k = 0; k < times.size(); ++k) {
      const auto& st = samples[k + offset];
      out.states.push_back({st[0], st[1], st[2], Frame::lab});
    }
  }
  out.positivity_violations = detail::count_violations(out.states);
  return out;
}

inline BlochTrajectory evolve(const Generator& gen, const std::vector<double>& times,
                              EvolveMethod method = EvolveMethod::automatic) {
  return evolve(gen, BlochVector::donor(), times, method);
}

inline std::vector<double> uniform_times(double t_max, std::size_t n_points) {
  if (!(t_max > 0.0) || n_points < 2) throw DomainError("time grid needs t_max > 0 and n_points >= 2");
  std::vector<double> t(n_points);
  for (std::size_t k = 0; k < n_points; ++k)
    t[k] = t_max * static_cast<double>(k) / static_cast<double>(n_points - 1);
  return t;
}

namespace detail {

// cos(ξt/2) and sin(ξt/2)/ξ as functions of the sign-carrying ξ², each
// scaled by e^{-rt/2}. Imaginary ξ becomes cosh/sinh; the exponentials are
// combined so that growth and decay never overflow separately.
struct DampedOscillation {
  double cos_part = 0.0;
  double sinc_part = 0.0;  // sin(ξt/2)/ξ
};

inline DampedOscillation damped_oscillation(double xi2, double r, double t) {
  const double u2 = xi2 * t * t / 4.0;
  if (std::abs(u2) < 0.1) {
    // Series in u² = ξ²t²/4, continuous through ξ² = 0.
    const double damp = std::exp(-0.5 * r * t);
    const double c = 1.0 - u2 / 2.0 + u2 * u2 / 24.0 - u2 * u2 * u2 / 720.0 +
                     u2 * u2 * u2 * u2 / 40320.0 - u2 * u2 * u2 * u2 * u2 / 3628800.0;
    const double s = 1.0 - u2 / 6.0 + u2 * u2 / 120.0 - u2 * u2 * u2 / 5040.0 +
                     u2 * u2 * u2 * u2 / 362880.0 - u2 * u2 * u2 * u2 * u2 / 39916800.0;
    return {damp * c, damp * 0.5 * t * s};
  }
  if (xi2 > 0.0) {
    const double xi = std::sqrt(xi2);
    const double damp = std::exp(-0.5 * r * t);
    return {damp * std::cos(0.5 * xi * t), damp * std::sin(0.5 * xi * t) / xi};
  }
  const double k = std::sqrt(-xi2);
  const double up = std::exp(0.5 * (k - r) * t);
  const double down = std::exp(-0.5 * (k + r) * t);
  return {0.5 * (up + down), 0.5 * (up - down) / k};
}

}  // namespace detail

/// ξ_R² = 8V_R(2V_R + λ₃) - (Γz - Γy)², sign preserved.
inline double resonant_xi_squared(const PolaronQuantities& pq, const RateSet& r) {
  const double d = r.Gamma_z - r.Gamma_y;
  return 8.0 * pq.V_R * (2.0 * pq.V_R + r.lambda_3) - d * d;
}

/// Resonant trajectories from the donor state (lab frame):
///   α_x = -B tanh(βV_R)(1 - e^{(Γy-Γz)t})
///   α_y = -(4BV_R/ξ) e^{-(Γy+Γz)t/2} sin(ξt/2)
///   α_z = e^{-(Γy+Γz)t/2}[cos(ξt/2) + ((Γy-Γz)/ξ) sin(ξt/2)]
inline BlochTrajectory closed_form_resonant(const SystemModel& system, const PolaronQuantities& pq,
                                            const RateSet& r, const ThermalState& thermal,
                                            const std::vector<double>& times) {
  if (system.epsilon != 0.0) throw RegimeError("resonant closed form requires epsilon = 0");
  BlochTrajectory out;
  out.times = times;
  const double xi2 = resonant_xi_squared(pq, r);
  out.xi_squared = xi2;
  const double th = std::tanh(thermal.beta() * pq.V_R);
  const double sum = r.Gamma_y + r.Gamma_z;
  const double diff = r.Gamma_y - r.Gamma_z;
  out.steady = BlochVector{-pq.B * th, 0.0, 0.0, Frame::lab};
  const std::complex<double> root = std::sqrt(std::complex<double>(xi2, 0.0));
  out.eigenvalues = {diff, -0.5 * (sum + std::complex<double>(0.0, 1.0) * root),
                     -0.5 * (sum - std::complex<double>(0.0, 1.0) * root)};
  for (double t : times) {
    const auto osc = detail::damped_oscillation(xi2, sum, t);
    out.states.push_back({-pq.B * th * (-std::expm1(diff * t)),
                          -4.0 * pq.B * pq.V_R * osc.sinc_part,
                          osc.cos_part + diff * osc.sinc_part, Frame::lab});
  }
  out.positivity_violations = detail::count_violations(out.states);
  return out;
}

inline BlochTrajectory closed_form_resonant(const Generator& gen, const ThermalState& thermal,
                                            const std::vector<double>& times) {
  return closed_form_resonant(gen.system, gen.polaron, gen.rates, thermal, times);
}

struct ScalarTrajectory {
  std::vector<double> times;
  std::vector<double> values;
};

struct WeakClosedForm {
  ScalarTrajectory az;
  double xi_squared = 0.0;
  double Gamma_W = 0.0;
  double Lambda = 0.0;
  double amplitude = 0.0;  // 4V_R²/η²
};

/// Weak-coupling population dynamics from the donor state:
///   α_z = (ε/η)[(ε/η)e^{-Γ_W t} - (1 - e^{-Γ_W t}) tanh(βη/2)]
///       + (4V_R²/η²) e^{-Γ_W t/2}[cos(ξ_W t/2) - (Γ_W/ξ_W) sin(ξ_W t/2)]
/// with ξ_W² = 4η(η + Λ) - Γ_W².
inline WeakClosedForm closed_form_weak(const Generator& weak, const std::vector<double>& times) {
  if (weak.regime != Regime::weak) throw RegimeError("closed_form_weak needs a weak-coupling generator");
  const auto& pq = weak.polaron;
  const double eps = weak.system.epsilon;
  const double eta = pq.eta;
  const double GW = weak.rates.Gamma_x;
  // λ₃ = (2V_R/η)Λ recovers Λ without another response evaluation.
  const double Lambda = pq.V_R > 0.0 ? weak.rates.lambda_3 * eta / (2.0 * pq.V_R) : 0.0;
  WeakClosedForm out;
  out.Gamma_W = GW;
  out.Lambda = Lambda;
  out.xi_squared = 4.0 * eta * (eta + Lambda) - GW * GW;
  out.amplitude = 4.0 * pq.V_R * pq.V_R / (eta * eta);
  if (out.xi_squared < 0.0)
    throw RegimeError("weak-coupling oscillation frequency is imaginary; regime violated");
  const double th = std::tanh(0.5 * eta / weak.temperature);
  const double e = eps / eta;
  out.az.times = times;
  for (double t : times) {
    const auto osc = detail::damped_oscillation(out.xi_squared, GW, t);
    const double decay = std::exp(-GW * t);
    out.az.values.push_back(e * (e * decay + std::expm1(-GW * t) * th) +
                            out.amplitude * (osc.cos_part - GW * osc.sinc_part));
  }
  return out;
}

inline WeakClosedForm closed_form_weak(const SystemModel& system, const BathModel& bath,
                                       const ThermalState& thermal, const std::vector<double>& times,
                                       const BuildOptions& opts = {}) {
  return closed_form_weak(build_weak(system, bath, thermal, opts), times);
}

struct HighTemperatureClosedForm {
  ScalarTrajectory az;
  ScalarTrajectory ay;  // lab frame
  double epsilon_bar = 0.0;
  double amplitude = 0.0;  // 4V_R²/ε²
  int order = 2;
};

/// High-temperature (V_R ≪ ε) trajectories from the donor state. Order 2:
///   α_z = e^{-Γz t}(1 - a) + a e^{-Γz t/2} cos(ε̄t) - (1 - e^{-Γz t}) tanh(βη/2)[1 + a(Γy/Γz - 1)]
/// with a = 4V_R²/ε² and ε̄ = ε + (λ₁ + λ₂)/2 + 2ε(V_R/ε)². Order 1 drops a.
/// α_y = -(2BV_R/ε) e^{-Γz t/2} sin(ε̄t) at either order.
inline HighTemperatureClosedForm closed_form_high_T(const Generator& ht,
                                                    const std::vector<double>& times,
                                                    int order = 2) {
  if (ht.regime != Regime::high_temperature)
    throw RegimeError("closed_form_high_T needs a high-temperature generator");
  if (order != 1 && order != 2) throw DomainError("high-temperature closed form order must be 1 or 2");
  const auto& pq = ht.polaron;
  const auto& r = ht.rates;
  const double eps = ht.system.epsilon;
  const double ratio = pq.V_R / eps;
  HighTemperatureClosedForm out;
  out.order = order;
  out.amplitude = 4.0 * ratio * ratio;
  out.epsilon_bar = eps + 0.5 * (r.lambda_1 + r.lambda_2) + 2.0 * eps * ratio * ratio;
  const double a = order == 2 ? out.amplitude : 0.0;
  const double th = std::tanh(0.5 * pq.eta / ht.temperature);
  const double ratio_rates = r.Gamma_z > 0.0 ? r.Gamma_y / r.Gamma_z : 0.0;
  out.az.times = times;
  out.ay.times = times;
  for (double t : times) {
    const double decay = std::exp(-r.Gamma_z * t);
    const double half = std::exp(-0.5 * r.Gamma_z * t);
    out.az.values.push_back(decay * (1.0 - a) + a * half * std::cos(out.epsilon_bar * t) +
                            std::expm1(-r.Gamma_z * t) * th * (1.0 + a * (ratio_rates - 1.0)));
    out.ay.values.push_back(-2.0 * pq.B * pq.V_R / eps * half * std::sin(out.epsilon_bar * t));
  }
  return out;
}

inline HighTemperatureClosedForm closed_form_high_T(const SystemModel& system, const BathModel& bath,
                                                    const ThermalState& thermal,
                                                    const std::vector<double>& times, int order = 2,
                                                    const BuildOptions& opts = {}) {
  return closed_form_high_T(build_high_temperature(system, bath, thermal, opts), times, order);
}

/// Steady-state population difference of the high-temperature limit,
/// -(1 + (4V_R²/ε²)(Γy/Γz - 1)) tanh(βη/2).
inline double high_temperature_steady_az(const Generator& ht) {
  const auto& pq = ht.polaron;
  const double ratio = pq.V_R / ht.system.epsilon;
  return -(1.0 + 4.0 * ratio * ratio * (ht.rates.Gamma_y / ht.rates.Gamma_z - 1.0)) *
         std::tanh(0.5 * pq.eta / ht.temperature);
}

/// Weak-coupling steady state (α_x, 0, α_z) = -(2BV_R/η, 0, ε/η) tanh(βη/2).
inline BlochVector weak_steady_state(const Generator& weak) {
  const auto& pq = weak.polaron;
  const double th = std::tanh(0.5 * pq.eta / weak.temperature);
  return {-2.0 * pq.B * pq.V_R / pq.eta * th, 0.0, -weak.system.epsilon / pq.eta * th, Frame::lab};
}

/// Resonant steady state (-B tanh(βV_R), 0, 0).
inline BlochVector resonant_steady_state(const Generator& res) {
  return {-res.polaron.B * std::tanh(res.polaron.V_R / res.temperature), 0.0, 0.0, Frame::lab};
}

}  // namespace polaron
