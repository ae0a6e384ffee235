#pragma once

// Bloch generators dα/dt = M α + b for the resonant, full off-resonant,
// weak-coupling and high-temperature regimes.
//
// M and b act on the lab-frame Bloch vector: the B and 1/B entries are what
// the mapping diag(B, B, 1) produces from the polaron-frame master equation.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polaron/bath.hpp"
#include "polaron/correlations.hpp"
#include "polaron/errors.hpp"

namespace polaron {

struct SystemModel {
  double epsilon = 0.0;  // ε = ε₁ - ε₂
  double V = 0.5;

  void validate() const {
    if (!std::isfinite(epsilon)) throw DomainError("epsilon must be finite");
    if (!(V > 0.0) || !std::isfinite(V)) throw DomainError("V must be finite and > 0");
  }
  friend bool operator==(const SystemModel&, const SystemModel&) = default;
};

struct PolaronQuantities {
  double B = 1.0;
  double V_R = 0.0;
  double eta = 0.0;  // √(ε² + 4V_R²)
};

inline PolaronQuantities polaron_quantities(const SystemModel& system, double B) {
  const double VR = B * system.V;
  return {B, VR, std::hypot(system.epsilon, 2.0 * VR)};
}

struct RateSet {
  double Gamma_x = 0.0;
  double Gamma_y = 0.0;
  double Gamma_z = 0.0;
  double lambda_1 = 0.0;
  double lambda_2 = 0.0;
  double lambda_3 = 0.0;
  double zeta_rate = 0.0;
  double kappa_x = 0.0;
  double kappa_y = 0.0;
  double kappa_z = 0.0;
};

enum class Regime { resonant, full, weak, high_temperature };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::resonant: return "resonant";
    case Regime::full: return "full";
    case Regime::weak: return "weak";
    case Regime::high_temperature: return "high_temperature";
  }
  return "unknown";
}

/// Scalars that decide whether the polaron treatment and the chosen regime
/// are trustworthy at this parameter point.
struct Telemetry {
  double V_over_omega_c = 0.0;
  double beta_VR = 0.0;
  double VR_over_epsilon = std::numeric_limits<double>::quiet_NaN();
  double phi0 = 0.0;
  double x = 0.0;
  double y = 0.0;
  double validity = 0.0;  // (V/ω_c)²(1 - B⁴), should be ≪ 1
};

struct Generator {
  Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  Regime regime = Regime::full;
  double temperature = 1.0;
  SystemModel system;
  PolaronQuantities polaron;
  RateSet rates;
  Telemetry telemetry;
  std::vector<std::string> warnings;
};

struct BuildOptions {
  ResponseOptions response;
  ResponseCache* cache = nullptr;  // optional shared memo
};

namespace detail {

// γ and S at +ω and -ω, through the cache when one is supplied.
inline std::pair<ResponseSample, ResponseSample> responses_at(double omega,
                                                              const CorrelationContext& ctx,
                                                              const BuildOptions& opts) {
  if (opts.cache) {
    return {opts.cache->get(omega, ctx.bath(), ctx.thermal(), opts.response),
            opts.cache->get(-omega, ctx.bath(), ctx.thermal(), opts.response)};
  }
  return response_pair(omega, ctx, opts.response);
}

struct BuildSetup {
  CorrelationContext ctx;
  PolaronQuantities pq;
  Generator gen;
};

inline BuildSetup setup(Regime regime, const SystemModel& system, const BathModel& bath,
                        const ThermalState& thermal, const BuildOptions& opts) {
  system.validate();
  CorrelationContext ctx(bath, thermal, opts.response.method);
  const double B = ctx.trivial() ? 1.0 : std::exp(0.5 * ctx.log_B2());
  const auto pq = polaron_quantities(system, B);
  Generator gen;
  gen.regime = regime;
  gen.temperature = thermal.temperature;
  gen.system = system;
  gen.polaron = pq;
  auto& tel = gen.telemetry;
  tel.V_over_omega_c = system.V / bath.omega_c;
  tel.beta_VR = thermal.beta() * pq.V_R;
  if (system.epsilon != 0.0) tel.VR_over_epsilon = pq.V_R / system.epsilon;
  const auto scales = propagator_scales(bath, thermal);
  tel.phi0 = scales.phi0;
  tel.x = scales.x;
  tel.y = scales.y;
  tel.validity = tel.V_over_omega_c * tel.V_over_omega_c * (1.0 - std::pow(B, 4));
  if (tel.V_over_omega_c >= 1.0) gen.warnings.emplace_back("V >= omega_c: polaron displacement not justified");
  if (tel.validity > 0.1) gen.warnings.emplace_back("(V/omega_c)^2 (1 - B^4) is not small");
  return {std::move(ctx), pq, std::move(gen)};
}

inline void check_finite(const Generator& g) {
  if (!g.M.allFinite() || !g.b.allFinite()) throw Error("generator has non-finite entries");
}

inline void note_negative(Generator& g, const ResponseSample& s) {
  if (s.negative_gamma) g.warnings.emplace_back("negative rate at omega = " + std::to_string(s.omega));
}

}  // namespace detail

/// ε = 0: rates at frequencies 0 and ±2V_R.
inline Generator build_resonant(const SystemModel& system, const BathModel& bath,
                                const ThermalState& thermal, const BuildOptions& opts = {}) {
  if (system.epsilon != 0.0) throw RegimeError("resonant generator requires epsilon = 0");
  auto [ctx, pq, gen] = detail::setup(Regime::resonant, system, bath, thermal, opts);
  const double V2 = system.V * system.V;
  const double B = pq.B;
  const double VR = pq.V_R;
  auto& r = gen.rates;
  const auto [zero, unused] = detail::responses_at(0.0, ctx, opts);
  const auto [plus, minus] = detail::responses_at(2.0 * VR, ctx, opts);
  detail::note_negative(gen, zero);
  detail::note_negative(gen, plus);
  detail::note_negative(gen, minus);
  r.Gamma_y = 2.0 * V2 * zero.gamma_xx;
  r.Gamma_z = V2 * (plus.gamma_yy + minus.gamma_yy) + 2.0 * V2 * zero.gamma_xx;
  r.Gamma_x = r.Gamma_z - r.Gamma_y;
  r.lambda_3 = 2.0 * V2 * (plus.S_yy - minus.S_yy);
  r.kappa_x = V2 * (plus.gamma_yy - minus.gamma_yy);

  if (B == 0.0) throw Error("renormalization factor underflows; resonant generator undefined");
  gen.M << -(r.Gamma_z - r.Gamma_y), 0.0, 0.0,
           0.0, -r.Gamma_y, -2.0 * B * VR,
           0.0, (2.0 * VR + r.lambda_3) / B, -r.Gamma_z;
  gen.b << -B * r.kappa_x, 0.0, 0.0;
  detail::check_finite(gen);
  return gen;
}

/// Any ε: all ten rate quantities from frequencies {0, ±η}.
inline Generator build_full(const SystemModel& system, const BathModel& bath,
                            const ThermalState& thermal, const BuildOptions& opts = {}) {
  auto [ctx, pq, gen] = detail::setup(Regime::full, system, bath, thermal, opts);
  const double V2 = system.V * system.V;
  const double B = pq.B;
  const double VR = pq.V_R;
  const double eps = system.epsilon;
  const double eta = pq.eta;
  auto& r = gen.rates;
  const auto [zero, unused] = detail::responses_at(0.0, ctx, opts);
  const auto [plus, minus] = detail::responses_at(eta, ctx, opts);
  detail::note_negative(gen, zero);
  detail::note_negative(gen, plus);
  detail::note_negative(gen, minus);
  const double eta2 = eta * eta;
  r.Gamma_x = V2 * (plus.gamma_yy + minus.gamma_yy);
  r.Gamma_y = 2.0 * V2 *
              (4.0 * VR * VR / eta2 * zero.gamma_xx +
               eps * eps / (2.0 * eta2) * (plus.gamma_xx + minus.gamma_xx));
  r.Gamma_z = r.Gamma_x + r.Gamma_y;
  r.lambda_1 = 2.0 * V2 * eps / eta * (plus.S_yy - minus.S_yy);
  r.lambda_2 = 2.0 * V2 * eps / eta * (plus.S_xx - minus.S_xx);
  r.lambda_3 = 4.0 * V2 * VR / eta * (plus.S_yy - minus.S_yy);
  r.zeta_rate = 4.0 * V2 * VR * eps / eta2 *
                (zero.gamma_xx - 0.5 * (plus.gamma_xx + minus.gamma_xx));
  r.kappa_x = 2.0 * V2 * VR / eta * (plus.gamma_yy - minus.gamma_yy);
  r.kappa_y = 8.0 * V2 * VR * eps / eta2 * (zero.S_xx - 0.5 * (plus.S_xx + minus.S_xx));
  r.kappa_z = V2 * eps / eta *
              ((plus.gamma_xx - minus.gamma_xx) + (plus.gamma_yy - minus.gamma_yy));

  // ζ/B and (2V_R + λ₃)/B written with V = V_R/B so that an underflowing B
  // at extreme temperatures does not produce 0/0.
  const double zeta_over_B = 4.0 * V2 * system.V * eps / eta2 *
                             (zero.gamma_xx - 0.5 * (plus.gamma_xx + minus.gamma_xx));
  const double coherent_over_B = 2.0 * system.V + 4.0 * V2 * system.V / eta * (plus.S_yy - minus.S_yy);
  gen.M << -r.Gamma_x, -(eps + r.lambda_1), 0.0,
           eps + r.lambda_2, -r.Gamma_y, -2.0 * B * VR,
           zeta_over_B, coherent_over_B, -r.Gamma_z;
  gen.b << -B * r.kappa_x, -B * r.kappa_y, -r.kappa_z;
  detail::check_finite(gen);
  return gen;
}

/// Single-phonon rate Γ_W = 4π(V_R/η)² J(η)(1 - F_D(η)) coth(βη/2).
inline double weak_rate(const PolaronQuantities& pq, const BathModel& bath,
                        const ThermalState& thermal) {
  if (pq.eta == 0.0) return 0.0;
  const double ratio = pq.V_R / pq.eta;
  return 4.0 * std::numbers::pi * ratio * ratio * spectral_density(pq.eta, bath) *
         decorrelation(pq.eta, bath) * detail::coth(0.5 * thermal.beta() * pq.eta);
}

/// First order in J(ω): Λ_xx-only quantities dropped. Γ_W and κ_x come from
/// the single-phonon expansion; the shifts use the full Λ = 2V²(S_yy(η) - S_yy(-η)).
inline Generator build_weak(const SystemModel& system, const BathModel& bath,
                            const ThermalState& thermal, const BuildOptions& opts = {}) {
  auto [ctx, pq, gen] = detail::setup(Regime::weak, system, bath, thermal, opts);
  const double V2 = system.V * system.V;
  const double B = pq.B;
  const double VR = pq.V_R;
  const double eps = system.epsilon;
  const double eta = pq.eta;
  auto& r = gen.rates;
  const auto [plus, minus] = detail::responses_at(eta, ctx, opts);
  const double Lambda = 2.0 * V2 * (plus.S_yy - minus.S_yy);
  const double GW = weak_rate(pq, bath, thermal);
  r.Gamma_x = GW;
  r.Gamma_y = 0.0;
  r.Gamma_z = GW;
  r.lambda_1 = eps / eta * Lambda;
  r.lambda_3 = 2.0 * VR / eta * Lambda;
  // γ_yy(η) - γ_yy(-η) to first order is 4πB²J(1 - F)/η², independent of T.
  const double ratio = VR / eta;
  r.kappa_x = 2.0 * VR / eta * 4.0 * std::numbers::pi * ratio * ratio *
              spectral_density(eta, bath) * decorrelation(eta, bath);
  r.kappa_z = eps / (2.0 * VR) * r.kappa_x;

  gen.M << -GW, -(eps + r.lambda_1), 0.0,
           eps, 0.0, -2.0 * B * VR,
           0.0, 2.0 * system.V + 2.0 * system.V / eta * Lambda, -GW;
  gen.b << -B * r.kappa_x, 0.0, -r.kappa_z;
  const double alpha_eff = bath.alpha * decorrelation(eta, bath);
  if (alpha_eff > 0.01 && propagator_scales(bath, thermal).phi0 * decorrelation(eta, bath) > 1.0)
    gen.warnings.emplace_back("weak-coupling generator used outside its single-phonon regime");
  detail::check_finite(gen);
  return gen;
}

/// Second order in V_R/ε: λ₃, ζ, κ_x, κ_y dropped.
inline Generator build_high_temperature(const SystemModel& system, const BathModel& bath,
                                        const ThermalState& thermal,
                                        const BuildOptions& opts = {}) {
  if (system.epsilon == 0.0) throw RegimeError("high-temperature generator requires epsilon != 0");
  auto [ctx, pq, gen] = detail::setup(Regime::high_temperature, system, bath, thermal, opts);
  const double ratio = std::abs(pq.V_R / system.epsilon);
  if (ratio >= 1.0) throw RegimeError("high-temperature generator requires |V_R/epsilon| < 1");
  if (ratio > 0.3) gen.warnings.emplace_back("|V_R/epsilon| > 0.3: second-order expansion is rough");
  const double V2 = system.V * system.V;
  const double B = pq.B;
  const double VR = pq.V_R;
  const double eps = system.epsilon;
  auto& r = gen.rates;
  const auto [plus, minus] = detail::responses_at(pq.eta, ctx, opts);
  detail::note_negative(gen, plus);
  detail::note_negative(gen, minus);
  r.Gamma_y = V2 * (plus.gamma_xx + minus.gamma_xx);
  r.Gamma_z = V2 * (plus.gamma_xx + minus.gamma_xx + plus.gamma_yy + minus.gamma_yy);
  r.Gamma_x = r.Gamma_z - r.Gamma_y;
  r.lambda_1 = 2.0 * V2 * (plus.S_yy - minus.S_yy);
  r.lambda_2 = 2.0 * V2 * (plus.S_xx - minus.S_xx);
  r.kappa_z = V2 * (plus.gamma_xx - minus.gamma_xx + plus.gamma_yy - minus.gamma_yy);

  gen.M << -(r.Gamma_z - r.Gamma_y), -(eps + r.lambda_1), 0.0,
           eps + r.lambda_2, -r.Gamma_y, -2.0 * B * VR,
           0.0, 2.0 * system.V, -r.Gamma_z;
  gen.b << 0.0, 0.0, -r.kappa_z;
  detail::check_finite(gen);
  return gen;
}

inline Generator build(Regime regime, const SystemModel& system, const BathModel& bath,
                       const ThermalState& thermal, const BuildOptions& opts = {}) {
  switch (regime) {
    case Regime::resonant: return build_resonant(system, bath, thermal, opts);
    case Regime::weak: return build_weak(system, bath, thermal, opts);
    case Regime::high_temperature: return build_high_temperature(system, bath, thermal, opts);
    case Regime::full: break;
  }
  return build_full(system, bath, thermal, opts);
}

}  // namespace polaron
