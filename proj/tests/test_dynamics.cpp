#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "polaron/bloch.hpp"
#include "polaron/dynamics.hpp"

using namespace polaron;

namespace {

BathModel fig_bath(double mu = 0.5) { return {.alpha = 0.05, .omega_c = 4.0, .dimension = 3, .mu = mu}; }

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  return worst;
}

std::vector<double> component(const BlochTrajectory& tr, double BlochVector::*field) {
  std::vector<double> out;
  for (const auto& s : tr.states) out.push_back(s.*field);
  return out;
}

std::vector<double> crossings(const std::vector<double>& t, const std::vector<double>& v, double level) {
  std::vector<double> out;
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double a = v[k - 1] - level;
    const double b = v[k] - level;
    if (a == 0.0 || a * b < 0.0) out.push_back(t[k - 1] + (t[k] - t[k - 1]) * a / (a - b));
  }
  return out;
}

}  // namespace

TEST(Evolve, ZeroGeneratorIsStatic) {
  Generator g;
  const BlochVector a0{0.3, -0.2, 0.5, Frame::lab};
  const auto tr = evolve(g, a0, uniform_times(10.0, 11));
  EXPECT_FALSE(tr.steady.has_value());
  for (const auto& s : tr.states) {
    EXPECT_EQ(s.ax, 0.3);
    EXPECT_EQ(s.ay, -0.2);
    EXPECT_EQ(s.az, 0.5);
  }
}

TEST(Evolve, FullyCorrelatedBathGivesUndampedRotation) {
  const auto g = build_resonant({0.0, 0.5}, fig_bath(kInfiniteCorrelation), ThermalState{10.0});
  const auto tr = evolve(g, uniform_times(40.0, 401));
  for (std::size_t k = 0; k < tr.times.size(); ++k)
    EXPECT_NEAR(tr.states[k].az, std::cos(2.0 * 0.5 * tr.times[k]), 1e-10);
}

TEST(Evolve, FigureOneMatchesClosedForm) {
  const auto times = uniform_times(30.0, 301);
  for (double T : {1.0, 5.0, 12.0, 20.0}) {
    const ThermalState t{T};
    const auto g = build_resonant({0.0, 0.5}, fig_bath(), t);
    const auto num = evolve(g, times);
    const auto cf = closed_form_resonant(g, t, times);
    EXPECT_LT(max_gap(component(num, &BlochVector::ax), component(cf, &BlochVector::ax)), 1e-8) << T;
    EXPECT_LT(max_gap(component(num, &BlochVector::ay), component(cf, &BlochVector::ay)), 1e-8) << T;
    EXPECT_LT(max_gap(component(num, &BlochVector::az), component(cf, &BlochVector::az)), 1e-8) << T;
  }
}

TEST(ClosedFormResonant, Limits) {
  const ThermalState t{1.0};
  const auto g = build_resonant({0.0, 0.5}, fig_bath(), t);
  const auto slowest = std::min(g.rates.Gamma_z - g.rates.Gamma_y, 0.5 * (g.rates.Gamma_y + g.rates.Gamma_z));
  const auto cf = closed_form_resonant(g, t, {0.0, 60.0 / slowest});
  EXPECT_EQ(cf.states[0].ax, 0.0);
  EXPECT_EQ(cf.states[0].ay, 0.0);
  EXPECT_EQ(cf.states[0].az, 1.0);
  EXPECT_NEAR(cf.states[1].ax, -g.polaron.B * std::tanh(g.polaron.V_R), 1e-8);
  EXPECT_NEAR(cf.states[1].ay, 0.0, 1e-8);
  EXPECT_NEAR(cf.states[1].az, 0.0, 1e-8);
  EXPECT_THROW(closed_form_resonant({0.1, 0.5}, g.polaron, g.rates, t, {0.0}), RegimeError);
}

TEST(ClosedFormResonant, ContinuousAcrossCrossover) {
  // Pick rates that put ξ² exactly at zero, then nudge it either way.
  const PolaronQuantities pq{0.8, 0.4, 0.8};
  const double Gy = 0.05;
  const double gap0 = std::sqrt(8.0 * pq.V_R * 2.0 * pq.V_R);
  const ThermalState t{3.0};
  const auto times = uniform_times(20.0, 201);
  auto run = [&](double delta) {
    RateSet r;
    r.Gamma_y = Gy;
    r.Gamma_z = Gy + gap0 + delta;
    return closed_form_resonant({0.0, 0.5}, pq, r, t, times);
  };
  const auto at = run(0.0);
  const auto above = run(1e-9);
  const auto below = run(-1e-9);
  EXPECT_LT(*above.xi_squared, 0.0);
  EXPECT_GT(*below.xi_squared, 0.0);
  const double sum = 2.0 * Gy + gap0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double s = times[k];
    const double limit = std::exp(-0.5 * sum * s) * (1.0 - 0.5 * gap0 * s);
    EXPECT_NEAR(at.states[k].az, limit, 1e-12);
    EXPECT_NEAR(above.states[k].az, limit, 1e-8);
    EXPECT_NEAR(below.states[k].az, limit, 1e-8);
    EXPECT_NEAR(above.states[k].ay, below.states[k].ay, 1e-8);
  }
}

TEST(Evolve, EigenAndOdeAgreeOnRandomStableGenerators) {
  std::mt19937 rng(20240611);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto times = uniform_times(15.0, 61);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::Matrix3d A;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) A(i, j) = n(rng);
    const Eigen::Matrix3d skew = A - A.transpose();
    Eigen::Matrix3d P;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) P(i, j) = 0.3 * n(rng);
    Generator g;
    g.M = skew - P * P.transpose() - 0.05 * Eigen::Matrix3d::Identity();
    g.b = Eigen::Vector3d(n(rng), n(rng), n(rng)) * 0.1;
    const BlochVector a0{0.2, 0.1, 0.9, Frame::lab};
    const auto eig = evolve(g, a0, times, EvolveMethod::eigen);
    const auto ode = evolve(g, a0, times, EvolveMethod::ode);
    EXPECT_EQ(eig.method, EvolveMethod::eigen);
    EXPECT_EQ(ode.method, EvolveMethod::ode);
    for (std::size_t k = 0; k < times.size(); ++k)
      EXPECT_LT((eig.states[k].vec() - ode.states[k].vec()).norm(), 1e-7) << trial << " " << k;
  }
}

TEST(Evolve, DefectiveGeneratorFallsBackToOde) {
  Generator g;
  g.M << -1.0, 1.0, 0.0,
          0.0, -1.0, 0.0,
          0.0, 0.0, -2.0;
  const auto tr = evolve(g, {0.0, 1.0, 1.0, Frame::lab}, {0.0, 1.0, 2.0});
  EXPECT_EQ(tr.method, EvolveMethod::ode);
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    EXPECT_NEAR(tr.states[k].ax, t * std::exp(-t), 1e-8);
    EXPECT_NEAR(tr.states[k].ay, std::exp(-t), 1e-8);
    EXPECT_NEAR(tr.states[k].az, std::exp(-2.0 * t), 1e-8);
  }
}

TEST(Evolve, LongTimeReachesSteadyStateForEveryRegime) {
  const ThermalState t{5.0};
  std::vector<Generator> gens{
      build_resonant({0.0, 0.5}, fig_bath(), t),
      build_full({1.0, 0.5}, fig_bath(), t),
      build_weak({0.5, 0.5}, fig_bath(2.0), t),
      build_high_temperature({2.0, 0.5}, fig_bath(), t),
  };
  for (const auto& g : gens) {
    double slowest = std::numeric_limits<double>::infinity();
    for (const auto& q : eigenvalues(g)) {
      EXPECT_LT(q.real(), 0.0) << to_string(g.regime);
      slowest = std::min(slowest, std::abs(q.real()));
    }
    const auto tr = evolve(g, {0.0, 50.0 / slowest});
    const auto s = steady_state(g);
    EXPECT_LT((tr.states[1].vec() - s.vec()).norm(), 1e-6) << to_string(g.regime);
    ASSERT_TRUE(tr.steady.has_value());
    EXPECT_EQ(tr.steady->vec(), s.vec());
  }
}

TEST(Evolve, ResonantEigenvalueStructure) {
  for (double T : {1.0, 5.0, 20.0}) {
    const ThermalState t{T};
    const auto g = build_resonant({0.0, 0.5}, fig_bath(), t);
    auto generic = eigenvalues(g);
    auto closed = closed_form_resonant(g, t, {0.0}).eigenvalues;
    auto order = [](const std::complex<double>& a, const std::complex<double>& b) {
      return std::make_pair(a.real(), a.imag()) < std::make_pair(b.real(), b.imag());
    };
    std::sort(generic.begin(), generic.end(), order);
    std::sort(closed.begin(), closed.end(), order);
    for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(generic[i] - closed[i]), 1e-10) << T;
    EXPECT_DOUBLE_EQ(closed_form_resonant(g, t, {0.0}).eigenvalues[0].real(),
                     g.rates.Gamma_y - g.rates.Gamma_z);
  }
}

TEST(Evolve, PositivityMonitor) {
  const auto times = uniform_times(30.0, 301);
  for (double T : {1.0, 5.0, 12.0, 20.0}) {
    EXPECT_EQ(evolve(build_resonant({0.0, 0.5}, fig_bath(), ThermalState{T}), times).positivity_violations, 0u);
    EXPECT_EQ(evolve(build_full({1.0, 0.5}, fig_bath(), ThermalState{T}), times).positivity_violations, 0u);
  }
  Generator pump;
  pump.M = -0.1 * Eigen::Matrix3d::Identity();
  pump.b << 0.0, 0.0, 1.0;  // drives az towards 10
  EXPECT_GT(evolve(pump, times).positivity_violations, 0u);
}

TEST(SteadyState, SingularGeneratorThrows) {
  EXPECT_THROW(steady_state(Generator{}), SingularGenerator);
  BathModel free = fig_bath();
  free.alpha = 0.0;
  EXPECT_THROW(steady_state(build_resonant({0.0, 0.5}, free, ThermalState{1.0})), SingularGenerator);
}

TEST(SteadyState, ResonantMatchesThermalValueAndVanishesWhenHot) {
  for (double T : {1.0, 5.0, 20.0}) {
    const auto g = build_resonant({0.0, 0.5}, fig_bath(), ThermalState{T});
    const auto s = steady_state(g);
    const auto expect = resonant_steady_state(g);
    EXPECT_NEAR(s.ax, expect.ax, 1e-10);
    EXPECT_NEAR(s.ay, 0.0, 1e-10);
    EXPECT_NEAR(s.az, 0.0, 1e-10);
  }
  const auto hot = build_resonant({0.0, 0.5}, fig_bath(2.0), ThermalState{300.0});
  EXPECT_LT(steady_state(hot).vec().norm(), 1e-6);
}

TEST(FrameMapping, PolaronLabRoundTrip) {
  const BlochVector p{-0.7, 0.2, 0.4, Frame::polaron};
  const auto same = to_lab_frame(p, 1.0);
  EXPECT_EQ(same.vec(), p.vec());
  const auto lab = to_lab_frame(p, 0.6);
  EXPECT_EQ(lab.frame, Frame::lab);
  EXPECT_DOUBLE_EQ(lab.ax, 0.6 * -0.7);
  EXPECT_DOUBLE_EQ(lab.ay, 0.6 * 0.2);
  EXPECT_EQ(lab.az, 0.4);
  EXPECT_THROW(to_lab_frame(lab, 0.6), DomainError);
  EXPECT_THROW(to_polaron_frame(p, 0.6), DomainError);
  const auto back = to_polaron_frame(lab, 0.6);
  EXPECT_NEAR((back.vec() - p.vec()).norm(), 0.0, 1e-15);

  const auto g = build_resonant({0.0, 0.5}, fig_bath(), ThermalState{2.0});
  const double th = std::tanh(g.polaron.V_R / 2.0);
  const auto mapped = to_lab_frame({-th, 0.0, 0.0, Frame::polaron}, g.polaron.B);
  EXPECT_NEAR(mapped.ax, steady_state(g).ax, 1e-10);
}

TEST(Evolve, PolaronFrameInitialStateIsMapped) {
  const auto g = build_resonant({0.0, 0.5}, fig_bath(), ThermalState{2.0});
  const BlochVector p{0.5, 0.0, 0.5, Frame::polaron};
  const auto a = evolve(g, p, {0.0, 3.0});
  const auto b = evolve(g, to_lab_frame(p, g.polaron.B), {0.0, 3.0});
  EXPECT_DOUBLE_EQ(a.states[0].ax, g.polaron.B * 0.5);
  EXPECT_LT((a.states[1].vec() - b.states[1].vec()).norm(), 1e-14);
}

TEST(ClosedFormWeak, MatchesWeakGeneratorEvolution) {
  const auto times = uniform_times(30.0, 301);
  for (double eps : {0.2, 0.5, 1.0}) {
    const auto g = build_weak({eps, 0.5}, fig_bath(2.0), ThermalState{5.0});
    const auto cf = closed_form_weak(g, times);
    EXPECT_LT(max_gap(cf.az.values, component(evolve(g, times), &BlochVector::az)), 1e-8) << eps;
  }
}

TEST(ClosedFormWeak, ZeroBiasReducesToResonantForm) {
  const ThermalState t{5.0};
  const auto times = uniform_times(30.0, 301);
  const auto w = build_weak({0.0, 0.5}, fig_bath(2.0), t);
  const auto cf = closed_form_weak(w, times);
  RateSet r;
  r.Gamma_y = 0.0;
  r.Gamma_z = cf.Gamma_W;
  r.lambda_3 = w.rates.lambda_3;
  const auto res = closed_form_resonant({0.0, 0.5}, w.polaron, r, t, times);
  EXPECT_LT(max_gap(cf.az.values, component(res, &BlochVector::az)), 1e-12);
  EXPECT_NEAR(cf.xi_squared, *res.xi_squared, 1e-12);
}

TEST(ClosedFormWeak, AmplitudeShrinksWithBias) {
  double prev = 1.0 + 1e-15;
  for (double eps : {0.0, 0.2, 0.5, 1.0, 2.0}) {
    const auto cf = closed_form_weak({eps, 0.5}, fig_bath(2.0), ThermalState{5.0}, {0.0});
    EXPECT_LT(cf.amplitude, prev) << eps;
    EXPECT_LE(cf.amplitude, 1.0);
    prev = cf.amplitude;
  }
}

TEST(ClosedFormWeak, StronglyCorrelatedBathTracksFullEvolution) {
  // μ = 2 with the remaining Fig-5 parameters, at weak coupling.
  BathModel bath = fig_bath(2.0);
  bath.alpha = 1e-3;
  const auto times = uniform_times(30.0, 301);
  const SystemModel sys{0.5, 0.5};
  for (double T : {5.0, 10.0}) {
    const ThermalState t{T};
    const auto full = evolve(build_full(sys, bath, t), times);
    const auto cf = closed_form_weak(sys, bath, t, times);
    EXPECT_LT(max_gap(cf.az.values, component(full, &BlochVector::az)), 0.02) << T;
  }
}

TEST(ClosedFormWeak, FigureFiveCouplingIsOutsideWeakRegime) {
  // At α = 0.05 the two-phonon dephasing Γy outweighs the one-phonon rate
  // even with μ = 2, so the weak form cannot follow the full dynamics.
  const SystemModel sys{0.5, 0.5};
  const auto times = uniform_times(30.0, 301);
  for (double T : {5.0, 10.0}) {
    const ThermalState t{T};
    const auto full = build_full(sys, fig_bath(2.0), t);
    const auto weak = build_weak(sys, fig_bath(2.0), t);
    EXPECT_GT(full.rates.Gamma_y, weak.rates.Gamma_x) << T;
    EXPECT_GT(full.rates.Gamma_z, 10.0 * weak.rates.Gamma_z) << T;
    const auto cf = closed_form_weak(weak, times);
    EXPECT_GT(max_gap(cf.az.values, component(evolve(full, times), &BlochVector::az)), 0.2) << T;
  }
}

TEST(ClosedFormWeak, ImaginaryFrequencyIsRejected) {
  Generator g = build_weak({0.5, 0.5}, fig_bath(2.0), ThermalState{5.0});
  g.rates.Gamma_x = 10.0;
  EXPECT_THROW(closed_form_weak(g, {0.0}), RegimeError);
  EXPECT_THROW(closed_form_weak(build_full({0.5, 0.5}, fig_bath(), ThermalState{5.0}), {0.0}), RegimeError);
}

TEST(ClosedFormHighT, FirstOrderIsPurelyIncoherent) {
  const auto g = build_high_temperature({2.0, 0.5}, fig_bath(), ThermalState{5.0});
  const auto times = uniform_times(30.0, 61);
  const auto cf = closed_form_high_T(g, times, 1);
  const double Gz = g.rates.Gamma_z;
  const double th = std::tanh(g.polaron.eta / 10.0);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double e = std::exp(-Gz * times[k]);
    EXPECT_NEAR(cf.az.values[k], e - (1.0 - e) * th, 1e-14);
  }
  EXPECT_THROW(closed_form_high_T(g, times, 3), DomainError);
}

TEST(ClosedFormHighT, AmplitudeVanishesAsRenormalisationGrows) {
  double prev = 1.0;
  for (double T : {2.0, 10.0, 50.0, 200.0}) {
    const auto cf = closed_form_high_T({2.0, 0.5}, fig_bath(0.0), ThermalState{T}, {0.0});
    EXPECT_LT(cf.amplitude, prev) << T;
    EXPECT_TRUE(std::isfinite(cf.epsilon_bar));
    prev = cf.amplitude;
  }
  const auto hot = closed_form_high_T({2.0, 0.5}, fig_bath(0.0), ThermalState{200.0}, {0.0});
  EXPECT_LT(hot.amplitude, 1e-6);
  EXPECT_NEAR(hot.epsilon_bar, 2.0, 0.1);
}

TEST(ClosedFormHighT, ExpansionErrorShrinksFasterThanSecondOrder) {
  // Shrinking V at fixed ε: order 1 misses the a·cos(ε̄t) term, so its error
  // stays near 2a = 8x², while order 2 is o(x²).
  const auto times = uniform_times(30.0, 301);
  for (double eps : {2.0, 4.0}) {
    double prev_z = 1.0;
    double prev_y = 1.0;
    for (double V : {0.2, 0.1, 0.05}) {
      const auto g = build_high_temperature({eps, V}, fig_bath(), ThermalState{5.0});
      const auto num = evolve(g, times);
      const auto az = component(num, &BlochVector::az);
      const double x = g.polaron.V_R / eps;
      const double first = max_gap(closed_form_high_T(g, times, 1).az.values, az) / (x * x);
      const auto cf = closed_form_high_T(g, times, 2);
      const double second = max_gap(cf.az.values, az) / (x * x);
      const double coherence = max_gap(cf.ay.values, component(num, &BlochVector::ay)) / (x * x);
      EXPECT_NEAR(first, 8.0, 0.5) << eps << " " << V;
      EXPECT_LT(second, 0.75 * prev_z) << eps << " " << V;
      EXPECT_LT(coherence, 0.75 * prev_y) << eps << " " << V;
      prev_z = second;
      prev_y = coherence;
    }
  }
}

TEST(ClosedFormHighT, FigureSevenCoherenceOscillatesPopulationDoesNot) {
  const SystemModel sys{2.0, 0.5};
  const ThermalState t{1.0};
  const auto times = uniform_times(30.0, 3001);
  const auto cf = closed_form_high_T(sys, fig_bath(), t, times);
  const auto full = evolve(build_full(sys, fig_bath(), t), times);
  const auto ay = component(full, &BlochVector::ay);
  const auto zeros = crossings(times, ay, 0.0);
  ASSERT_GE(zeros.size(), 3u);
  const double half_period = (zeros.back() - zeros.front()) / static_cast<double>(zeros.size() - 1);
  EXPECT_NEAR(2.0 * half_period, 2.0 * std::numbers::pi / cf.epsilon_bar, 0.05 * 2.0 * std::numbers::pi / cf.epsilon_bar);

  const auto az = component(full, &BlochVector::az);
  EXPECT_LE(crossings(times, az, full.steady->az).size(), 1u);
}

TEST(ClosedFormHighT, RequiresHighTemperatureGenerator) {
  const auto g = build_full({2.0, 0.5}, fig_bath(), ThermalState{5.0});
  EXPECT_THROW(closed_form_high_T(g, {0.0}), RegimeError);
}
