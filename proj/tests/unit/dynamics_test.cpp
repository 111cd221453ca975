#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "spinfid/dynamics.hpp"
#include "spinfid/error.hpp"
#include "spinfid/fit.hpp"
#include "spinfid/glycerol.hpp"
#include "test_support.hpp"

namespace {

using namespace spinfid::dynamics;
using spinfid::physics::GValue;
using spinfid::physics::MagneticField;

constexpr double kMuB = 9.2740100783e-24;
constexpr double kHbar = 6.62607015e-34 / (2.0 * std::numbers::pi);

// Classic RK4 on the Bloch equations with the field along x:
//   dx/dt = -x/T1, dy/dt = -w z - y/T2, dz/dt = w y - z/T2.
Vec3 rk4_bloch(Vec3 p, double w, double t2, double t1, double dt, int steps) {
  auto f = [&](const Vec3& q) {
    return Vec3{-q[0] / t1, -w * q[2] - q[1] / t2, w * q[1] - q[2] / t2};
  };
  const double h = dt / steps;
  for (int s = 0; s < steps; ++s) {
    const Vec3 k1 = f(p);
    Vec3 a, b, c;
    for (int i = 0; i < 3; ++i) a[i] = p[i] + 0.5 * h * k1[i];
    const Vec3 k2 = f(a);
    for (int i = 0; i < 3; ++i) b[i] = p[i] + 0.5 * h * k2[i];
    const Vec3 k3 = f(b);
    for (int i = 0; i < 3; ++i) c[i] = p[i] + h * k3[i];
    const Vec3 k4 = f(c);
    for (int i = 0; i < 3; ++i) p[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return p;
}

double norm(const Vec3& p) { return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]); }

ExperimentConfig clean_config() {
  ExperimentConfig c;
  c.g = GValue(1.74, 0.0);
  c.oke.amplitude = 0.0;
  c.noise.additive_sigma = 0.0;
  return c;
}

TEST(Initialize, SignAndScale) {
  EXPECT_EQ(initialize_polarization(Helicity::left, 1.0), (Vec3{0, 0, 1}));
  EXPECT_EQ(initialize_polarization(Helicity::right, 1.0), (Vec3{0, 0, -1}));
  EXPECT_EQ(initialize_polarization(Helicity::left, 0.0)[2], 0.0);
  EXPECT_EQ(initialize_polarization(Helicity::right, 0.4)[2], -0.4);
  EXPECT_THROW(initialize_polarization(Helicity::left, 1.1), spinfid::DomainError);
  EXPECT_THROW(initialize_polarization(Helicity::left, -0.1), spinfid::DomainError);
}

TEST(EvolveBloch, Examples) {
  BlochState s;
  s.polarization = {0, 0, 1};
  const auto still = evolve_bloch(s, 0.0, kInfinity, kInfinity, 123e-12);
  EXPECT_EQ(still.polarization, (Vec3{0, 0, 1}));

  const double period = 2.0 * std::numbers::pi * kHbar / (1.74 * kMuB * 5.0);
  const auto turn = evolve_bloch(s, 5.0, kInfinity, kInfinity, period);
  EXPECT_NEAR(turn.polarization[1], 0.0, 1e-9);
  EXPECT_NEAR(turn.polarization[2], 1.0, 1e-9);

  const auto decayed = evolve_bloch(s, 0.0, 8.60e-12, kInfinity, 8.60e-12);
  EXPECT_NEAR(decayed.polarization[2], std::exp(-1.0), 1e-15);
}

TEST(EvolveBloch, MatchesRk4) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0), b(0.0, 5.0), t2(2e-12, 30e-12), dt(0.0, 20e-12);
  for (int trial = 0; trial < 50; ++trial) {
    BlochState s;
    s.polarization = {0.5 * u(rng), 0.5 * u(rng), 0.5 * u(rng)};
    s.member_g = 1.74 + 0.1 * u(rng);
    s.member_field_offset = 0.01 * u(rng);
    const double field = b(rng), tt2 = t2(rng), tt1 = 3.0 * tt2, step = dt(rng);
    const double w = s.member_g * kMuB * (field + s.member_field_offset) / kHbar;
    const Vec3 want = rk4_bloch(s.polarization, w, tt2, tt1, step, 20000);
    const Vec3 got = evolve_bloch(s, field, tt2, tt1, step).polarization;
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], want[i], 1e-10);
  }
}

TEST(EvolveBloch, NormNonIncreasing) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.57, 0.57);
  BlochState s;
  s.polarization = {u(rng), u(rng), u(rng)};
  double prev = norm(s.polarization);
  for (int i = 0; i < 200; ++i) {
    s = evolve_bloch(s, 3.0, 9e-12, 20e-12, 0.37e-12);
    const double n = norm(s.polarization);
    EXPECT_LE(n, prev + 1e-15);
    EXPECT_LE(n, 1.0 + 1e-9);
    prev = n;
  }
}

TEST(EvolveBloch, DomainErrors) {
  BlochState s;
  EXPECT_THROW(evolve_bloch(s, 1.0, 0.0, 1e-12, 1e-12), spinfid::DomainError);
  EXPECT_THROW(evolve_bloch(s, 1.0, 3e-12, 1e-12, 1e-12), spinfid::DomainError);
  EXPECT_THROW(evolve_bloch(s, 1.0, 1e-12, 1e-12, -1e-12), spinfid::DomainError);
}

TEST(EffectiveT2star, Anchors) {
  const auto m = DecoherenceModel::aqueous_default();
  const GValue g(1.74, 0.0174);
  EXPECT_NEAR(effective_t2star(m, 1.0, 0.0, g), 8.60e-12, 1e-18);
  const double eta = spinfid::analysis::glycerol_viscosity(0.40, 293.15);
  EXPECT_NEAR(effective_t2star(m, eta, 0.0, g), 21.9e-12, 1e-18);
  EXPECT_EQ(effective_t2star(m, 1.0, 5.0, GValue(1.74, 0.0)), effective_t2star(m, 1.0, 0.0, g));
  double prev = effective_t2star(m, 1.0, 0.0, g);
  for (double b = 0.5; b <= 5.0; b += 0.5) {
    const double t = effective_t2star(m, 1.0, b, g);
    EXPECT_LT(t, prev);
    prev = t;
  }
}

TEST(Decoherence, Validation) {
  DecoherenceModel m{-10e-12, 1e-12};
  EXPECT_THROW(m.member_t2(1.0), spinfid::DomainError);
  EXPECT_THROW(DecoherenceModel::aqueous_default().member_t2(0.0), spinfid::DomainError);
  DecoherenceModel capped{8e-12, 0.0, 3e-12};
  EXPECT_THROW(capped.member_t2(1.0), spinfid::DomainError);
}

TEST(ExcitedState, Weight) {
  EXPECT_NEAR(excited_state_weight(17e-12, 17e-12, ExcitedStateCoupling::decay), std::exp(-1.0), 1e-15);
  EXPECT_EQ(excited_state_weight(0.0, 17e-12, ExcitedStateCoupling::decay), 1.0);
  EXPECT_EQ(excited_state_weight(1e-9, 17e-12), 1.0);
  EXPECT_THROW(excited_state_weight(-1e-12, 17e-12), spinfid::DomainError);
}

TEST(PhaseOffset, Cubic) {
  EXPECT_EQ(phase_offset(0.0, 0.3, 0.01), 0.3);
  EXPECT_NEAR(phase_offset(5.0, 0.0, 0.01), 1.25, 1e-15);
  EXPECT_NEAR((phase_offset(4.0, 0.2, 0.03) - 0.2) / (phase_offset(2.0, 0.2, 0.03) - 0.2), 8.0, 1e-12);
}

TEST(Simulate, ClosedFormEquivalence) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> b(0.0, 5.0), eta(0.8, 4.0), phi0(-1.0, 1.0), cubic(0.0, 0.02),
      eff(0.2, 1.0), stop(20e-12, 80e-12);
  for (int trial = 0; trial < 20; ++trial) {
    ExperimentConfig c = clean_config();
    c.field = MagneticField(b(rng));
    c.viscosity = eta(rng);
    c.phase_phi0 = phi0(rng);
    c.phase_cubic = cubic(rng);
    c.initialization_efficiency = eff(rng);
    c.pump_helicity = trial % 2 ? Helicity::left : Helicity::right;
    const double end = stop(rng);
    c.time_grid = spinfid::uniform_grid(0.0, end, end / 299.0);
    ASSERT_EQ(c.time_grid.size(), 300u);
    const auto trace = simulate_trace(c);
    const auto p = closed_form_parameters(c);
    // Reference uses the typed-in constants, not the library's.
    const double w = 1.74 * kMuB * c.field.magnitude() / kHbar;
    for (std::size_t i = 0; i < trace.size(); ++i) {
      const double t = trace.times()[i];
      const double envelope = std::abs(p.eta0) * std::exp(-t / p.t2);
      const double want = p.eta0 * std::exp(-t / p.t2) * std::cos(w * t + p.phi);
      EXPECT_LT(std::abs(trace.values()[i] - want) / envelope, 1e-9) << "trial " << trial << " t " << t;
    }
  }
}

TEST(Simulate, ZeroCrossingQuarterPeriod) {
  ExperimentConfig c = clean_config();
  c.field = MagneticField(5.0);
  c.decoherence = DecoherenceModel{1e-6, 0.0};
  c.time_grid = spinfid::uniform_grid(0.0, 4e-12, 0.001e-12);
  const auto tr = simulate_trace(c);
  double crossing = 0.0;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    if (tr.values()[i - 1] > 0.0 && tr.values()[i] <= 0.0) {
      const double a = tr.values()[i - 1], b = tr.values()[i];
      crossing = tr.times()[i - 1] + (tr.times()[i] - tr.times()[i - 1]) * a / (a - b);
      break;
    }
  }
  EXPECT_NEAR(crossing * 1e12, 2.05, 0.01);
}

TEST(Simulate, PureDecayValue) {
  ExperimentConfig c = clean_config();
  c.time_grid = {0.0, 8.60e-12};
  const auto tr = simulate_trace(c);
  EXPECT_NEAR(tr.values()[1], signal_amplitude(c) * std::exp(-1.0), 1e-12);
}

TEST(Simulate, HelicityOddOkeEven) {
  ExperimentConfig c;
  c.field = MagneticField(3.0);
  c.ensemble_size = 2000;
  c.oke.amplitude = 40.0;
  c.time_grid = spinfid::uniform_grid(-1e-12, 30e-12, 0.05e-12);
  auto left = simulate_components(c, {.threads = 1, .include_noise = false});
  c.pump_helicity = Helicity::right;
  auto right = simulate_components(c, {.threads = 1, .include_noise = false});
  for (std::size_t i = 0; i < left.spin.size(); ++i) {
    EXPECT_EQ(left.spin[i], -right.spin[i]);
    EXPECT_EQ(left.oke_even[i], right.oke_even[i]);
  }
}

TEST(Simulate, PolarizationBoundedByEfficiency) {
  ExperimentConfig c;
  c.field = MagneticField(5.0);
  c.ensemble_size = 3000;
  c.initialization_efficiency = 0.6;
  c.oke.amplitude = 0.0;
  const auto parts = simulate_components(c, {.include_noise = false});
  const double amp = c.noise.signal_per_molar * c.concentration;
  for (double s : parts.spin) EXPECT_LE(std::abs(s / amp), 0.6 + 1e-12);
}

TEST(Simulate, DeterministicAcrossThreads) {
  ExperimentConfig c;
  c.field = MagneticField(4.0);
  c.ensemble_size = 3000;
  c.noise.additive_sigma = 0.01;
  const auto a = simulate_trace(c, {.threads = 1});
  const auto b = simulate_trace(c, {.threads = 4});
  const auto d = simulate_trace(c, {.threads = 3});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, d);
  c.rng_seed += 1;
  EXPECT_FALSE(a == simulate_trace(c, {.threads = 1}));
}

TEST(Simulate, NegativeDelaysCarryNoSpin) {
  ExperimentConfig c = clean_config();
  c.time_grid = spinfid::uniform_grid(-2e-12, 2e-12, 0.5e-12);
  const auto tr = simulate_trace(c);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(tr.values()[i], 0.0);
  EXPECT_GT(tr.values()[4], 0.0);
}

TEST(Simulate, GSpreadShortensFittedT2star) {
  ExperimentConfig c;
  c.g = GValue(1.74, 0.0174);
  c.oke.amplitude = 0.0;
  c.noise.additive_sigma = 0.0;
  c.ensemble_size = 100000;
  const auto zero = spinfid::fit::extract_t2star(simulate_trace(c), 0.0);
  c.field = MagneticField(5.0);
  const auto five = spinfid::fit::extract_t2star(simulate_trace(c), 5.0);
  ASSERT_TRUE(zero.converged);
  ASSERT_TRUE(five.converged);
  EXPECT_LT(five.value("t2star"), zero.value("t2star"));
}

TEST(Config, Validation) {
  ExperimentConfig c;
  c.time_grid = {1e-12, 0.5e-12};
  EXPECT_THROW(c.validate(), spinfid::ValidationError);
  c = ExperimentConfig{};
  c.ensemble_size = 0;
  EXPECT_THROW(c.validate(), spinfid::ValidationError);
  c = ExperimentConfig{};
  c.concentration = 0.0;
  EXPECT_THROW(c.validate(), spinfid::DomainError);
  c = ExperimentConfig{};
  c.field = MagneticField(1.0, {0.0, 1.0, 0.0});
  EXPECT_THROW(c.validate(), spinfid::DomainError);
}

}  // namespace
