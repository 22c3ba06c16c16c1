#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "matherlab/integrate.hpp"
#include "matherlab/measure.hpp"
#include "matherlab/region.hpp"
#include "matherlab/scenarios.hpp"
#include "matherlab/systems.hpp"

using namespace matherlab;

TEST(Measure, FreeFlowRotationIsMomentum) {
  gen::for_all(10, 31, [](gen::Rng& rng, std::size_t) {
    const auto sys = systems::free_particle(2);
    const State x0 = rng.torus_state(2, 2.0);
    const auto mu = occupation_measure(integrate(sys, x0, 10.0, {.dt = 1e-2}));
    const auto rho = rotation_vector(mu, sys);
    ASSERT_TRUE(mu.winding_rate.has_value());
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(rho[i], x0[2 + i], 1e-12);
      EXPECT_NEAR((*mu.winding_rate)[i], x0[2 + i], 1e-12);
    }
    EXPECT_NEAR(mu.total_weight(), 1.0, 1e-12);
    // H - I.theta' = -|I|^2/2
    EXPECT_NEAR(action_of_measure(mu, sys), -0.5 * (x0[2] * x0[2] + x0[3] * x0[3]), 1e-12);
  });
}

TEST(Measure, PendulumRotationAgreesWithWindingRate) {
  const auto sys = systems::pendulum();
  const auto traj = integrate(sys, State{0.0, 3.0}, 200.0, {.dt = 1e-3, .record_every = 10});
  const auto mu = occupation_measure(traj);
  const double rho = rotation_vector(mu, sys)[0];
  EXPECT_NEAR(rho, (*mu.winding_rate)[0], 1e-3);
  EXPECT_GT(rho, 2.0);
}

TEST(Measure, AnnulusRotationAtTwoRadii) {
  const auto sys = systems::annulus();
  for (double r : {3.0, 1.5}) {
    const auto mu = occupation_measure(integrate(sys, State{r, 0.0}, 100.0, {.dt = 1e-3, .record_every = 10}));
    const double expected = systems::AnnulusProfile{}.derivative_over_r(r);
    EXPECT_NEAR(rotation_vector(mu, sys)[0], expected, 1e-3);
    EXPECT_NEAR((*mu.winding_rate)[0], expected, 1e-3);
    EXPECT_NEAR(mu.expectation([](std::span<const double> x) { return std::hypot(x[0], x[1]); }), r, 1e-6);
  }
}

TEST(Measure, AnnulusTimeAverageMatchesClosedForm) {
  // x(t) = r cos(w t): the time average over [0, T] is r sin(w T)/(w T)
  const auto sys = systems::annulus();
  const double r = 3.0, w = 2.0 / 3.0, T = 100.0;
  const auto mu = occupation_measure(integrate(sys, State{r, 0.0}, T, {.dt = 1e-3}));
  const double avg = mu.expectation([](std::span<const double> x) { return x[0]; });
  EXPECT_NEAR(avg, r * std::sin(w * T) / (w * T), 1e-6);
}

TEST(Measure, WindowSelectsSamples) {
  // theta(t) = t / 4 stays in [0.5, 0.9] on the window
  const auto traj = integrate(systems::free_particle(1), State{0.0, 0.25}, 10.0, {.dt = 0.1});
  const auto mu = occupation_measure(traj, 2.0, 3.6);
  EXPECT_NEAR(mu.total_weight(), 1.0, 1e-12);
  EXPECT_EQ(mu.size(), 17u);
  for (const auto& a : mu.atoms) {
    const double t = a[0] / 0.25;
    EXPECT_GE(t, 2.0 - 1e-9);
    EXPECT_LE(t, 3.6 + 1e-9);
  }
  EXPECT_THROW(occupation_measure(traj, 4.0, 2.0), ConfigError);
}

TEST(Measure, ConvexCombinationIsLinear) {
  const auto sys = systems::free_particle(2);
  gen::for_all(30, 32, [&](gen::Rng& rng, std::size_t) {
    std::vector<OccupationMeasure> ms;
    const std::size_t k = static_cast<std::size_t>(rng.integer(2, 4));
    for (std::size_t j = 0; j < k; ++j)
      ms.push_back(occupation_measure(integrate(sys, rng.torus_state(2, 2.0), 1.0, {.dt = 0.05})));
    const auto w = rng.simplex(k);
    const auto mix = convex_combine(ms, w);
    auto f = [](std::span<const double> x) { return std::sin(6.0 * x[0]) + x[2] * x[3]; };
    double lin = 0.0;
    std::vector<double> rho_lin(2, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      lin += w[j] * ms[j].expectation(f);
      const auto r = rotation_vector(ms[j], sys);
      for (std::size_t i = 0; i < 2; ++i) rho_lin[i] += w[j] * r[i];
    }
    EXPECT_NEAR(mix.expectation(f), lin, 1e-12);
    const auto rho = rotation_vector(mix, sys);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(rho[i], rho_lin[i], 1e-12);
      EXPECT_NEAR((*mix.winding_rate)[i], rho_lin[i], 1e-12);
    }
  });
}

TEST(Measure, ActionIdentityWithClosedForms) {
  // action with eta = c dtheta + du equals A(mu) + <c, rho> on an orbit measure
  const auto sys = systems::pendulum();
  gen::for_all(10, 33, [&](gen::Rng& rng, std::size_t) {
    const auto mu = occupation_measure(integrate(sys, rng.torus_state(1, 3.0), 40.0, {.dt = 1e-3, .record_every = 5}));
    const std::vector<double> c{rng.uniform(-2.0, 2.0)};
    EXPECT_LE(detail::identity_residual(mu, sys, c), 2e-3);
  });
}

TEST(Measure, MergedPreservesWeightAndExpectation) {
  gen::for_all(50, 34, [](gen::Rng& rng, std::size_t) {
    OccupationMeasure mu;
    mu.chart = Chart::CotangentTorus;
    mu.dof = 1;
    const auto w = rng.simplex(20);
    for (std::size_t k = 0; k < 20; ++k) {
      mu.atoms.push_back({static_cast<double>(rng.integer(0, 3)) / 4.0, static_cast<double>(rng.integer(-1, 1))});
      mu.weights.push_back(w[k]);
    }
    const auto m = mu.merged();
    EXPECT_LE(m.size(), 12u);
    EXPECT_NEAR(m.total_weight(), 1.0, 1e-12);
    auto f = [](std::span<const double> x) { return std::cos(x[0]) + x[1]; };
    EXPECT_NEAR(m.expectation(f), mu.expectation(f), 1e-12);
    EXPECT_TRUE(std::is_sorted(m.atoms.begin(), m.atoms.end()));
  });
}

TEST(Measure, SupportClearance) {
  const auto mu = OccupationMeasure::dirac(Chart::CotangentTorus, State{0.3, 0.0, 2.0, 0.0});
  EXPECT_NEAR(support_clearance(mu, regions::momentum_ball(2, 1.5)), 0.5, 1e-15);
  EXPECT_NEAR(support_clearance(mu, regions::momentum_ball(2, 2.5)), -0.5, 1e-15);
}

TEST(Measure, JsonRoundTrip) {
  const auto mu = occupation_measure(integrate(systems::pendulum(), State{0.1, 1.2}, 1.0, {.dt = 0.1}));
  const auto back = measure_from_json(measure_to_json(mu));
  EXPECT_EQ(back.atoms, mu.atoms);
  EXPECT_EQ(back.weights, mu.weights);
  EXPECT_EQ(back.winding_rate, mu.winding_rate);
}

TEST(Measure, Errors) {
  const auto a = OccupationMeasure::dirac(Chart::CotangentTorus, State{0.1, 1.0});
  const auto b = OccupationMeasure::dirac(Chart::Plane, State{1.0, 0.0});
  EXPECT_THROW(convex_combine({a, a}, {0.5, 0.6}), ConfigError);
  EXPECT_THROW(convex_combine({a, a}, {1.5, -0.5}), ConfigError);
  EXPECT_THROW(convex_combine({a, b}, {0.5, 0.5}), DimensionError);
  EXPECT_THROW(rotation_vector(b, systems::pendulum()), DimensionError);
}
