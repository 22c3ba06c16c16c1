#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "matherlab/integrate.hpp"
#include "matherlab/region.hpp"
#include "matherlab/scenarios.hpp"
#include "matherlab/systems.hpp"

using namespace matherlab;

namespace {

struct Case {
  HamiltonianSystem sys;
  State x0;
};

std::vector<Case> builtin_cases() {
  return {{systems::channel(0.05, 2.0), {0.13, 0.4, 0.6, -0.01}},
          {systems::pendulum(), {0.2, 0.9}},
          {systems::free_particle(2), {0.1, 0.2, 0.7, -0.3}},
          {systems::quadratic_normal_form(), {0.1, 0.2, 0.5, 0.25}},
          {systems::pathological({1.0, 0.0}, 0.25), {0.0, 0.0, 1.05, 0.1}},
          {systems::annulus(), {3.0, 0.5}}};
}

double state_distance(const State& a, const State& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST(Integrate, ExactLinearFlow) {
  gen::for_all(20, 21, [](gen::Rng& rng, std::size_t) {
    const auto sys = systems::free_particle(2);
    const State x0 = rng.torus_state(2, 3.0);
    const double T = rng.uniform(1.0, 20.0);
    const auto traj = integrate(sys, x0, T, {.dt = 1e-2});
    const State& end = traj.lifted.back();
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_NEAR(end[i], x0[i] + x0[2 + i] * T, 1e-11 * (1.0 + T));
      EXPECT_EQ(end[2 + i], x0[2 + i]);
    }
    EXPECT_NEAR(traj.duration(), T, 1e-12 * T);
  });
}

TEST(Integrate, ReversibleOnBuiltinSystems) {
  for (const auto& c : builtin_cases()) {
    const auto fwd = integrate(c.sys, c.x0, 10.0, {.dt = 1e-3});
    IntegrateOptions back{.dt = 1e-3};
    back.backward = true;
    const auto bwd = integrate(c.sys, fwd.lifted.back(), 10.0, back);
    EXPECT_LE(state_distance(bwd.lifted.back(), c.x0), 1e-8) << c.sys.name();
  }
}

TEST(Integrate, EnergyDriftSmallOnBuiltinSystems) {
  for (const auto& c : builtin_cases()) {
    const auto traj = integrate(c.sys, c.x0, 100.0, {.dt = 1e-3, .record_every = 10});
    EXPECT_LE(traj.max_energy_drift(), 1e-6) << c.sys.name();
  }
}

TEST(Integrate, EnergyErrorHasTheStatedOrder) {
  const auto sys = systems::pendulum();
  const State x0{0.2, 0.9};
  auto drift = [&](double dt, int order) {
    return integrate(sys, x0, 20.0, {.dt = dt, .order = order}).max_energy_drift();
  };
  const double r2 = drift(2e-2, 2) / drift(1e-2, 2);
  EXPECT_GT(r2, 3.0);
  EXPECT_LT(r2, 5.0);
  const double r4 = drift(4e-2, 4) / drift(2e-2, 4);
  EXPECT_GT(r4, 12.0);
  EXPECT_LT(r4, 20.0);
}

TEST(Integrate, HitsFinalTimeExactly) {
  const auto traj = integrate(systems::pendulum(), State{0.5, 0.2}, 1.0, {.dt = 0.3});
  EXPECT_EQ(traj.size(), 5u);
  EXPECT_NEAR(traj.time(traj.size() - 1), 1.0, 1e-15);
  EXPECT_NEAR(traj.step, 0.25, 1e-15);
}

TEST(Integrate, RecordEveryThinsSamples) {
  const auto all = integrate(systems::pendulum(), State{0.0, 1.0}, 1.0, {.dt = 1e-2});
  const auto thin = integrate(systems::pendulum(), State{0.0, 1.0}, 1.0, {.dt = 1e-2, .record_every = 10});
  ASSERT_EQ(thin.size(), 11u);
  for (std::size_t k = 0; k < thin.size(); ++k) EXPECT_EQ(thin.lifted[k], all.lifted[10 * k]);
}

TEST(Integrate, PointWrapsAngles) {
  const auto traj = integrate(systems::free_particle(1), State{0.9, 1.0}, 0.5, {.dt = 0.1});
  EXPECT_NEAR(traj.lifted.back()[0], 1.4, 1e-12);
  EXPECT_NEAR(traj.point(traj.size() - 1)[0], 0.4, 1e-12);
}

TEST(Integrate, RejectsBadOptions) {
  const auto sys = systems::pendulum();
  EXPECT_THROW(integrate(sys, State{0.0, 1.0}, 1.0, {.dt = 0.0}), ConfigError);
  EXPECT_THROW(integrate(sys, State{0.0, 1.0}, 1e-4, {.dt = 1e-3}), ConfigError);
  EXPECT_THROW(integrate(sys, State{0.0, 1.0, 2.0}, 1.0), DimensionError);
}

TEST(Integrate, LargeAngleStepIsNumericalError) {
  try {
    integrate(systems::free_particle(1), State{0.0, 1.0}, 3.0, {.dt = 0.6});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.last_valid().size(), 2u);
  }
}

TEST(Integrate, ChannelEscapeMatchesQuadrature) {
  const double eps = 0.05, K = 2.0;
  const auto sys = systems::channel(eps, K);
  const auto traj = integrate(sys, State{0.0, 0.0, 0.0, 0.0}, 12.0, {.dt = 1e-3});
  const auto hit = detect_escape(traj, regions::complement(regions::momentum_slab(2, 0, K)), &sys, {.dt = 1e-3});
  ASSERT_TRUE(hit.has_value());
  const double oracle = channel_escape_time_oracle(eps, K, K);
  EXPECT_NEAR(oracle, K / (6.283185307179586 * eps), 1e-9);
  EXPECT_NEAR(hit->time, oracle, 1e-2 * oracle);
  EXPECT_NEAR(std::abs(hit->point[2]), K, 1e-5);
}

TEST(Integrate, EscapeAbsentWhenRegionNeverReached) {
  const auto sys = systems::pendulum();
  const auto traj = integrate(sys, State{0.0, 0.1}, 5.0, {.dt = 1e-2});
  EXPECT_FALSE(detect_escape(traj, regions::complement(regions::momentum_slab(1, 0, 5.0)), &sys).has_value());
}

TEST(Integrate, BatchIsIndependentOfThreadCount) {
  const auto sys = systems::channel(0.05, 2.0);
  std::vector<State> starts;
  gen::Rng rng(23);
  for (int k = 0; k < 6; ++k) starts.push_back(rng.torus_state(2, 1.5));
  const auto one = integrate_batch(sys, starts, 5.0, {.dt = 1e-2}, 1);
  const auto four = integrate_batch(sys, starts, 5.0, {.dt = 1e-2}, 4);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    EXPECT_EQ(one[i].lifted, four[i].lifted);
    EXPECT_EQ(one[i].lifted, integrate(sys, starts[i], 5.0, {.dt = 1e-2}).lifted);
  }
}

TEST(Integrate, ZeroPerturbationPreservesMomenta) {
  const auto sys = systems::channel(0.0, 2.0);
  gen::for_all(10, 24, [&](gen::Rng& rng, std::size_t) {
    const State x0 = rng.torus_state(2, 1.5);
    const auto traj = integrate(sys, x0, 50.0, {.dt = 1e-2, .record_every = 50});
    for (const auto& x : traj.lifted) {
      EXPECT_EQ(x[2], x0[2]);
      EXPECT_EQ(x[3], x0[3]);
    }
  });
}

TEST(Integrate, TrajectoryCsvUsesSeventeenDigits) {
  const auto traj = integrate(systems::pendulum(), State{0.1, 1.0 / 3.0}, 0.02, {.dt = 1e-2});
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  EXPECT_NE(os.str().find("0.33333333333333331"), std::string::npos);
  EXPECT_EQ(os.str().find('\r'), std::string::npos);
}
