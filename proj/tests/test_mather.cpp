#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "matherlab/mather.hpp"

using namespace matherlab;

namespace {

constexpr double kTwoPi = 6.283185307179586;

const DiscreteLagrangian& pendulum32() {
  static const DiscreteLagrangian S = discretize_lagrangian(MechanicalLagrangian::pendulum(), 32, 3.0, 8, 0);
  return S;
}

const DiscreteLagrangian& free16() {
  static const DiscreteLagrangian S = discretize_lagrangian(MechanicalLagrangian::free(1), 16, 3.0, 4, 0);
  return S;
}

}  // namespace

TEST(Mather, FreePathActionIsKinetic) {
  gen::for_all(20, 51, [](gen::Rng& rng, std::size_t) {
    const std::vector<double> q{rng.uniform(0.0, 1.0)}, d{rng.uniform(-2.0, 2.0)};
    EXPECT_NEAR(minimize_path(MechanicalLagrangian::free(1), q, d, 8).action, 0.5 * d[0] * d[0], 1e-12);
  });
}

TEST(Mather, PendulumRestActionAtBottom) {
  const auto l = MechanicalLagrangian::pendulum();
  const std::vector<double> zero{0.0};
  EXPECT_NEAR(minimize_path(l, zero, zero, 8).action, -1.0, 1e-3);
  // the rest path is an upper bound on the minimal action everywhere
  gen::for_all(20, 52, [&](gen::Rng& rng, std::size_t) {
    const std::vector<double> q{rng.uniform(0.0, 1.0)};
    EXPECT_LE(minimize_path(l, q, zero, 8).action, -std::cos(kTwoPi * q[0]) + 1e-12);
  });
}

TEST(Mather, FreeAlphaIsHalfSquare) {
  for (double c : {0.0, 0.5, -0.75, 1.25}) {
    const std::vector<double> cv{c};
    const auto r = alpha_lp(free16(), cv);
    EXPECT_NEAR(r.alpha, 0.5 * c * c, 1e-9) << c;
    EXPECT_NEAR(r.rotation[0], c, 1e-9) << c;
    EXPECT_NEAR(alpha_lax_oleinik(free16(), cv).alpha, r.alpha, 1e-8) << c;
  }
}

TEST(Mather, PendulumAlphaAtZero) {
  const std::vector<double> c{0.0};
  const auto r = alpha_lp(pendulum32(), c);
  EXPECT_NEAR(r.alpha, 1.0, 5e-2);
  EXPECT_NEAR(r.rotation[0], 0.0, 1e-9);
  EXPECT_LE(r.duality_gap, 1e-7);
  EXPECT_LE(r.measure.invariance_residual, 1e-9);
}

TEST(Mather, LpAndLaxOleinikAgree) {
  gen::for_all(6, 53, [](gen::Rng& rng, std::size_t) {
    const std::vector<double> c{rng.uniform(-1.4, 1.4)};
    const auto lp = alpha_lp(pendulum32(), c);
    const auto lo = alpha_lax_oleinik(pendulum32(), c);
    EXPECT_LE(std::abs(lp.alpha - lo.alpha), 2e-3 + lp.duality_gap) << c[0];
  });
}

TEST(Mather, ConvexEvenAndShiftEquivariant) {
  std::vector<std::vector<double>> classes;
  for (int k = -6; k <= 6; ++k) classes.push_back({0.25 * k});
  const auto rows = alpha_scan(pendulum32(), classes, 0);
  for (std::size_t i = 1; i + 1 < rows.size(); ++i)
    EXPECT_LE(rows[i].alpha - 0.5 * (rows[i - 1].alpha + rows[i + 1].alpha), 1e-9);
  for (std::size_t i = 0; i < rows.size(); ++i)
    EXPECT_NEAR(rows[i].alpha, rows[rows.size() - 1 - i].alpha, 1e-9);

  const auto shifted = pendulum32().shifted(0.7);
  const std::vector<double> c{0.5};
  EXPECT_NEAR(alpha_lp(shifted, c).alpha, alpha_lp(pendulum32(), c).alpha - 0.7, 1e-9);
}

TEST(Mather, RotationIsSubgradient) {
  std::vector<std::vector<double>> classes;
  for (int k = -6; k <= 6; ++k) classes.push_back({0.25 * k});
  const auto rows = alpha_scan(pendulum32(), classes, 0);
  std::vector<std::pair<std::vector<double>, double>> samples;
  for (const auto& r : rows) samples.emplace_back(r.c, r.alpha);
  for (const auto& r : rows) {
    const auto rep = subdifferential_contains_rotation(r.result, samples, 2e-2);
    EXPECT_TRUE(rep.holds) << "c = " << r.c[0] << " violation " << rep.max_violation;
    EXPECT_EQ(rep.checked, samples.size());
  }
}

TEST(Mather, MinimisingMeasureIdentity) {
  // A(mu) = alpha(c) - c.rho on the phase-space image of the minimising measure
  const auto sys = MechanicalLagrangian::pendulum().hamiltonian();
  for (double c : {0.0, 1.0, 2.0}) {
    const std::vector<double> cv{c};
    const auto r = alpha_lp(pendulum32(), cv);
    const auto mu = transition_phase_measure(pendulum32(), r);
    EXPECT_NEAR(mu.total_weight(), 1.0, 1e-9);
    EXPECT_NEAR(action_of_measure(mu, sys), r.alpha - c * r.rotation[0], 5e-2) << c;
  }
}

TEST(Mather, BetaOfHalfSquare) {
  std::vector<std::pair<std::vector<double>, double>> samples;
  for (int k = -40; k <= 40; ++k) {
    const double c = 0.05 * k;
    samples.push_back({{c}, 0.5 * c * c});
  }
  for (double h : {0.0, 0.5, -1.0}) {
    const std::vector<double> hv{h};
    const auto b = beta_conjugate(samples, hv);
    EXPECT_NEAR(b.value, 0.5 * h * h, 1e-12);
    EXPECT_FALSE(b.outside_reliable_range);
  }
  const std::vector<double> far{5.0};
  EXPECT_TRUE(beta_conjugate(samples, far).outside_reliable_range);
  EXPECT_THROW(beta_conjugate({}, far), ConfigError);
}

TEST(Mather, TwoDimensionalFreeAlpha) {
  const auto S = discretize_lagrangian(MechanicalLagrangian::free(2), 8, 1.0, 2, 0);
  const std::vector<double> c{0.25, -0.5};
  const auto r = alpha_lp(S, c);
  EXPECT_NEAR(r.alpha, 0.5 * (c[0] * c[0] + c[1] * c[1]), 1e-9);
  EXPECT_NEAR(r.rotation[0], 0.25, 1e-9);
  EXPECT_NEAR(r.rotation[1], -0.5, 1e-9);
  EXPECT_NEAR(alpha_lax_oleinik(S, c).alpha, r.alpha, 1e-8);
}

TEST(Mather, DiscretisationErrors) {
  EXPECT_THROW(discretize_lagrangian(MechanicalLagrangian::pendulum(), 4), ConfigError);
  EXPECT_THROW(discretize_lagrangian(MechanicalLagrangian::pendulum(), 16, -1.0), ConfigError);
  EXPECT_THROW(discretize_lagrangian(MechanicalLagrangian::free(3), 16), ConfigError);
  const std::vector<double> c2{0.0, 0.0};
  EXPECT_THROW(alpha_lax_oleinik(free16(), c2), DimensionError);
}
