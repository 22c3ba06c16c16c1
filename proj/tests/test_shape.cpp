#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "matherlab/region.hpp"
#include "matherlab/shape.hpp"
#include "matherlab/systems.hpp"

using namespace matherlab;

namespace {

constexpr double kPi = 3.141592653589793;

double shoelace_area(const StarCurve& c, int n = 4096) {
  double a = 0.0;
  for (int k = 0; k < n; ++k) {
    const State p = c.point(static_cast<double>(k) / n), q = c.point(static_cast<double>(k + 1) / n);
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * a;
}

FamilySearchOptions quick(int order = 1) {
  FamilySearchOptions o;
  o.order = order;
  o.multistarts = 3;
  o.samples = 64;
  o.max_evaluations = 1500;
  return o;
}

}  // namespace

TEST(Shape, CircleShrinkFlux) {
  const auto res = lagrange_flux(isotopies::circle_radius_path(4.0, 2.0));
  ASSERT_EQ(res.pairing.size(), 1u);
  EXPECT_NEAR(res.pairing[0], 12.0 * kPi, 1e-6);
  EXPECT_NEAR(lagrange_flux(isotopies::circle_radius_path(2.0, 4.0)).pairing[0], -12.0 * kPi, 1e-6);
}

TEST(Shape, CircleFluxIsAreaChange) {
  gen::for_all(10, 81, [](gen::Rng& rng, std::size_t) {
    const double r0 = rng.uniform(0.5, 4.0), r1 = rng.uniform(0.5, 4.0);
    EXPECT_NEAR(lagrange_flux(isotopies::circle_radius_path(r0, r1)).pairing[0], kPi * (r0 * r0 - r1 * r1), 1e-6);
  });
}

TEST(Shape, GraphFluxIsMinusClassChange) {
  gen::for_all(10, 82, [](gen::Rng& rng, std::size_t) {
    const auto c0 = rng.vec(2, -2.0, 2.0), c1 = rng.vec(2, -2.0, 2.0);
    FourierPotential u(2, 2);
    for (double& a : u.coefficients) a = rng.uniform(-0.1, 0.1);
    const auto res = lagrange_flux(isotopies::graph_path(c0, c1, u));
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR(res.pairing[i], -(c1[i] - c0[i]), 1e-8);
  });
}

TEST(Shape, FluxOfConstantAndConcatenatedIsotopies) {
  const auto a = isotopies::circle_radius_path(4.0, 3.0);
  const auto b = isotopies::circle_radius_path(3.0, 2.0);
  EXPECT_NEAR(lagrange_flux(isotopies::constant(a)).pairing[0], 0.0, 1e-9);
  const double fa = lagrange_flux(a).pairing[0], fb = lagrange_flux(b).pairing[0];
  EXPECT_NEAR(lagrange_flux(isotopies::concatenate(a, b)).pairing[0], fa + fb, 1e-6);
  EXPECT_THROW(isotopies::concatenate(a, isotopies::graph_path({0.0, 0.0}, {1.0, 0.0})), DimensionError);
}

TEST(Shape, StarPathFluxDependsOnlyOnArea) {
  gen::for_all(8, 83, [](gen::Rng& rng, std::size_t) {
    const double area = rng.uniform(2.0, 30.0);
    const auto curve = StarCurve::make(area, {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}, rng.vec(4, -0.2, 0.2));
    EXPECT_NEAR(shoelace_area(curve), area, 1e-4 * area);
    EXPECT_NEAR(lagrange_flux(isotopies::star_path(4.0, curve)).pairing[0], 16.0 * kPi - area, 1e-6);
  });
}

TEST(Shape, UnreachableToleranceIsConvergenceError) {
  FluxOptions o;
  o.tol = 1e-30;
  o.max_refinements = 1;
  EXPECT_THROW(lagrange_flux(isotopies::circle_radius_path(4.0, 2.0), o), ConvergenceError);
}

TEST(Shape, FourierModesFormPrefixes) {
  for (std::size_t n : {1u, 2u}) {
    const auto low = FourierPotential::modes_for(n, 2), high = FourierPotential::modes_for(n, 4);
    ASSERT_LE(low.size(), high.size());
    for (std::size_t k = 0; k < low.size(); ++k) EXPECT_EQ(low[k], high[k]);
  }
  EXPECT_EQ(FourierPotential::modes_for(2, 1).size(), 4u);
  EXPECT_THROW(FourierPotential(3, 1), ConfigError);
}

TEST(Shape, FourierGradientMatchesFiniteDifferences) {
  gen::for_all(30, 84, [](gen::Rng& rng, std::size_t) {
    FourierPotential u(2, 3);
    for (double& a : u.coefficients) a = rng.uniform(-1.0, 1.0);
    std::vector<double> th = rng.vec(2, 0.0, 1.0), g(2);
    u.gradient(th, g);
    for (std::size_t i = 0; i < 2; ++i) {
      auto tp = th, tm = th;
      tp[i] += 1e-6;
      tm[i] -= 1e-6;
      EXPECT_NEAR(g[i], (u.value(tp) - u.value(tm)) / 2e-6, 1e-5);
    }
    // periodic
    auto shifted = th;
    shifted[0] += 1.0;
    EXPECT_NEAR(u.value(shifted), u.value(th), 1e-12);
  });
}

TEST(Shape, KappaGraphFreeParticle) {
  // max of |-c + du|^2/2 is at least its mean |c|^2/2, reached by u = 0
  const auto sys = systems::free_particle(1);
  for (double c : {0.0, 0.5, -1.5}) {
    const std::vector<double> cv{c};
    const auto k = kappa_estimate_graph(sys, cv, quick());
    EXPECT_GE(k.upper_bound, 0.5 * c * c - 1e-12);
    EXPECT_LE(k.upper_bound, 0.5 * c * c + 1e-6);
    EXPECT_NEAR(k.flux[0], c, 1e-6);
    EXPECT_EQ(k.side, "upper bound");
  }
}

TEST(Shape, KappaCircleAnnulusShrink) {
  const auto sys = systems::annulus();
  const auto k = kappa_estimate_circle(sys, 4.0, 12.0 * kPi, quick());
  EXPECT_LE(k.upper_bound, systems::AnnulusProfile{}(2.0) + 1e-9);
  EXPECT_GE(k.upper_bound, 0.0);
  EXPECT_NEAR(k.flux[0], 12.0 * kPi, 1e-6);
  EXPECT_THROW(kappa_estimate_circle(sys, 4.0, 17.0 * kPi, quick()), ConfigError);
  EXPECT_THROW(kappa_estimate_circle(systems::pendulum(), 4.0, 0.0, quick()), DimensionError);
}

TEST(Shape, KappaIsMonotoneInOrderWithWarmStart) {
  const auto sys = systems::quadratic_normal_form();
  const std::vector<double> c{0.4, 0.3};
  const auto k1 = kappa_estimate_graph(sys, c, quick(1));
  const auto k2 = kappa_estimate_graph(sys, c, quick(2), &k1.parameters);
  EXPECT_LE(k2.upper_bound, k1.upper_bound + 1e-12);
}

TEST(Shape, CircleWitnessInsideAnnulus) {
  const auto region = regions::planar_annulus(std::sqrt(0.5), 2.0 + std::sqrt(1.5));
  const auto w = shape_witness_circle(region, 4.0, 0.0, 6.0 * 2.0 * kPi, 1e-3, quick(2));
  ASSERT_TRUE(w.has_value());
  EXPECT_GT(w->margin, 1e-3);
  EXPECT_NEAR(w->flux[0], 12.0 * kPi, 1e-6);
  for (const auto& p : w->image) EXPECT_TRUE(region.contains(p));
  // a curve of area 16 pi does not fit
  EXPECT_FALSE(shape_witness_circle(region, 4.0, 0.0, 0.0, 1e-3, quick(2)).has_value());
}

TEST(Shape, GraphWitnessInsideSlab) {
  const auto region = regions::momentum_ball(1, 1.0);
  const std::vector<double> c{0.2}, a{0.3};
  const auto w = shape_witness_graph(region, c, a, 1e-3, quick(1));
  ASSERT_TRUE(w.has_value());
  EXPECT_NEAR(w->flux[0], 0.5, 1e-6);
  for (const auto& p : w->image) EXPECT_NEAR(p[1], -0.5, 1e-6);
  const std::vector<double> far{1.5};
  EXPECT_FALSE(shape_witness_graph(region, c, far, 1e-3, quick(1)).has_value());
}

TEST(Shape, PbPlusIntegrableTorusEqualsFrequency) {
  gen::for_all(3, 85, [](gen::Rng& rng, std::size_t) {
    const std::vector<double> I0 = rng.vec(2, -1.0, 1.0);
    std::vector<State> X;
    for (const auto& th : detail::torus_grid(2, 256)) X.push_back({th[0], th[1], I0[0], I0[1]});
    const std::vector<double> c{1.0, 0.0};
    SoftmaxOptions o;
    o.multistarts = 2;
    // dh/dI1 is I1 for |I|^2/2 and I2 for I1 I2
    const auto free = pb_plus_sweep(systems::free_particle(2), X, c, {0, 1, 2, 4}, o);
    const auto quad = pb_plus_sweep(systems::quadratic_normal_form(), X, c, {0, 1, 2, 4}, o);
    for (std::size_t k = 0; k < free.size(); ++k) {
      EXPECT_NEAR(free[k].upper_bound, I0[0], 5e-2);
      EXPECT_NEAR(quad[k].upper_bound, I0[1], 5e-2);
      if (k > 0) {
        EXPECT_LE(free[k].upper_bound, free[k - 1].upper_bound + 1e-12);
        EXPECT_LE(quad[k].upper_bound, quad[k - 1].upper_bound + 1e-12);
      }
    }
  });
}

TEST(Shape, PbPlusChannelSegment) {
  // X = {theta1 = 0, I2 = 0, I1 in 1 +- 0.02}: <dtheta2, X_H> = I1 on X
  const auto sys = systems::channel(0.05, 2.0);
  std::vector<State> X;
  for (int a = 0; a < 32; ++a)
    for (int b = 0; b <= 4; ++b) X.push_back({0.0, a / 32.0, 0.98 + 0.01 * b, 0.0});
  const std::vector<double> c{0.0, 1.0};
  SoftmaxOptions o;
  o.multistarts = 2;
  const auto sweep = pb_plus_sweep(sys, X, c, {0, 1, 2}, o);
  EXPECT_NEAR(sweep.front().upper_bound, 1.02, 1e-12);
  for (const auto& r : sweep) EXPECT_NEAR(r.upper_bound, 1.02, 1e-3);
}

TEST(Shape, PbPlusErrors) {
  const std::vector<double> c{1.0};
  EXPECT_THROW(pb_plus_estimate(systems::pendulum(), {}, c, 1), ConfigError);
  EXPECT_THROW(pb_plus_estimate(systems::annulus(), {{1.0, 0.0}}, c, 1), DimensionError);
}
