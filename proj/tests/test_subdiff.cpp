#include <cmath>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "matherlab/subdiff.hpp"

using namespace matherlab;

namespace {

SampledFunction abs1() {
  return SampledFunction(1, [](std::span<const double> x) { return std::abs(x[0]); }, 10.0, 1.0);
}

SampledFunction max2() {
  return SampledFunction(2, [](std::span<const double> x) { return std::max(x[0], x[1]); }, 10.0, 1.0);
}

ConvexPolytope interval(double lo, double hi) { return convex_hull({{lo}, {hi}}); }

}  // namespace

TEST(Subdiff, AbsAtZeroIsUnitInterval) {
  const std::vector<double> x{0.0};
  const auto est = clarke_subdifferential(abs1(), x, 1e-3, 256, 1, 1);
  EXPECT_LE(hausdorff_distance(est.hull, interval(-1.0, 1.0)), 1e-3);
  const auto [lo, hi] = est.hull.interval();
  EXPECT_NEAR(lo, -1.0, 1e-3);
  EXPECT_NEAR(hi, 1.0, 1e-3);
}

TEST(Subdiff, AwayFromKinkIsSingleton) {
  const std::vector<double> x{-1.0};
  const auto est = clarke_subdifferential(abs1(), x, 1e-3, 64, 2, 1);
  EXPECT_LE(hausdorff_distance(est.hull, interval(-1.0, -1.0)), 1e-6);
}

TEST(Subdiff, SmoothFunctionCollapsesWithRadius) {
  const auto f = SampledFunction(2, [](std::span<const double> x) { return 0.5 * (x[0] * x[0] + 3.0 * x[1] * x[1]); });
  gen::for_all(10, 61, [&](gen::Rng& rng, std::size_t) {
    const auto x = rng.vec(2, -2.0, 2.0);
    for (double radius : {1e-2, 1e-3}) {
      const auto est = clarke_subdifferential(f, x, radius, 128, 3, 1);
      const ConvexPolytope point = convex_hull({{x[0], 3.0 * x[1]}});
      // gradient is 3-Lipschitz
      EXPECT_LE(hausdorff_distance(est.hull, point), 3.0 * radius + 1e-6);
    }
  });
}

TEST(Subdiff, MaxAtDiagonalIsSegment) {
  const std::vector<double> x{0.0, 0.0};
  const auto est = clarke_subdifferential(max2(), x, 1e-3, 256, 4, 1);
  const ConvexPolytope seg = convex_hull({{1.0, 0.0}, {0.0, 1.0}});
  EXPECT_LE(hausdorff_distance(est.hull, seg), 1e-3);
  ASSERT_EQ(est.hull.vertices.size(), 2u);
}

TEST(Subdiff, LebourgWitnessOnOracles) {
  {
    // |x| on [-1, 2]: the mean-value subgradient is (2 - 1)/3 = 1/3 at the kink
    const std::vector<double> x{-1.0}, y{2.0};
    const auto w = lebourg_witness(abs1(), x, y);
    EXPECT_LE(w.residual, 1e-6);
    EXPECT_NEAR(w.point[0], 0.0, 1e-3);
    EXPECT_NEAR(w.subgradient[0], 1.0 / 3.0, 1e-6);
  }
  {
    const auto negabs = SampledFunction(1, [](std::span<const double> x) { return -std::abs(x[0]); }, 10.0, 1.0);
    // -|x| on [-1, 2]: (f(x) - f(y)) / (x - y) = -1/3
    const std::vector<double> x{-1.0}, y{2.0};
    const auto w = lebourg_witness(negabs, x, y);
    EXPECT_LE(w.residual, 1e-6);
    EXPECT_NEAR(w.subgradient[0], -1.0 / 3.0, 1e-6);
  }
  {
    const std::vector<double> x{-1.0, 0.0}, y{1.0, 0.5};
    const auto w = lebourg_witness(max2(), x, y);
    EXPECT_LE(w.residual, 1e-6);
    double lin = 0.0;
    for (std::size_t i = 0; i < 2; ++i) lin += w.subgradient[i] * (x[i] - y[i]);
    EXPECT_NEAR(lin, max2()(x) - max2()(y), 1e-6);
  }
}

TEST(Subdiff, LebourgOnSmoothFunctionsIsExactMeanValue) {
  const auto f = SampledFunction(1, [](std::span<const double> x) { return x[0] * x[0] * x[0]; });
  gen::for_all(5, 62, [&](gen::Rng& rng, std::size_t) {
    const std::vector<double> x{rng.uniform(-2.0, 0.0)}, y{rng.uniform(0.5, 2.0)};
    const auto w = lebourg_witness(f, x, y);
    EXPECT_LE(w.residual, 1e-6);
  });
}

TEST(Subdiff, DiniDerivativeOfKinks) {
  const std::vector<double> zero{0.0}, right{1.0}, left{-1.0};
  EXPECT_NEAR(dini_lower_derivative(abs1(), zero, right).value, 1.0, 1e-12);
  EXPECT_NEAR(dini_lower_derivative(abs1(), zero, left).value, 1.0, 1e-12);
  const auto negabs = SampledFunction(1, [](std::span<const double> x) { return -std::abs(x[0]); }, 10.0, 1.0);
  EXPECT_NEAR(dini_lower_derivative(negabs, zero, right).value, -1.0, 1e-12);
  EXPECT_THROW(dini_lower_derivative(abs1(), zero, right, 100.0), ConfigError);
}

TEST(Subdiff, DeterministicForSeed) {
  const std::vector<double> x{0.0, 0.0};
  const auto a = clarke_subdifferential(max2(), x, 1e-3, 64, 9, 1);
  const auto b = clarke_subdifferential(max2(), x, 1e-3, 64, 9, 3);
  EXPECT_EQ(a.gradients, b.gradients);
  EXPECT_EQ(a.hull.vertices, b.hull.vertices);
}

TEST(Subdiff, HullContainsItsPoints) {
  gen::for_all(100, 63, [](gen::Rng& rng, std::size_t) {
    const std::size_t m = static_cast<std::size_t>(rng.integer(1, 2));
    std::vector<Point> pts;
    const int count = rng.integer(1, 30);
    for (int k = 0; k < count; ++k) pts.push_back(rng.vec(m, -3.0, 3.0));
    const auto P = convex_hull(pts);
    for (const auto& p : pts) EXPECT_LE(distance_to(P, p), 1e-12);
    for (const auto& v : P.vertices) EXPECT_NE(std::find(pts.begin(), pts.end(), v), pts.end());
    EXPECT_NEAR(hausdorff_distance(P, convex_hull(P.vertices)), 0.0, 1e-12);
  });
}

TEST(Subdiff, HausdorffIsSymmetricAndDetectsContainment) {
  gen::for_all(50, 64, [](gen::Rng& rng, std::size_t) {
    std::vector<Point> a, b;
    for (int k = 0; k < 8; ++k) a.push_back(rng.vec(2, -1.0, 1.0));
    for (int k = 0; k < 8; ++k) b.push_back(rng.vec(2, -1.0, 1.0));
    const auto A = convex_hull(a), B = convex_hull(b);
    EXPECT_NEAR(hausdorff_distance(A, B), hausdorff_distance(B, A), 1e-12);
    const auto AB = convex_hull([&] {
      auto all = a;
      all.insert(all.end(), b.begin(), b.end());
      return all;
    }());
    EXPECT_TRUE(contained_in(A, AB, 1e-12));
    EXPECT_TRUE(contained_in(B, AB, 1e-12));
  });
}

TEST(Subdiff, HigherDimensionalHull) {
  const auto f = SampledFunction(3, [](std::span<const double> x) { return std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); },
                                 10.0, 1.0);
  const std::vector<double> x{0.0, 0.0, 0.0};
  const auto est = clarke_subdifferential(f, x, 1e-3, 2000, 5, 1);
  // the unit ball: every direction has support close to 1
  const std::vector<double> d{0.0, 0.6, 0.8};
  EXPECT_NEAR(est.hull.support(d), 1.0, 5e-2);
  EXPECT_LE(est.hull.support(d), 1.0 + 1e-9);
}

TEST(Subdiff, Errors) {
  const std::vector<double> x{0.0};
  EXPECT_THROW(clarke_subdifferential(abs1(), x, 0.0, 10, 1), ConfigError);
  EXPECT_THROW(clarke_subdifferential(abs1(), x, 1e-3, 0, 1), ConfigError);
  const std::vector<double> x2{0.0, 0.0};
  EXPECT_THROW(clarke_subdifferential(abs1(), x2, 1e-3, 10, 1), DimensionError);
}
