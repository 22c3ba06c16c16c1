#pragma once

// Nonsmooth calculus by sampling: lower Dini derivatives, Clarke
// subdifferentials by gradient sampling, Lebourg mean-value witnesses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/detail/parallel.hpp"
#include "matherlab/error.hpp"
#include "matherlab/polytope.hpp"

namespace matherlab {

/// Locally Lipschitz f on a box.
struct SampledFunction {
  std::size_t dim = 1;
  std::function<double(std::span<const double>)> f;
  std::function<void(std::span<const double>, std::span<double>)> gradient;  // optional
  std::vector<double> box_lo, box_hi;
  double lipschitz = std::numeric_limits<double>::infinity();

  SampledFunction() = default;
  SampledFunction(std::size_t m, std::function<double(std::span<const double>)> fn, double box = 10.0,
                  double lip = std::numeric_limits<double>::infinity())
      : dim(m), f(std::move(fn)), box_lo(m, -box), box_hi(m, box), lipschitz(lip) {}

  SampledFunction& with_gradient(std::function<void(std::span<const double>, std::span<double>)> g) {
    gradient = std::move(g);
    return *this;
  }

  double operator()(std::span<const double> x) const {
    require_dim(x.size(), dim, "SampledFunction");
    return f(x);
  }

  bool in_box(std::span<const double> x) const {
    for (std::size_t i = 0; i < dim; ++i)
      if (x[i] < box_lo[i] || x[i] > box_hi[i]) return false;
    return true;
  }

  /// Analytic gradient, or central differences with step 1e-6 (1 + |x|).
  Point grad(std::span<const double> x) const {
    Point g(dim);
    if (gradient) {
      gradient(x, g);
      return g;
    }
    const double h = fd_step(x);
    Point y(x.begin(), x.end());
    for (std::size_t i = 0; i < dim; ++i) {
      const double keep = y[i];
      y[i] = keep + h;
      const double fp = f(y);
      y[i] = keep - h;
      const double fm = f(y);
      y[i] = keep;
      g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
  }

  static double fd_step(std::span<const double> x) { return 1e-6 * (1.0 + detail::norm2(x)); }

  /// Largest secant slope over random pairs in the box divided by the
  /// declared constant (<= 1.05 validates it).
  double lipschitz_ratio(std::size_t pairs, std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    Point a(dim), b(dim);
    for (std::size_t k = 0; k < pairs; ++k) {
      for (std::size_t i = 0; i < dim; ++i) {
        a[i] = box_lo[i] + (box_hi[i] - box_lo[i]) * u(rng);
        b[i] = box_lo[i] + (box_hi[i] - box_lo[i]) * u(rng);
      }
      Point d(dim);
      for (std::size_t i = 0; i < dim; ++i) d[i] = a[i] - b[i];
      const double n = detail::norm2(d);
      if (n > 0.0) worst = std::max(worst, std::abs(f(a) - f(b)) / n);
    }
    return worst / lipschitz;
  }
};

struct DiniResult {
  double value = 0.0;
  double tau = 0.0;  // step achieving the minimum
};

/// min over tau in {tau0, tau0/2, ...} (levels values) of (f(x + tau v) - f(x)) / tau.
inline DiniResult dini_lower_derivative(const SampledFunction& f, std::span<const double> x,
                                        std::span<const double> v, double tau0 = 1e-2, int levels = 20) {
  require_dim(x.size(), f.dim, "dini_lower_derivative");
  require_dim(v.size(), f.dim, "dini_lower_derivative direction");
  if (!(tau0 > 0.0) || levels < 1) throw ConfigError("dini_lower_derivative: bad step schedule");
  const double fx = f(x);
  DiniResult r{std::numeric_limits<double>::infinity(), tau0};
  Point y(f.dim);
  double tau = tau0;
  for (int k = 0; k < levels; ++k, tau *= 0.5) {
    for (std::size_t i = 0; i < f.dim; ++i) y[i] = x[i] + tau * v[i];
    if (!f.in_box(y)) throw ConfigError("dini_lower_derivative: step schedule leaves the box");
    const double q = (f(y) - fx) / tau;
    if (q < r.value) r = {q, tau};
  }
  return r;
}

struct ClarkeEstimate {
  ConvexPolytope hull;          // at radius
  ConvexPolytope refined;       // at radius / 2, same seed
  std::vector<Point> gradients; // sampled limiting gradients at radius
  std::vector<double> box_lo, box_hi;  // intersection of the bounding boxes of both hulls
  double radius = 0.0;
  std::size_t samples = 0;
  std::size_t skipped = 0;
  std::uint64_t seed = 0;
};

namespace detail {

/// n points uniform in the unit ball of R^m.
inline std::vector<Point> unit_ball_samples(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> out;
  out.reserve(n);
  while (out.size() < n) {
    Point d(m);
    for (double& x : d) x = g(rng);
    const double len = norm2(d);
    if (len < 1e-12) continue;
    const double r = std::pow(u(rng), 1.0 / static_cast<double>(m));
    for (double& x : d) x *= r / len;
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<Point> sample_gradients(const SampledFunction& f, std::span<const double> x, double radius,
                                           const std::vector<Point>& unit, std::size_t threads, std::size_t& skipped) {
  std::vector<std::optional<Point>> slots(unit.size());
  parallel_for(unit.size(), threads, [&](std::size_t k) {
    Point y(f.dim);
    for (std::size_t i = 0; i < f.dim; ++i) y[i] = x[i] + radius * unit[k][i];
    if (!f.in_box(y)) return;
    Point g;
    try {
      g = f.grad(y);
    } catch (const std::exception&) {
      return;
    }
    if (!all_finite(g)) return;
    if (std::isfinite(f.lipschitz) && norm2(g) > 10.0 * f.lipschitz) return;
    slots[k] = std::move(g);
  });
  std::vector<Point> out;
  skipped = 0;
  for (auto& s : slots) {
    if (s) {
      out.push_back(std::move(*s));
    } else {
      ++skipped;
    }
  }
  return out;
}

}  // namespace detail

/// Gradient sampling: n uniform points in the radius-ball around x, hull of
/// their gradients. The refinement reuses the same unit samples at radius/2.
inline ClarkeEstimate clarke_subdifferential(const SampledFunction& f, std::span<const double> x, double radius,
                                             std::size_t n_samples, std::uint64_t seed, std::size_t threads = 1) {
  require_dim(x.size(), f.dim, "clarke_subdifferential");
  if (!(radius > 0.0)) throw ConfigError("clarke_subdifferential: radius must be > 0");
  if (n_samples == 0) throw ConfigError("clarke_subdifferential: need samples");
  const auto unit = detail::unit_ball_samples(f.dim, n_samples, seed);
  ClarkeEstimate est;
  est.radius = radius;
  est.samples = n_samples;
  est.seed = seed;
  est.gradients = detail::sample_gradients(f, x, radius, unit, threads, est.skipped);
  if (est.gradients.empty()) throw NumericalError("clarke_subdifferential: every gradient sample failed");
  est.hull = prune(convex_hull(est.gradients), 1e-8);
  std::size_t skipped_refined = 0;
  const auto refined = detail::sample_gradients(f, x, 0.5 * radius, unit, threads, skipped_refined);
  est.refined = convex_hull(refined);
  est.box_lo = est.hull.lower_corner();
  est.box_hi = est.hull.upper_corner();
  if (!est.refined.empty()) {
    const auto lo = est.refined.lower_corner();
    const auto hi = est.refined.upper_corner();
    for (std::size_t i = 0; i < f.dim; ++i) {
      est.box_lo[i] = std::max(est.box_lo[i], lo[i]);
      est.box_hi[i] = std::min(est.box_hi[i], hi[i]);
    }
  }
  return est;
}

struct LebourgWitness {
  double t = 0.0;        // point is x + t (y - x)
  Point point;
  Point subgradient;     // element of the sampled hull closest to the mean-value identity
  double residual = std::numeric_limits<double>::infinity();
};

/// Searches [x, y] for a point whose sampled Clarke set contains some v* with
/// <v*, x - y> = f(x) - f(y). The residual is the distance of f(x) - f(y) to
/// the range of <v, x - y> over the sampled set.
inline LebourgWitness lebourg_witness(const SampledFunction& f, std::span<const double> x, std::span<const double> y,
                                      std::size_t grid = 1000, std::uint64_t seed = 1) {
  require_dim(x.size(), f.dim, "lebourg_witness");
  require_dim(y.size(), f.dim, "lebourg_witness");
  if (grid < 2) throw ConfigError("lebourg_witness: grid must have >= 2 points");
  const std::size_t m = f.dim;
  Point dir(m);
  for (std::size_t i = 0; i < m; ++i) dir[i] = x[i] - y[i];
  const double len = detail::norm2(dir);
  const double delta = f(x) - f(y);
  auto at = [&](double t) {
    Point z(m);
    for (std::size_t i = 0; i < m; ++i) z[i] = x[i] - t * dir[i];
    return z;
  };
  auto gap = [&](double t) { return detail::dot(f.grad(at(t)), dir) - delta; };

  auto evaluate = [&](double t) {
    LebourgWitness w;
    w.t = t;
    w.point = at(t);
    const double radius = std::max(10.0 * SampledFunction::fd_step(w.point), 1e-9 * (1.0 + len));
    const auto est = clarke_subdifferential(f, w.point, radius, 64, seed);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const Point* vlo = nullptr;
    const Point* vhi = nullptr;
    for (const auto& v : est.hull.vertices) {
      const double s = detail::dot(v, dir);
      if (s < lo) {
        lo = s;
        vlo = &v;
      }
      if (s > hi) {
        hi = s;
        vhi = &v;
      }
    }
    w.residual = std::max({0.0, lo - delta, delta - hi});
    if (delta <= lo) {
      w.subgradient = *vlo;
    } else if (delta >= hi) {
      w.subgradient = *vhi;
    } else {
      const double s = (delta - lo) / (hi - lo);
      w.subgradient.resize(m);
      for (std::size_t i = 0; i < m; ++i) w.subgradient[i] = (1.0 - s) * (*vlo)[i] + s * (*vhi)[i];
    }
    return w;
  };

  std::vector<double> g(grid);
  for (std::size_t k = 0; k < grid; ++k) g[k] = gap(static_cast<double>(k) / static_cast<double>(grid - 1));

  LebourgWitness best;
  std::size_t best_k = 0;
  double best_abs = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid; ++k) {
    if (std::abs(g[k]) < best_abs) {
      best_abs = std::abs(g[k]);
      best_k = k;
    }
  }
  // first sign change, refined by bisection
  for (std::size_t k = 0; k + 1 < grid; ++k) {
    if (g[k] == 0.0 || (g[k] < 0.0) == (g[k + 1] < 0.0)) continue;
    double a = static_cast<double>(k) / static_cast<double>(grid - 1);
    double b = static_cast<double>(k + 1) / static_cast<double>(grid - 1);
    double ga = g[k];
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
      const double mid = 0.5 * (a + b);
      const double gm = gap(mid);
      if (gm == 0.0) {
        a = b = mid;
        break;
      }
      if ((gm < 0.0) == (ga < 0.0)) {
        a = mid;
        ga = gm;
      } else {
        b = mid;
      }
    }
    best = evaluate(0.5 * (a + b));
    break;
  }
  const LebourgWitness grid_best = evaluate(static_cast<double>(best_k) / static_cast<double>(grid - 1));
  if (grid_best.residual < best.residual) best = grid_best;
  return best;
}

inline nlohmann::ordered_json polytope_to_json(const ConvexPolytope& P) {
  nlohmann::ordered_json j;
  j["dim"] = P.dim;
  j["vertices"] = P.vertices;
  if (P.dim == 1 && !P.empty()) {
    const auto [lo, hi] = P.interval();
    j["interval"] = {lo, hi};
  }
  if (P.dim == 2 && P.vertices.size() == 2) j["segment"] = P.vertices;
  return j;
}

}  // namespace matherlab
