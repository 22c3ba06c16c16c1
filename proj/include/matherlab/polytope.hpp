#pragma once

// Convex hulls of point samples in R^m and distances between them.
// Exact for m <= 2. For m >= 3 the vertex set is the union of maximisers of
// a fixed set of linear functionals, and distances use support functions
// over the same directions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/error.hpp"

namespace matherlab {

using Point = std::vector<double>;

struct ConvexPolytope {
  std::size_t dim = 0;
  std::vector<Point> vertices;  // m = 2: counter-clockwise

  bool empty() const { return vertices.empty(); }

  double support(std::span<const double> d) const {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : vertices) best = std::max(best, detail::dot(v, d));
    return best;
  }

  /// [min, max] of <v, d> over the polytope.
  std::pair<double, double> range(std::span<const double> d) const {
    std::vector<double> neg(d.begin(), d.end());
    for (double& x : neg) x = -x;
    return {-support(neg), support(d)};
  }

  /// 1-D interval summary.
  std::pair<double, double> interval() const {
    if (dim != 1) throw DimensionError("ConvexPolytope::interval: not one-dimensional");
    const double one = 1.0;
    return range(std::span<const double>(&one, 1));
  }

  std::vector<double> lower_corner() const {
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    for (const auto& v : vertices)
      for (std::size_t i = 0; i < dim; ++i) lo[i] = std::min(lo[i], v[i]);
    return lo;
  }

  std::vector<double> upper_corner() const {
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (const auto& v : vertices)
      for (std::size_t i = 0; i < dim; ++i) hi[i] = std::max(hi[i], v[i]);
    return hi;
  }
};

namespace detail {

inline std::vector<Point> sphere_directions(std::size_t m, std::size_t count) {
  std::vector<Point> dirs;
  for (std::size_t i = 0; i < m; ++i) {
    Point e(m, 0.0);
    e[i] = 1.0;
    dirs.push_back(e);
    e[i] = -1.0;
    dirs.push_back(e);
  }
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> g;
  while (dirs.size() < count) {
    Point d(m);
    for (double& x : d) x = g(rng);
    const double n = norm2(d);
    if (n < 1e-12) continue;
    for (double& x : d) x /= n;
    dirs.push_back(std::move(d));
  }
  return dirs;
}

inline double cross(const Point& o, const Point& a, const Point& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

inline double segment_distance(const Point& p, const Point& a, const Point& b) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy);
}

}  // namespace detail

inline constexpr std::size_t kHullDirections = 512;

inline ConvexPolytope convex_hull(const std::vector<Point>& points) {
  ConvexPolytope P;
  if (points.empty()) return P;
  P.dim = points.front().size();
  for (const auto& p : points) require_dim(p.size(), P.dim, "convex_hull");
  if (P.dim == 1) {
    auto [lo, hi] = std::minmax_element(points.begin(), points.end(), [](const Point& a, const Point& b) { return a[0] < b[0]; });
    P.vertices.push_back(*lo);
    if ((*hi)[0] != (*lo)[0]) P.vertices.push_back(*hi);
    return P;
  }
  if (P.dim == 2) {
    std::vector<Point> pts = points;
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() <= 2) {
      P.vertices = pts;
      return P;
    }
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
      while (k >= 2 && detail::cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
      hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
      while (k >= t && detail::cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) --k;
      hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    P.vertices = std::move(hull);
    return P;
  }
  std::vector<char> chosen(points.size(), 0);
  for (const auto& d : detail::sphere_directions(P.dim, kHullDirections)) {
    std::size_t best = 0;
    double val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double v = detail::dot(points[i], d);
      if (v > val) {
        val = v;
        best = i;
      }
    }
    chosen[best] = 1;
  }
  for (std::size_t i = 0; i < points.size(); ++i)
    if (chosen[i]) P.vertices.push_back(points[i]);
  return P;
}

inline double distance_to(const ConvexPolytope& P, const Point& p);

/// Drop vertices lying within tol of the hull of the remaining ones.
inline ConvexPolytope prune(ConvexPolytope P, double tol) {
  bool changed = true;
  while (changed && P.vertices.size() > 1) {
    changed = false;
    for (std::size_t i = 0; i < P.vertices.size(); ++i) {
      std::vector<Point> rest = P.vertices;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      if (distance_to(convex_hull(rest), P.vertices[i]) <= tol) {
        P.vertices = convex_hull(rest).vertices;
        changed = true;
        break;
      }
    }
  }
  return P;
}

/// Euclidean distance from p to the polytope (0 inside).
inline double distance_to(const ConvexPolytope& P, const Point& p) {
  require_dim(p.size(), P.dim, "distance_to");
  if (P.empty()) return std::numeric_limits<double>::infinity();
  if (P.dim == 1) {
    const auto [lo, hi] = P.interval();
    return std::max({0.0, lo - p[0], p[0] - hi});
  }
  if (P.dim == 2) {
    const auto& V = P.vertices;
    if (V.size() == 1) return std::hypot(p[0] - V[0][0], p[1] - V[0][1]);
    if (V.size() == 2) return detail::segment_distance(p, V[0], V[1]);
    bool inside = true;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < V.size(); ++i) {
      const auto& a = V[i];
      const auto& b = V[(i + 1) % V.size()];
      if (detail::cross(a, b, p) < 0.0) inside = false;
      best = std::min(best, detail::segment_distance(p, a, b));
    }
    return inside ? 0.0 : best;
  }
  double worst = 0.0;
  for (const auto& d : detail::sphere_directions(P.dim, kHullDirections))
    worst = std::max(worst, detail::dot(p, d) - P.support(d));
  return worst;
}

inline double hausdorff_distance(const ConvexPolytope& A, const ConvexPolytope& B) {
  require_dim(A.dim, B.dim, "hausdorff_distance");
  if (A.dim <= 2) {
    double h = 0.0;
    for (const auto& v : A.vertices) h = std::max(h, distance_to(B, v));
    for (const auto& v : B.vertices) h = std::max(h, distance_to(A, v));
    return h;
  }
  double h = 0.0;
  for (const auto& d : detail::sphere_directions(A.dim, kHullDirections))
    h = std::max(h, std::abs(A.support(d) - B.support(d)));
  return h;
}

/// inner lies within outer inflated by `inflate`.
inline bool contained_in(const ConvexPolytope& inner, const ConvexPolytope& outer, double inflate) {
  for (const auto& v : inner.vertices)
    if (distance_to(outer, v) > inflate) return false;
  return true;
}

}  // namespace matherlab
