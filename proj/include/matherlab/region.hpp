#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <utility>

namespace matherlab {

/// A region of phase space given by a signed distance (negative inside).
/// Only the sign has to be exact; the magnitude is used as a clearance.
struct Region {
  std::string description;
  std::function<double(std::span<const double>)> signed_distance;

  bool contains(std::span<const double> x) const { return signed_distance(x) < 0.0; }
};

namespace regions {

/// {|I_i| < K} on T*T^n (component i of the momentum).
inline Region momentum_slab(std::size_t dof, std::size_t i, double K) {
  return {"|I" + std::to_string(i + 1) + "| < " + std::to_string(K),
          [=](std::span<const double> x) { return std::abs(x[dof + i]) - K; }};
}

/// {|I| < K} (Euclidean ball in the momentum factor).
inline Region momentum_ball(std::size_t dof, double K) {
  return {"|I| < " + std::to_string(K), [=](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t i = 0; i < dof; ++i) s += x[dof + i] * x[dof + i];
            return std::sqrt(s) - K;
          }};
}

/// Complement of a region.
inline Region complement(Region r) {
  auto sd = r.signed_distance;
  return {"not (" + r.description + ")", [sd](std::span<const double> x) { return -sd(x); }};
}

/// {r < R} in the plane.
inline Region disc(double R) {
  return {"r < " + std::to_string(R),
          [=](std::span<const double> x) { return std::hypot(x[0], x[1]) - R; }};
}

/// {R0 < r < R1} in the plane.
inline Region planar_annulus(double R0, double R1) {
  return {std::to_string(R0) + " < r < " + std::to_string(R1), [=](std::span<const double> x) {
            const double r = std::hypot(x[0], x[1]);
            return std::max(R0 - r, r - R1);
          }};
}

}  // namespace regions
}  // namespace matherlab
