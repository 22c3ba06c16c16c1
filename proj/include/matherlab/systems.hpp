#pragma once

// Built-in Hamiltonian systems.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/phase.hpp"

#include <json.hpp>

namespace matherlab::systems {

using detail::kPi;
using detail::kTwoPi;

/// Quintic smoothstep on [0,1]: 0 -> 1 with vanishing first and second derivatives at the ends.
inline double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (6.0 * t - 15.0) + 10.0);
}

inline double smoothstep_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 30.0 * t * t * (1.0 - t) * (1.0 - t);
}

/// Even plateau function: 1 on [-K, K], 0 off [-K-1, K+1], monotone in between.
struct ChannelBump {
  double K = 2.0;

  double operator()(double s) const { return 1.0 - smoothstep(std::abs(s) - K); }
  double derivative(double s) const {
    const double d = -smoothstep_derivative(std::abs(s) - K);
    return s >= 0.0 ? d : -d;
  }
};

/// H(theta, I) = I1 I2 + eps * bump(I1) * sin(2 pi theta1) on T*T^2.
inline HamiltonianSystem channel(double eps, double K) {
  if (!(eps >= 0.0)) throw ConfigError("channel: eps must be >= 0");
  if (!(K > 0.0)) throw ConfigError("channel: K must be > 0");
  const ChannelBump phi{K};
  auto energy = [=](std::span<const double> x) {
    return x[2] * x[3] + eps * phi(x[2]) * std::sin(kTwoPi * x[0]);
  };
  auto gradient = [=](std::span<const double> x, std::span<double> g) {
    const double s = std::sin(kTwoPi * x[0]);
    g[0] = eps * phi(x[2]) * kTwoPi * std::cos(kTwoPi * x[0]);
    g[1] = 0.0;
    g[2] = x[3] + eps * phi.derivative(x[2]) * s;
    g[3] = x[2];
  };
  Splitting split;
  split.kinetic = [](std::span<const double> I) { return I[0] * I[1]; };
  split.kinetic_gradient = [](std::span<const double> I, std::span<double> g) {
    g[0] = I[1];
    g[1] = I[0];
  };
  split.potential_depends_on_momentum = true;
  split.potential_vanishes = eps == 0.0;
  HamiltonianSystem sys("channel", Chart::CotangentTorus, 2, energy, gradient, split);
  sys.with_parameter("eps", eps).with_parameter("K", K);
  return sys;
}

/// Radial profile of the annulus example: 2 - r^2 on [0,1], (r-2)^2 beyond.
struct AnnulusProfile {
  double operator()(double r) const { return r <= 1.0 ? 2.0 - r * r : (r - 2.0) * (r - 2.0); }
  double derivative(double r) const { return r <= 1.0 ? -2.0 * r : 2.0 * (r - 2.0); }
  /// h'(r)/r, finite at the origin.
  double derivative_over_r(double r) const { return r <= 1.0 ? -2.0 : 2.0 * (r - 2.0) / r; }
};

inline HamiltonianSystem annulus() {
  const AnnulusProfile h;
  auto energy = [=](std::span<const double> x) { return h(std::hypot(x[0], x[1])); };
  auto gradient = [=](std::span<const double> x, std::span<double> g) {
    const double k = h.derivative_over_r(std::hypot(x[0], x[1]));
    g[0] = k * x[0];
    g[1] = k * x[1];
  };
  return HamiltonianSystem("annulus", Chart::Plane, 1, energy, gradient);
}

/// H0(I) = I1 I2, the non-convex normal form.
inline HamiltonianSystem quadratic_normal_form() {
  auto energy = [](std::span<const double> x) { return x[2] * x[3]; };
  auto gradient = [](std::span<const double> x, std::span<double> g) {
    g[0] = 0.0;
    g[1] = 0.0;
    g[2] = x[3];
    g[3] = x[2];
  };
  Splitting split;
  split.kinetic = [](std::span<const double> I) { return I[0] * I[1]; };
  split.kinetic_gradient = [](std::span<const double> I, std::span<double> g) {
    g[0] = I[1];
    g[1] = I[0];
  };
  split.potential_depends_on_momentum = false;
  split.potential_vanishes = true;
  return HamiltonianSystem("quadratic", Chart::CotangentTorus, 2, energy, gradient, split);
}

/// H(q, p) = h(p) on T*T^n.
inline HamiltonianSystem integrable(std::string name, std::size_t n,
                                    std::function<double(std::span<const double>)> h,
                                    std::function<void(std::span<const double>, std::span<double>)> dh) {
  auto energy = [=](std::span<const double> x) { return h(x.subspan(n)); };
  auto gradient = [=](std::span<const double> x, std::span<double> g) {
    for (std::size_t i = 0; i < n; ++i) g[i] = 0.0;
    dh(x.subspan(n), g.subspan(n));
  };
  Splitting split;
  split.kinetic = h;
  split.kinetic_gradient = dh;
  split.potential_depends_on_momentum = false;
  split.potential_vanishes = true;
  return HamiltonianSystem(std::move(name), Chart::CotangentTorus, n, energy, gradient, split);
}

/// H = |I|^2 / 2.
inline HamiltonianSystem free_particle(std::size_t n) {
  return integrable(
      "free", n,
      [](std::span<const double> I) { return 0.5 * detail::dot(I, I); },
      [](std::span<const double> I, std::span<double> g) {
        for (std::size_t i = 0; i < I.size(); ++i) g[i] = I[i];
      });
}

/// Mechanical H = |p|^2/2 + U(q) on T*T^n with analytic potential gradient.
inline HamiltonianSystem mechanical(std::string name, std::size_t n,
                                    std::function<double(std::span<const double>)> U,
                                    std::function<void(std::span<const double>, std::span<double>)> dU) {
  auto energy = [=](std::span<const double> x) {
    return 0.5 * detail::dot(x.subspan(n), x.subspan(n)) + U(x.first(n));
  };
  auto gradient = [=](std::span<const double> x, std::span<double> g) {
    dU(x.first(n), g.first(n));
    for (std::size_t i = 0; i < n; ++i) g[n + i] = x[n + i];
  };
  Splitting split;
  split.kinetic = [](std::span<const double> p) { return 0.5 * detail::dot(p, p); };
  split.kinetic_gradient = [](std::span<const double> p, std::span<double> g) {
    for (std::size_t i = 0; i < p.size(); ++i) g[i] = p[i];
  };
  split.potential_depends_on_momentum = false;
  return HamiltonianSystem(std::move(name), Chart::CotangentTorus, n, energy, gradient, split);
}

/// H = p^2/2 + cos(2 pi q), Legendre dual of l = v^2/2 - cos(2 pi q).
inline HamiltonianSystem pendulum() {
  return mechanical(
      "pendulum", 1, [](std::span<const double> q) { return std::cos(kTwoPi * q[0]); },
      [](std::span<const double> q, std::span<double> g) { g[0] = -kTwoPi * std::sin(kTwoPi * q[0]); });
}

/// Bump that is 1 on [0,1] and 0 from 2 on.
inline double cutoff(double s) { return 1.0 - smoothstep(s - 1.0); }
inline double cutoff_derivative(double s) { return -smoothstep_derivative(s - 1.0); }

/// Integrable H(q,p) = h(p) on T*T^2 with h(p0) = 0, dh(p0).p0 = 0, |dh(p0)| = 1,
/// h(-p) = h(p) and support in the 2r-balls around +-p0.
struct PathologicalProfile {
  std::vector<double> p0;
  double r = 0.25;
  std::vector<double> slope;  // dh(p0), unit and orthogonal to p0

  PathologicalProfile(std::vector<double> p0_in, double r_in) : p0(std::move(p0_in)), r(r_in) {
    if (p0.size() != 2) throw ConfigError("pathological: p0 must be 2-dimensional");
    const double n0 = detail::norm2(p0);
    if (!(n0 > 0.0)) throw ConfigError("pathological: p0 must be nonzero");
    if (!(r > 0.0) || !(n0 > 2.0 * r))
      throw ConfigError("pathological: need r > 0 and 0 outside the closed 2r-ball around p0");
    slope = {-p0[1] / n0, p0[0] / n0};
  }

  double local(std::span<const double> p) const {
    const double d0 = p[0] - p0[0], d1 = p[1] - p0[1];
    const double dist = std::hypot(d0, d1);
    return (slope[0] * d0 + slope[1] * d1) * cutoff(dist / r);
  }

  void local_gradient(std::span<const double> p, std::span<double> g) const {
    const double d0 = p[0] - p0[0], d1 = p[1] - p0[1];
    const double dist = std::hypot(d0, d1);
    const double lin = slope[0] * d0 + slope[1] * d1;
    const double b = cutoff(dist / r);
    const double db = dist > 0.0 ? cutoff_derivative(dist / r) / (r * dist) : 0.0;
    g[0] = slope[0] * b + lin * db * d0;
    g[1] = slope[1] * b + lin * db * d1;
  }

  double operator()(std::span<const double> p) const {
    if (std::hypot(p[0] - p0[0], p[1] - p0[1]) < 2.0 * r) return local(p);
    if (std::hypot(p[0] + p0[0], p[1] + p0[1]) < 2.0 * r) {
      const double m[2] = {-p[0], -p[1]};
      return local(m);
    }
    return 0.0;
  }

  void gradient(std::span<const double> p, std::span<double> g) const {
    if (std::hypot(p[0] - p0[0], p[1] - p0[1]) < 2.0 * r) {
      local_gradient(p, g);
    } else if (std::hypot(p[0] + p0[0], p[1] + p0[1]) < 2.0 * r) {
      const double m[2] = {-p[0], -p[1]};
      local_gradient(m, g);
      g[0] = -g[0];
      g[1] = -g[1];
    } else {
      g[0] = g[1] = 0.0;
    }
  }
};

inline HamiltonianSystem pathological(std::vector<double> p0, double r) {
  const PathologicalProfile h(std::move(p0), r);
  auto sys = integrable(
      "pathological", 2, [h](std::span<const double> p) { return h(p); },
      [h](std::span<const double> p, std::span<double> g) { h.gradient(p, g); });
  sys.with_parameter("p0_1", h.p0[0]).with_parameter("p0_2", h.p0[1]).with_parameter("r", r);
  return sys;
}

/// Build a system from {"system": name, ...parameters}. Unknown keys are rejected.
inline HamiltonianSystem make_system(const nlohmann::json& cfg) {
  if (!cfg.is_object() || !cfg.contains("system")) throw ConfigError("system config needs a \"system\" key");
  const std::string name = cfg.at("system").get<std::string>();
  auto check_keys = [&](std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : cfg.items()) {
      if (key == "system") continue;
      bool ok = false;
      for (const char* a : allowed) ok = ok || key == a;
      if (!ok) throw ConfigError("unknown key '" + key + "' for system " + name);
    }
  };
  auto num = [&](const char* key, double fallback) {
    return cfg.contains(key) ? cfg.at(key).get<double>() : fallback;
  };
  if (name == "channel") {
    check_keys({"eps", "K"});
    return channel(num("eps", 0.05), num("K", 2.0));
  }
  if (name == "annulus") {
    check_keys({});
    return annulus();
  }
  if (name == "quadratic") {
    check_keys({});
    return quadratic_normal_form();
  }
  if (name == "pendulum") {
    check_keys({});
    return pendulum();
  }
  if (name == "free") {
    check_keys({"n"});
    return free_particle(static_cast<std::size_t>(num("n", 2)));
  }
  if (name == "pathological") {
    check_keys({"p0", "r"});
    std::vector<double> p0 = cfg.contains("p0") ? cfg.at("p0").get<std::vector<double>>()
                                                : std::vector<double>{1.0, 0.0};
    return pathological(std::move(p0), num("r", 0.25));
  }
  throw ConfigError("unknown system '" + name + "'");
}

}  // namespace matherlab::systems
