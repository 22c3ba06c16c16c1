#pragma once

// Lagrange isotopies of circles in R^2 and of graphs in T*T^n: flux by
// quadrature, kappa upper bounds, shape witnesses and pb+ upper bounds.
//
// Flux pairing with a loop gamma is the integral of omega(d/ds, d/dt) over
// the cylinder Gamma(s, t) = psi_t(gamma(s)). Shrinking a centred circle of
// radius r0 to radius r1 gives pi (r0^2 - r1^2). Moving the graph of c0 to
// the graph of c1 gives -(c1 - c0) on the basis loops.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/detail/parallel.hpp"
#include "matherlab/error.hpp"
#include "matherlab/minimax.hpp"
#include "matherlab/phase.hpp"
#include "matherlab/region.hpp"

namespace matherlab {

/// u(theta) = sum over modes k of a_k cos(2 pi k.theta) + b_k sin(2 pi k.theta).
/// Modes are ordered by max-norm, so the modes of order M are a prefix of
/// those of order M + 1.
struct FourierPotential {
  std::size_t n = 1;
  int order = 0;
  std::vector<std::vector<int>> modes;
  std::vector<double> coefficients;  // (a_k, b_k) per mode

  FourierPotential() = default;
  FourierPotential(std::size_t dim, int M) : n(dim), order(M), modes(modes_for(dim, M)), coefficients(2 * modes.size(), 0.0) {}

  static std::vector<std::vector<int>> modes_for(std::size_t dim, int M) {
    if (dim < 1 || dim > 2) throw ConfigError("FourierPotential: only T^1 and T^2");
    std::vector<std::vector<int>> out;
    for (int m = 1; m <= M; ++m) {
      if (dim == 1) {
        out.push_back({m});
        continue;
      }
      for (int k1 = -m; k1 <= m; ++k1)
        for (int k2 = -m; k2 <= m; ++k2) {
          if (std::max(std::abs(k1), std::abs(k2)) != m) continue;
          if (k1 < 0 || (k1 == 0 && k2 <= 0)) continue;
          out.push_back({k1, k2});
        }
    }
    return out;
  }

  std::size_t size() const { return coefficients.size(); }

  double value(std::span<const double> theta) const {
    double u = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const double ph = phase(m, theta);
      u += coefficients[2 * m] * std::cos(ph) + coefficients[2 * m + 1] * std::sin(ph);
    }
    return u;
  }

  void gradient(std::span<const double> theta, std::span<double> g) const {
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const double ph = phase(m, theta);
      const double d = detail::kTwoPi * (-coefficients[2 * m] * std::sin(ph) + coefficients[2 * m + 1] * std::cos(ph));
      for (std::size_t i = 0; i < n; ++i) g[i] += d * modes[m][i];
    }
  }

  double phase(std::size_t m, std::span<const double> theta) const {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += modes[m][i] * theta[i];
    return detail::kTwoPi * s;
  }
};

struct LagrangeIsotopy {
  Chart chart = Chart::Plane;
  std::size_t dof = 1;
  std::size_t param_dim = 1;  // circle: 1; graph over T^n: n
  std::string family;
  std::function<State(double, std::span<const double>)> psi;
  nlohmann::ordered_json parameters;

  State at(double t, std::span<const double> s) const { return psi(t, s); }
};

/// A closed loop in the parameter domain, s in [0, 1].
struct Loop {
  std::string name;
  std::function<std::vector<double>(double)> at;
};

/// Star-shaped planar curve: centre + exp(rho(s)) (cos 2 pi s, sin 2 pi s) with
/// rho(s) = a0 + sum_k a_k cos(2 pi k s) + b_k sin(2 pi k s); a0 is fixed by the area.
struct StarCurve {
  std::array<double, 2> center{0.0, 0.0};
  std::vector<double> shape;  // (a_k, b_k), k = 1..M
  double area = kPiArea;
  double a0 = 0.0;

  static constexpr double kPiArea = 3.14159265358979323846;

  static StarCurve make(double area, std::array<double, 2> center, std::vector<double> shape) {
    StarCurve c;
    c.center = center;
    c.shape = std::move(shape);
    c.area = area;
    // area = (1/2) int r^2 dphi = pi int_0^1 exp(2 rho) ds
    constexpr int n = 512;
    double integral = 0.0;
    for (int k = 0; k < n; ++k) integral += std::exp(2.0 * c.log_radius_shape((k + 0.5) / n));
    integral /= n;
    c.a0 = 0.5 * std::log(area / (detail::kPi * integral));
    return c;
  }

  double log_radius_shape(double s) const {
    double r = 0.0;
    for (std::size_t k = 0; 2 * k + 1 < shape.size(); ++k) {
      const double ph = detail::kTwoPi * static_cast<double>(k + 1) * s;
      r += shape[2 * k] * std::cos(ph) + shape[2 * k + 1] * std::sin(ph);
    }
    return r;
  }

  double log_radius(double s) const { return a0 + log_radius_shape(s); }

  State point(double s) const {
    const double r = std::exp(log_radius(s));
    return {center[0] + r * std::cos(detail::kTwoPi * s), center[1] + r * std::sin(detail::kTwoPi * s)};
  }
};

namespace isotopies {

/// Centred circles with radius r0 + (r1 - r0) t.
inline LagrangeIsotopy circle_radius_path(double r0, double r1) {
  if (!(r0 > 0.0) || !(r1 > 0.0)) throw ConfigError("circle_radius_path: radii must be > 0");
  LagrangeIsotopy iso;
  iso.chart = Chart::Plane;
  iso.family = "circle radius path";
  iso.parameters = {{"r0", r0}, {"r1", r1}};
  iso.psi = [=](double t, std::span<const double> s) {
    const double r = r0 + (r1 - r0) * t;
    return State{r * std::cos(detail::kTwoPi * s[0]), r * std::sin(detail::kTwoPi * s[0])};
  };
  return iso;
}

/// From the centred circle of radius r0 to a star-shaped curve, interpolating
/// centre and log-radius linearly.
inline LagrangeIsotopy star_path(double r0, const StarCurve& target) {
  LagrangeIsotopy iso;
  iso.chart = Chart::Plane;
  iso.family = "star-shaped curve path";
  iso.parameters = {{"r0", r0},
                    {"center", target.center},
                    {"log_radius_mean", target.a0},
                    {"log_radius_fourier", target.shape},
                    {"area", target.area}};
  const double l0 = std::log(r0);
  iso.psi = [=](double t, std::span<const double> s) {
    const double lr = (1.0 - t) * l0 + t * target.log_radius(s[0]);
    const double r = std::exp(lr);
    return State{t * target.center[0] + r * std::cos(detail::kTwoPi * s[0]),
                 t * target.center[1] + r * std::sin(detail::kTwoPi * s[0])};
  };
  return iso;
}

/// theta -> (theta, c0 + t (c1 - c0) + t du(theta)) in T*T^n.
inline LagrangeIsotopy graph_path(std::vector<double> c0, std::vector<double> c1, FourierPotential u = {}) {
  const std::size_t n = c0.size();
  require_dim(c1.size(), n, "graph_path");
  if (u.modes.empty()) u = FourierPotential(n, 0);
  require_dim(u.n, n, "graph_path potential");
  LagrangeIsotopy iso;
  iso.chart = Chart::CotangentTorus;
  iso.dof = n;
  iso.param_dim = n;
  iso.family = "graph path";
  iso.parameters = {{"c0", c0}, {"c1", c1}, {"fourier_order", u.order}, {"coefficients", u.coefficients}};
  iso.psi = [=](double t, std::span<const double> theta) {
    State x(2 * n);
    std::vector<double> g(n);
    u.gradient(theta, g);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = theta[i];
      x[n + i] = c0[i] + t * (c1[i] - c0[i]) + t * g[i];
    }
    return x;
  };
  return iso;
}

/// psi_t = psi_0 of `base` for all t.
inline LagrangeIsotopy constant(const LagrangeIsotopy& base) {
  LagrangeIsotopy iso = base;
  iso.family = "constant (" + base.family + ")";
  auto psi = base.psi;
  iso.psi = [psi](double, std::span<const double> s) { return psi(0.0, s); };
  return iso;
}

/// a followed by b at double speed; requires a(1) = b(0).
inline LagrangeIsotopy concatenate(const LagrangeIsotopy& a, const LagrangeIsotopy& b) {
  if (a.chart != b.chart || a.param_dim != b.param_dim) throw DimensionError("concatenate: incompatible isotopies");
  LagrangeIsotopy iso = a;
  iso.family = a.family + " then " + b.family;
  iso.parameters = {{"first", a.parameters}, {"second", b.parameters}};
  auto pa = a.psi;
  auto pb = b.psi;
  iso.psi = [pa, pb](double t, std::span<const double> s) { return t <= 0.5 ? pa(2.0 * t, s) : pb(2.0 * t - 1.0, s); };
  return iso;
}

}  // namespace isotopies

/// Circle: the full circle. Graph over T^n: theta_i -> theta_i + s.
inline std::vector<Loop> basis_loops(const LagrangeIsotopy& iso) {
  std::vector<Loop> loops;
  if (iso.chart == Chart::Plane) {
    loops.push_back({"circle", [](double s) { return std::vector<double>{s}; }});
    return loops;
  }
  for (std::size_t i = 0; i < iso.param_dim; ++i) {
    const std::size_t n = iso.param_dim;
    loops.push_back({"theta" + std::to_string(i + 1), [i, n](double s) {
                       std::vector<double> th(n, 0.0);
                       th[i] = s;
                       return th;
                     }});
  }
  return loops;
}

struct FluxOptions {
  std::size_t t_panels = 8;
  std::size_t s_points = 64;
  double tol = 1e-9;  // relative agreement between successive refinements
  int max_refinements = 5;
};

struct FluxResult {
  std::vector<double> pairing;
  std::vector<double> error_estimate;
};

namespace detail {

inline double flux_quadrature(const LagrangeIsotopy& iso, const Loop& loop, std::size_t panels, std::size_t ns) {
  static constexpr double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
  static constexpr double gw[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
                                   0.2369268850561891};
  const double hs = 1e-3;
  const double width = 1.0 / static_cast<double>(panels);
  auto gamma = [&](double s, double t) { return iso.at(t, loop.at(s)); };
  auto diff4 = [](const State& m2, const State& m1, const State& p1, const State& p2, double h) {
    State d(m2.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h);
    return d;
  };
  std::vector<double> panel_sums(panels, 0.0);
  for (std::size_t p = 0; p < panels; ++p) {
    double acc = 0.0;
    for (int g = 0; g < 5; ++g) {
      const double local = 0.5 * (gx[g] + 1.0);
      const double t = (static_cast<double>(p) + local) * width;
      const double ht = std::min(1e-3, 0.2 * width * std::min(local, 1.0 - local));
      std::vector<double> row(ns);
      for (std::size_t k = 0; k < ns; ++k) {
        const double s = static_cast<double>(k) / static_cast<double>(ns);
        const State ds = diff4(gamma(s - 2 * hs, t), gamma(s - hs, t), gamma(s + hs, t), gamma(s + 2 * hs, t), hs);
        const State dt = diff4(gamma(s, t - 2 * ht), gamma(s, t - ht), gamma(s, t + ht), gamma(s, t + 2 * ht), ht);
        row[k] = symplectic_form(iso.chart, ds, dt);
      }
      acc += 0.5 * gw[g] * pairwise_sum(row) / static_cast<double>(ns);
    }
    panel_sums[p] = acc * width;
  }
  return pairwise_sum(panel_sums);
}

}  // namespace detail

/// Pairings of Flux(psi) with each loop; successive refinements (panels and
/// points doubled) must agree to tol.
inline FluxResult lagrange_flux(const LagrangeIsotopy& iso, const std::vector<Loop>& loops, const FluxOptions& opt = {}) {
  FluxResult out;
  for (const auto& loop : loops) {
    std::size_t panels = opt.t_panels, ns = opt.s_points;
    double prev = detail::flux_quadrature(iso, loop, panels, ns);
    bool done = false;
    for (int r = 0; r < opt.max_refinements; ++r) {
      panels *= 2;
      ns *= 2;
      const double cur = detail::flux_quadrature(iso, loop, panels, ns);
      const double diff = std::abs(cur - prev);
      prev = cur;
      if (diff <= opt.tol * (1.0 + std::abs(cur))) {
        out.pairing.push_back(cur);
        out.error_estimate.push_back(diff);
        done = true;
        break;
      }
    }
    if (!done) throw ConvergenceError("lagrange_flux: quadrature did not settle for loop " + loop.name, prev);
  }
  return out;
}

inline FluxResult lagrange_flux(const LagrangeIsotopy& iso, const FluxOptions& opt = {}) {
  return lagrange_flux(iso, basis_loops(iso), opt);
}

struct FamilySearchOptions {
  int order = 2;
  std::size_t multistarts = 8;
  std::uint64_t seed = 1;
  std::size_t samples = 256;  // points on the curve / per torus direction
  std::size_t max_evaluations = 4000;
  double init_scale = 0.1;
  double max_coefficient = 10.0;  // Fourier coefficients of graph families stay in this box
  std::size_t threads = 1;
};

struct KappaResult {
  double upper_bound = 0.0;
  std::string side = "upper bound";
  std::string family;
  std::vector<double> parameters;
  std::vector<double> flux;           // flux of the witness isotopy by quadrature
  std::vector<double> flux_target;
  LagrangeIsotopy witness;
};

namespace detail {

inline MinimizeResult multistart_nelder_mead(const std::function<double(std::span<const double>)>& f,
                                             std::vector<std::vector<double>> starts, std::size_t dim,
                                             const FamilySearchOptions& opt) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-opt.init_scale, opt.init_scale);
  while (starts.size() < opt.multistarts + 1) {
    std::vector<double> x(dim);
    for (double& v : x) v = u(rng);
    starts.push_back(std::move(x));
  }
  std::vector<MinimizeResult> results(starts.size());
  NelderMeadOptions nm;
  nm.max_evaluations = opt.max_evaluations;
  nm.initial_step = std::max(0.05, opt.init_scale);
  parallel_for(starts.size(), opt.threads, [&](std::size_t i) { results[i] = nelder_mead(f, starts[i], nm); });
  MinimizeResult best = results.front();
  for (const auto& r : results)
    if (r.value < best.value) best = r;
  return best;
}

inline bool outside_box(std::span<const double> a, double bound) {
  for (double v : a)
    if (std::abs(v) > bound) return true;
  return false;
}

inline std::vector<double> pad(std::vector<double> x, std::size_t n) {
  x.resize(n, 0.0);
  return x;
}

inline StarCurve star_from_parameters(double area, std::span<const double> p) {
  return StarCurve::make(area, {p[0], p[1]}, std::vector<double>(p.begin() + 2, p.end()));
}

inline double curve_max(const StarCurve& c, std::size_t samples, const std::function<double(std::span<const double>)>& g) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    const State x = c.point(static_cast<double>(k) / static_cast<double>(samples));
    m = std::max(m, g(x));
  }
  return m;
}

inline std::vector<std::vector<double>> torus_grid(std::size_t n, std::size_t samples) {
  std::vector<std::vector<double>> pts;
  if (n == 1) {
    for (std::size_t k = 0; k < samples; ++k) pts.push_back({static_cast<double>(k) / samples});
    return pts;
  }
  const auto per_axis = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(samples))));
  for (std::size_t a = 0; a < per_axis; ++a)
    for (std::size_t b = 0; b < per_axis; ++b)
      pts.push_back({static_cast<double>(a) / per_axis, static_cast<double>(b) / per_axis});
  return pts;
}

/// du on a fixed grid as a linear map of the Fourier coefficients.
struct GraphSampler {
  std::size_t n = 0, coeffs = 0;
  std::vector<std::vector<double>> grid;
  std::vector<double> design;  // (point, component) x coefficient

  GraphSampler(const FourierPotential& proto, std::size_t samples)
      : n(proto.n), coeffs(proto.size()), grid(torus_grid(proto.n, samples)) {
    design.assign(grid.size() * n * coeffs, 0.0);
    FourierPotential u = proto;
    std::vector<double> g(n);
    for (std::size_t c = 0; c < coeffs; ++c) {
      std::fill(u.coefficients.begin(), u.coefficients.end(), 0.0);
      u.coefficients[c] = 1.0;
      for (std::size_t p = 0; p < grid.size(); ++p) {
        u.gradient(grid[p], g);
        for (std::size_t i = 0; i < n; ++i) design[(p * n + i) * coeffs + c] = g[i];
      }
    }
  }

  /// (theta_p, cls + du(theta_p))
  void image(std::size_t p, std::span<const double> cls, std::span<const double> a, State& x) const {
    x.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = &design[(p * n + i) * coeffs];
      double v = cls[i];
      for (std::size_t c = 0; c < coeffs; ++c) v += row[c] * a[c];
      x[i] = grid[p][i];
      x[n + i] = v;
    }
  }
};

}  // namespace detail

/// Upper bound on kappa for a planar system over centred-circle base L of
/// radius r0: minimise max_L' H over star-shaped curves L' of area
/// pi r0^2 - flux_pairing. warm: parameters of a lower-order run.
inline KappaResult kappa_estimate_circle(const HamiltonianSystem& system, double r0, double flux_pairing,
                                         const FamilySearchOptions& opt = {}, const std::vector<double>* warm = nullptr) {
  if (system.chart() != Chart::Plane || system.dof() != 1) throw DimensionError("kappa_estimate_circle: planar system required");
  const double area = detail::kPi * r0 * r0 - flux_pairing;
  if (!(area > 0.0)) throw ConfigError("kappa_estimate_circle: flux leaves no enclosed area");
  const std::size_t dim = 2 + 2 * static_cast<std::size_t>(opt.order);
  auto H = [&](std::span<const double> x) { return system.energy(x); };
  auto objective = [&](std::span<const double> p) {
    return detail::curve_max(detail::star_from_parameters(area, p), opt.samples, H);
  };
  std::vector<std::vector<double>> starts{std::vector<double>(dim, 0.0)};
  if (warm) starts.insert(starts.begin(), detail::pad(*warm, dim));
  const auto best = detail::multistart_nelder_mead(objective, starts, dim, opt);

  KappaResult r;
  r.family = "star-shaped circles, fourier order " + std::to_string(opt.order);
  r.upper_bound = best.value;
  r.parameters = best.x;
  r.witness = isotopies::star_path(r0, detail::star_from_parameters(area, best.x));
  r.flux = lagrange_flux(r.witness).pairing;
  r.flux_target = {flux_pairing};
  if (std::abs(r.flux[0] - flux_pairing) > 1e-6)
    throw NumericalError("kappa_estimate_circle: witness flux misses the target");
  return r;
}

/// Upper bound on kappa for T*T^n over the zero section: minimise
/// max_theta H(theta, -c + du(theta)) over Fourier potentials u. The graph of
/// -c + du is reached from the zero section by an isotopy with flux c.
inline KappaResult kappa_estimate_graph(const HamiltonianSystem& system, std::span<const double> c,
                                        const FamilySearchOptions& opt = {}, const std::vector<double>* warm = nullptr) {
  if (system.chart() != Chart::CotangentTorus) throw DimensionError("kappa_estimate_graph: T*T^n system required");
  const std::size_t n = system.dof();
  require_dim(c.size(), n, "kappa_estimate_graph");
  FourierPotential proto(n, opt.order);
  const detail::GraphSampler sampler(proto, opt.samples);
  std::vector<double> target(c.begin(), c.end());
  std::vector<double> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = -target[i];
  auto objective = [&](std::span<const double> a) {
    if (detail::outside_box(a, opt.max_coefficient)) return std::numeric_limits<double>::infinity();
    State x;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < sampler.grid.size(); ++p) {
      sampler.image(p, cls, a, x);
      m = std::max(m, system.energy(x));
    }
    return m;
  };
  std::vector<std::vector<double>> starts{std::vector<double>(proto.size(), 0.0)};
  if (warm) starts.insert(starts.begin(), detail::pad(*warm, proto.size()));
  MinimizeResult best;
  if (proto.size() == 0) {
    best.x = {};
    best.value = objective(best.x);
  } else {
    best = detail::multistart_nelder_mead(objective, starts, proto.size(), opt);
  }

  KappaResult r;
  r.family = "graphs of -c + du, fourier order " + std::to_string(opt.order);
  r.upper_bound = best.value;
  r.parameters = best.x;
  FourierPotential u = proto;
  std::copy(best.x.begin(), best.x.end(), u.coefficients.begin());
  r.witness = isotopies::graph_path(std::vector<double>(n, 0.0), cls, u);
  r.flux = lagrange_flux(r.witness).pairing;
  r.flux_target = target;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(r.flux[i] - target[i]) > 1e-6) throw NumericalError("kappa_estimate_graph: witness flux misses the target");
  return r;
}

struct ShapeWitness {
  std::vector<double> parameters;
  double margin = 0.0;  // -max signed distance of the final Lagrangian to the region
  std::vector<double> flux;
  LagrangeIsotopy isotopy;
  std::vector<State> image;  // sampled points of psi_1(L)
};

/// Searches star-shaped curves for psi_1(L) inside `region` with margin delta,
/// where L is the centred circle of radius r0 and Flux(psi) - c = a (pairings
/// with the circle). Absence at the given budget is a valid answer.
inline std::optional<ShapeWitness> shape_witness_circle(const Region& region, double r0, double c_pairing,
                                                        double a_pairing, double delta = 1e-3,
                                                        const FamilySearchOptions& opt = {}) {
  const double flux = a_pairing + c_pairing;
  const double area = detail::kPi * r0 * r0 - flux;
  if (!(area > 0.0)) return std::nullopt;
  const std::size_t dim = 2 + 2 * static_cast<std::size_t>(opt.order);
  auto sd = [&](std::span<const double> x) { return region.signed_distance(x); };
  auto objective = [&](std::span<const double> p) {
    return detail::curve_max(detail::star_from_parameters(area, p), opt.samples, sd);
  };
  const auto best = detail::multistart_nelder_mead(objective, {std::vector<double>(dim, 0.0)}, dim, opt);
  if (!(best.value < -delta)) return std::nullopt;
  ShapeWitness w;
  w.parameters = best.x;
  w.margin = -best.value;
  const StarCurve curve = detail::star_from_parameters(area, best.x);
  w.isotopy = isotopies::star_path(r0, curve);
  w.flux = lagrange_flux(w.isotopy).pairing;
  if (std::abs(w.flux[0] - flux) > 1e-6) throw NumericalError("shape_witness_circle: witness flux misses the target");
  for (std::size_t k = 0; k < opt.samples; ++k) w.image.push_back(curve.point(static_cast<double>(k) / opt.samples));
  return w;
}

/// Graph family version: psi_1(0_T^n) = graph of -(a + c) + du.
inline std::optional<ShapeWitness> shape_witness_graph(const Region& region, std::span<const double> c,
                                                       std::span<const double> a, double delta = 1e-3,
                                                       const FamilySearchOptions& opt = {}) {
  const std::size_t n = c.size();
  require_dim(a.size(), n, "shape_witness_graph");
  FourierPotential proto(n, opt.order);
  const detail::GraphSampler sampler(proto, opt.samples);
  std::vector<double> cls(n);
  for (std::size_t i = 0; i < n; ++i) cls[i] = -(a[i] + c[i]);
  auto objective = [&](std::span<const double> p) {
    if (detail::outside_box(p, opt.max_coefficient)) return std::numeric_limits<double>::infinity();
    State x;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < sampler.grid.size(); ++k) {
      sampler.image(k, cls, p, x);
      m = std::max(m, region.signed_distance(x));
    }
    return m;
  };
  MinimizeResult best;
  if (proto.size() == 0) {
    best.value = objective(best.x);
  } else {
    best = detail::multistart_nelder_mead(objective, {std::vector<double>(proto.size(), 0.0)}, proto.size(), opt);
  }
  if (!(best.value < -delta)) return std::nullopt;
  ShapeWitness w;
  w.parameters = best.x;
  w.margin = -best.value;
  FourierPotential u = proto;
  std::copy(best.x.begin(), best.x.end(), u.coefficients.begin());
  w.isotopy = isotopies::graph_path(std::vector<double>(n, 0.0), cls, u);
  w.flux = lagrange_flux(w.isotopy).pairing;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(w.flux[i] - (a[i] + c[i])) > 1e-6) throw NumericalError("shape_witness_graph: witness flux misses the target");
  for (std::size_t k = 0; k < sampler.grid.size(); ++k) {
    State x;
    sampler.image(k, cls, best.x, x);
    w.image.push_back(std::move(x));
  }
  return w;
}

struct PbPlusResult {
  double upper_bound = 0.0;
  std::string side = "upper bound";
  int order = 0;
  std::vector<double> coefficients;
};

/// Upper bound on min over u of max over X of <c dtheta + du, X_H>, u in the
/// Fourier span of order M. Linear in the coefficients, so the softmax
/// continuation works on a convex problem. warm: coefficients of a
/// lower-order run.
inline PbPlusResult pb_plus_estimate(const HamiltonianSystem& system, const std::vector<State>& X,
                                     std::span<const double> c, int order, const SoftmaxOptions& opt = {},
                                     const std::vector<double>* warm = nullptr) {
  if (system.chart() != Chart::CotangentTorus) throw DimensionError("pb_plus_estimate: T*T^n system required");
  if (X.empty()) throw ConfigError("pb_plus_estimate: empty sample set");
  const std::size_t n = system.dof();
  require_dim(c.size(), n, "pb_plus_estimate");
  const FourierPotential proto(n, order);
  AffinePieces pieces;
  pieces.dim = proto.size();
  pieces.offset.resize(X.size());
  pieces.slope.assign(X.size() * pieces.dim, 0.0);
  for (std::size_t j = 0; j < X.size(); ++j) {
    require_dim(X[j].size(), 2 * n, "pb_plus_estimate sample");
    const State v = hamiltonian_vector_field(system, X[j]);
    pieces.offset[j] = detail::dot(c, std::span<const double>(v).first(n));
    for (std::size_t m = 0; m < proto.modes.size(); ++m) {
      double kv = 0.0;
      for (std::size_t i = 0; i < n; ++i) kv += proto.modes[m][i] * v[i];
      const double ph = proto.phase(m, X[j]);
      pieces.slope[j * pieces.dim + 2 * m] = -detail::kTwoPi * kv * std::sin(ph);
      pieces.slope[j * pieces.dim + 2 * m + 1] = detail::kTwoPi * kv * std::cos(ph);
    }
  }
  PbPlusResult r;
  r.order = order;
  if (pieces.dim == 0) {
    r.upper_bound = pieces.max(std::vector<double>{});
    return r;
  }
  std::vector<std::vector<double>> starts{std::vector<double>(pieces.dim, 0.0)};
  if (warm) starts.insert(starts.begin(), detail::pad(*warm, pieces.dim));
  const auto best = softmax_minimax(pieces, starts, opt);
  r.upper_bound = best.value;
  r.coefficients = best.x;
  return r;
}

/// Runs the orders in sequence, each warm-started from the previous one, so
/// the bounds are nonincreasing in the order.
inline std::vector<PbPlusResult> pb_plus_sweep(const HamiltonianSystem& system, const std::vector<State>& X,
                                               std::span<const double> c, const std::vector<int>& orders,
                                               const SoftmaxOptions& opt = {}) {
  std::vector<PbPlusResult> out;
  for (int M : orders) {
    const std::vector<double>* warm = out.empty() ? nullptr : &out.back().coefficients;
    out.push_back(pb_plus_estimate(system, X, c, M, opt, warm));
  }
  return out;
}

}  // namespace matherlab
