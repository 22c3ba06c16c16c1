#pragma once

// End-to-end experiments: the superconductivity channel, the planar annulus,
// the pendulum alpha-function and the integrable pathological example. Each
// run returns a ScenarioReport whose rows carry targets and tolerances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/detail/parallel.hpp"
#include "matherlab/error.hpp"
#include "matherlab/integrate.hpp"
#include "matherlab/mather.hpp"
#include "matherlab/measure.hpp"
#include "matherlab/period.hpp"
#include "matherlab/phase.hpp"
#include "matherlab/region.hpp"
#include "matherlab/report.hpp"
#include "matherlab/shape.hpp"
#include "matherlab/subdiff.hpp"
#include "matherlab/systems.hpp"

namespace matherlab {

namespace detail {

/// Reads known keys from a JSON object and rejects the rest.
class ConfigReader {
 public:
  ConfigReader(const nlohmann::json& j, std::string scope) : j_(j), scope_(std::move(scope)) {
    if (!j_.is_object()) throw ConfigError(scope_ + ": config must be a JSON object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(scope_ + ": bad value for '" + key + "': " + e.what());
    }
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!used_.count(key)) throw ConfigError(scope_ + ": unknown key '" + key + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string scope_;
  std::set<std::string> used_;
};

inline double identity_residual(const OccupationMeasure& mu, const HamiltonianSystem& sys, std::vector<double> c) {
  const ClosedOneForm eta =
      sys.chart() == Chart::CotangentTorus ? ClosedOneForm::torus(c) : ClosedOneForm::plane(c);
  const double lhs = action_with_form(mu, sys, eta);
  double rhs = action_of_measure(mu, sys);
  if (!mu.winding_rate) throw Error("identity_residual: measure has no winding rate");
  for (std::size_t i = 0; i < c.size(); ++i) rhs += c[i] * (*mu.winding_rate)[i];
  return std::abs(lhs - rhs);
}

}  // namespace detail

// ---------------------------------------------------------------- channel

struct ChannelConfig {
  double eps = 0.05;
  double K = 2.0;
  double T = 500.0;        // horizon of the channel and near-channel orbits
  double dt = 1e-3;
  std::size_t n_orbits = 100;
  double orbit_T = 100.0;  // horizon of the random orbits
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  static ChannelConfig from_json(const nlohmann::json& j) { return from_json(j, ChannelConfig{}); }

  static ChannelConfig from_json(const nlohmann::json& j, ChannelConfig c) {
    detail::ConfigReader r(j, "channel");
    r.read("eps", c.eps);
    r.read("K", c.K);
    r.read("T", c.T);
    r.read("dt", c.dt);
    r.read("n_orbits", c.n_orbits);
    r.read("orbit_T", c.orbit_T);
    r.read("seed", c.seed);
    r.read("threads", c.threads);
    r.finish();
    return c;
  }

  nlohmann::ordered_json to_json() const {
    return {{"eps", eps}, {"K", K}, {"T", T}, {"dt", dt}, {"n_orbits", n_orbits}, {"orbit_T", orbit_T}, {"seed", seed}};
  }

  void validate() const {
    if (!(eps > 0.0)) throw ConfigError("channel: eps must be > 0");
    if (!(K >= 1.0)) throw ConfigError("channel: K must be >= 1");
    if (!(dt > 0.0) || !(T >= dt) || !(orbit_T >= dt)) throw ConfigError("channel: need dt > 0 and horizons >= dt");
    if (T < 2.0 * (K + 0.5) / (detail::kTwoPi * eps)) throw ConfigError("channel: T too short to observe the escape");
  }
};

/// Time for the channel orbit through I1 = 0 to reach |I1| = level:
/// the integral of dI / (2 pi eps bump(I)) over [0, level], composite Simpson.
inline double channel_escape_time_oracle(double eps, double K, double level, int panels = 4000) {
  if (!(level >= 0.0) || !(level < K + 1.0)) throw ConfigError("escape oracle: level must lie in [0, K + 1)");
  const systems::ChannelBump phi{K};
  auto g = [&](double I) { return 1.0 / (detail::kTwoPi * eps * phi(I)); };
  const double h = level / panels;
  double s = g(0.0) + g(level);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4.0 : 2.0) * g(k * h);
  return s * h / 3.0;
}

/// Drift functional: (bump(I1) - I1 bump'(I1)) sin(2 pi theta1).
inline double channel_drift_functional(const OccupationMeasure& mu, double K) {
  const systems::ChannelBump phi{K};
  return std::abs(mu.expectation([&](std::span<const double> x) {
    return (phi(x[2]) - x[2] * phi.derivative(x[2])) * std::sin(detail::kTwoPi * x[0]);
  }));
}

inline ScenarioReport run_channel(const ChannelConfig& cfg) {
  cfg.validate();
  using namespace sources;
  ScenarioReport rep;
  rep.scenario = "channel";
  rep.parameters = cfg.to_json();
  rep.parameters["bump"] = "1 - smoothstep5(|s| - K)";
  const auto sys = systems::channel(cfg.eps, cfg.K);
  IntegrateOptions iopt;
  iopt.dt = cfg.dt;
  const systems::ChannelBump phi{cfg.K};

  // initial velocity on the channel
  const State origin{0.0, 0.0, 0.0, 0.0};
  const State v0 = hamiltonian_vector_field(sys, origin);
  rep.near("dI1/dt at the origin", v0[2], -detail::kTwoPi * cfg.eps, 1e-12, kPublished);

  // escape along the channel orbit
  const Trajectory channel_orbit = integrate(sys, origin, cfg.T, iopt);
  const double t_K = channel_escape_time_oracle(cfg.eps, cfg.K, cfg.K);
  const auto esc = detect_escape(channel_orbit, regions::complement(regions::momentum_slab(2, 0, cfg.K)), &sys, iopt);
  rep.relative("first exit time from |I1| < K", esc ? esc->time : INFINITY, t_K, 1e-2, kOracle);
  const double level = cfg.K + 0.5;
  const double t_ramp = channel_escape_time_oracle(cfg.eps, cfg.K, level);
  const auto esc2 = detect_escape(channel_orbit, regions::complement(regions::momentum_slab(2, 0, level)), &sys, iopt);
  rep.relative("first time |I1| = K + 1/2 (inside the ramp)", esc2 ? esc2->time : INFINITY, t_ramp, 1e-2, kOracle);

  // integrable limit
  {
    const auto flat = systems::channel(0.0, cfg.K);
    const State x{0.3, 0.7, 0.4, -0.25};
    const Trajectory tr = integrate(flat, x, 100.0, iopt);
    double dev = 0.0;
    for (const auto& z : tr.lifted) dev = std::max({dev, std::abs(z[2] - x[2]), std::abs(z[3] - x[3])});
    rep.at_most("eps = 0: max |I(t) - I(0)| over T = 100", dev, 1e-9, kDefinition);
  }

  // random orbits in the plateau
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<State> starts(cfg.n_orbits);
  for (auto& s : starts) {
    const double th1 = unit(rng), th2 = unit(rng);
    const double I1 = (2.0 * unit(rng) - 1.0) * cfg.K * (1.0 - 1e-9);
    const double I2 = unit(rng) - 0.5;
    s = {th1, th2, I1, I2};
  }
  const auto orbits = integrate_batch(sys, starts, cfg.orbit_T, iopt, cfg.threads);
  // energy conservation gives eps |bump sin - sin0| = |I2| |I1(t) - I1(0)|, and I1
  // never crosses +-(K + 1), so (2K + 1) / eps is the sharp constant
  std::size_t violations = 0, violations_sharp = 0, explained = 0;
  double worst_ratio = 0.0, worst_drift = 0.0;
  for (const auto& tr : orbits) {
    const State x0 = tr.point(0);
    const double s0 = std::sin(detail::kTwoPi * x0[0]);
    const double slack = 10.0 * tr.max_energy_drift() / cfg.eps;
    const double bound = 2.0 * cfg.K / cfg.eps * std::abs(x0[3]) + slack;
    const double sharp = (2.0 * cfg.K + 1.0) / cfg.eps * std::abs(x0[3]) + slack;
    worst_drift = std::max(worst_drift, tr.max_energy_drift());
    bool bad = false, bad_sharp = false;
    double travel = 0.0;
    for (const auto& z : tr.lifted) {
      const double d = std::abs(phi(z[2]) * std::sin(detail::kTwoPi * z[0]) - s0);
      bad = bad || d > bound;
      bad_sharp = bad_sharp || d > sharp;
      travel = std::max(travel, std::abs(z[2] - x0[2]));
      if (bound > 0.0) worst_ratio = std::max(worst_ratio, d / bound);
    }
    violations += bad ? 1 : 0;
    violations_sharp += bad_sharp ? 1 : 0;
    explained += bad && travel > 2.0 * cfg.K ? 1 : 0;
  }
  rep.at_most("orbits violating the sin(2 pi theta1) estimate, constant 2K/eps", static_cast<double>(violations), 0.0,
              kPublished);
  rep.at_most("largest |deviation| / bound over the random orbits", worst_ratio, 1.0, kPublished);
  rep.at_most("orbits violating the estimate, constant (2K + 1)/eps", static_cast<double>(violations_sharp), 0.0,
              kOracle);
  rep.holds("every violating orbit has |I1(t) - I1(0)| > 2K", explained == violations, kOracle);
  rep.at_most("max energy drift over the random orbits", worst_drift, 1e-6, kDefinition);
  rep.at_most("orbit-measure identity residual (random orbit 1)",
              detail::identity_residual(occupation_measure(orbits.front()), sys, {0.3, -0.7}), 1e-6, kDefinition);

  // exact channel orbits: late windows
  const std::vector<State> channel_starts{{0.0, 0.3, 0.0, 0.0}, {0.5, 0.3, 1.0, 0.0}, {0.0, 0.6, -1.5, 0.0}};
  const auto channel_orbits = integrate_batch(sys, channel_starts, cfg.T, iopt, cfg.threads);
  double drift_fn = 0.0, action = 0.0, clearance = INFINITY;
  for (const auto& tr : channel_orbits) {
    const auto late = occupation_measure(tr, 0.5 * cfg.T, cfg.T);
    drift_fn = std::max(drift_fn, channel_drift_functional(late, cfg.K));
    action = std::max(action, std::abs(action_of_measure(occupation_measure(tr), sys)));
    clearance = std::min(clearance, support_clearance(late, regions::momentum_slab(2, 0, cfg.K)));
  }
  rep.at_most("drift functional of late-window channel measures", drift_fn, 1e-2, kPublished);
  rep.at_most("action of channel-orbit measures", action, 1e-8, kPublished);
  rep.above("support clearance of late windows from |I1| < K", clearance, 0.0, kOracle);

  // near-channel orbits theta1(0) = delta, I2 = 0
  DataTable near;
  near.name = "near_channel";
  near.title = "drift functional of late windows, near-channel orbits";
  near.columns = {"delta", "functional", "action_over_eps"};
  near.x_column = 0;
  near.y_columns = {1};
  const std::vector<double> deltas{1e-2, 1e-3, 1e-4};
  std::vector<State> near_starts;
  for (double d : deltas) near_starts.push_back({d, 0.3, 0.0, 0.0});
  const auto near_orbits = integrate_batch(sys, near_starts, cfg.T, iopt, cfg.threads);
  bool decreasing = true;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const auto late = occupation_measure(near_orbits[i], 0.5 * cfg.T, cfg.T);
    const double m = channel_drift_functional(late, cfg.K);
    near.rows.push_back({deltas[i], m, action_of_measure(late, sys) / cfg.eps});
    if (i > 0 && !(m < near.rows[i - 1][1])) decreasing = false;
  }
  rep.holds("near-channel drift functional decreases as theta1(0) -> 0", decreasing, kPublished);
  rep.tables.push_back(std::move(near));

  // weight near the diffusing set for growing windows
  DataTable rec;
  rec.name = "recurrence";
  rec.title = "occupation weight near the diffusing set";
  rec.columns = {"window", "fraction"};
  rec.y_columns = {1};
  const double delta = 0.1;
  auto near_diffusing = [&](std::span<const double> x) {
    const double a = std::min({x[0], std::abs(x[0] - 0.5), 1.0 - x[0]});
    const double d = std::max({a, std::abs(x[3]), std::abs(x[2]) - cfg.K});
    return d < delta ? 1.0 : 0.0;
  };
  bool nonincreasing = true;
  for (double f : {1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2, 1.0}) {
    const double w = f * cfg.T;
    const double frac = occupation_measure(channel_orbit, 0.0, w).expectation(near_diffusing);
    if (!rec.rows.empty() && frac > rec.rows.back()[1]) nonincreasing = false;
    rec.rows.push_back({w, frac});
  }
  rep.holds("weight near the diffusing set is nonincreasing in the window", nonincreasing, kPublished);
  rep.below("weight near the diffusing set, longest window", rec.rows.back()[1], rec.rows.front()[1], kPublished);
  rep.tables.push_back(std::move(rec));

  DataTable path;
  path.name = "escape_orbit";
  path.title = "channel orbit through the origin";
  path.columns = {"t", "theta1", "I1", "H"};
  path.y_columns = {2};
  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.1 / channel_orbit.step)));
  for (std::size_t k = 0; k < channel_orbit.size() && channel_orbit.time(k) <= 3.0 * t_K; k += stride) {
    const State z = channel_orbit.point(k);
    path.rows.push_back({channel_orbit.time(k), z[0], z[2], channel_orbit.energies[k]});
  }
  rep.tables.push_back(std::move(path));
  rep.notes.push_back("support of a measure means its atom set (empirical)");
  rep.notes.push_back("random orbits: theta uniform, |I1| < K, |I2| < 1/2");
  return rep;
}

// ---------------------------------------------------------------- annulus

struct AnnulusConfig {
  double T = 100.0;
  double dt = 1e-3;
  double r_mu = 1.5;
  double r_nu = 3.0;
  double r_base = 4.0;
  double r_target = 2.0;
  int fourier_order = 2;
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  static AnnulusConfig from_json(const nlohmann::json& j) { return from_json(j, AnnulusConfig{}); }

  static AnnulusConfig from_json(const nlohmann::json& j, AnnulusConfig c) {
    detail::ConfigReader r(j, "annulus");
    r.read("T", c.T);
    r.read("dt", c.dt);
    r.read("r_mu", c.r_mu);
    r.read("r_nu", c.r_nu);
    r.read("r_base", c.r_base);
    r.read("r_target", c.r_target);
    r.read("fourier_order", c.fourier_order);
    r.read("seed", c.seed);
    r.read("threads", c.threads);
    r.finish();
    return c;
  }

  nlohmann::ordered_json to_json() const {
    return {{"T", T},           {"dt", dt},
            {"r_mu", r_mu},     {"r_nu", r_nu},
            {"r_base", r_base}, {"r_target", r_target},
            {"fourier_order", fourier_order}, {"seed", seed}};
  }

  void validate() const {
    if (!(dt > 0.0) || !(T >= dt)) throw ConfigError("annulus: need dt > 0 and T >= dt");
    if (!(r_mu > 0.0) || !(r_nu > 0.0) || !(r_target > 0.0) || !(r_base > r_target))
      throw ConfigError("annulus: radii must be positive with r_base > r_target");
    if (fourier_order < 0 || fourier_order > 8) throw ConfigError("annulus: fourier_order must be in [0, 8]");
  }
};

inline ScenarioReport run_annulus(const AnnulusConfig& cfg) {
  cfg.validate();
  using namespace sources;
  ScenarioReport rep;
  rep.scenario = "annulus";
  rep.parameters = cfg.to_json();
  rep.parameters["h"] = "2 - r^2 on [0,1], (r - 2)^2 beyond (read from the figure)";
  const auto sys = systems::annulus();
  const systems::AnnulusProfile h;
  IntegrateOptions iopt;
  iopt.dt = cfg.dt;
  const double two_pi = detail::kTwoPi;

  const double flux_expected = detail::kPi * (cfg.r_base * cfg.r_base - cfg.r_target * cfg.r_target);
  const auto flux = lagrange_flux(isotopies::circle_radius_path(cfg.r_base, cfg.r_target));
  rep.near("flux of the shrink isotopy on the circle", flux.pairing[0], flux_expected, 1e-6, kPublished);

  const GammaValue gamma = gamma_generator(std::vector<PeriodValue>{{Rational(static_cast<std::int64_t>(std::llround(cfg.r_base * cfg.r_base))), {1, 1}}});
  if (cfg.r_base == 4.0) rep.symbolic("gamma(L) for the base circle", gamma.numeric(), gamma.to_string(), "16pi", kPublished);

  // orbits
  auto orbit_measure = [&](double r, Trajectory* keep = nullptr) {
    const State x{r, 0.0};
    Trajectory tr = integrate(sys, x, cfg.T, iopt);
    auto mu = occupation_measure(tr);
    if (keep) *keep = std::move(tr);
    return mu;
  };
  Trajectory nu_orbit;
  const auto mu = orbit_measure(cfg.r_mu);
  const auto nu = orbit_measure(cfg.r_nu, &nu_orbit);
  const double rho_mu = rotation_vector(mu, sys)[0];
  const double rho_nu = rotation_vector(nu, sys)[0];
  rep.near("<dphi, rho> at r = " + format_number(cfg.r_nu), rho_nu, h.derivative_over_r(cfg.r_nu), 1e-3, kOracle);
  rep.near("<dphi, rho> at r = " + format_number(cfg.r_mu), rho_mu, h.derivative_over_r(cfg.r_mu), 1e-3, kOracle);
  rep.near("winding rate at r = " + format_number(cfg.r_nu), (*nu.winding_rate)[0], h.derivative_over_r(cfg.r_nu), 1e-3,
           kCrossCheck);
  double radial = 0.0;
  for (const auto& z : nu_orbit.lifted) radial = std::max(radial, std::abs(std::hypot(z[0], z[1]) - cfg.r_nu));
  rep.at_most("max |r(t) - r(0)| on the r = " + format_number(cfg.r_nu) + " orbit", radial, 1e-6, kOracle);
  // x(t) = r cos(w t): the time average over [0, T] is r sin(w T) / (w T)
  const double w = h.derivative_over_r(cfg.r_nu);
  rep.near("x-average on the r = " + format_number(cfg.r_nu) + " orbit",
           nu.expectation([](std::span<const double> x) { return x[0]; }),
           cfg.r_nu * std::sin(w * cfg.T) / (w * cfg.T), 1e-6, kOracle);
  const auto fixed = orbit_measure(2.0);
  rep.near("rho on the fixed-point circle r = 2", rotation_vector(fixed, sys)[0], 0.0, 1e-12, kPublished);
  rep.at_most("orbit-measure identity residual (r = " + format_number(cfg.r_nu) + ")",
              detail::identity_residual(nu, sys, {0.5}), 1e-6, kDefinition);

  // shape witnesses in Sigma_{3/2} = {H < 3/2}
  const Region sigma = regions::planar_annulus(std::sqrt(0.5), 2.0 + std::sqrt(1.5));
  FamilySearchOptions fopt;
  fopt.order = cfg.fourier_order;
  fopt.seed = cfg.seed;
  fopt.threads = cfg.threads;
  // a = 6 [dphi], c = 0
  const double a1 = 6.0 * two_pi, c1 = 0.0;
  const auto w1 = shape_witness_circle(sigma, cfg.r_base, c1, a1, 1e-3, fopt);
  rep.holds("6[dphi] lies in the shape of Sigma_3/2 (witness found)", w1.has_value(), kPublished);
  if (w1) rep.near("witness flux, 6[dphi]", w1->flux[0], a1 + c1, 1e-6, kDefinition);
  rep.below("<6 dphi, rho(mu)> at r = " + format_number(cfg.r_mu), 6.0 * rho_mu, 0.0, kPublished);
  // a = -2 [dphi], c = 8 [dphi]
  const double a2 = -2.0 * two_pi, c2 = 8.0 * two_pi;
  const auto w2 = shape_witness_circle(sigma, cfg.r_base, c2, a2, 1e-3, fopt);
  rep.holds("-2[dphi] lies in the shape of Sigma_3/2 for c = 8[dphi] (witness found)", w2.has_value(), kPublished);
  if (w2) rep.near("witness flux, -2[dphi] + 8[dphi]", w2->flux[0], a2 + c2, 1e-6, kDefinition);
  rep.below("<-2 dphi, rho(nu)> at r = " + format_number(cfg.r_nu), -2.0 * rho_nu, 0.0, kPublished);

  // kappa
  const auto kappa = kappa_estimate_circle(sys, cfg.r_base, flux_expected, fopt);
  rep.at_most("kappa upper bound for the shrink flux", kappa.upper_bound, h(cfg.r_target) + 1e-9, kPublished);

  // a curve of area pi r_base^2 cannot sit inside Sigma_{3/2}
  const double sup_area = detail::kPi * std::pow(2.0 + std::sqrt(1.5), 2);
  const double area = detail::kPi * cfg.r_base * cfg.r_base;
  const auto w0 = shape_witness_circle(sigma, cfg.r_base, 0.0, 0.0, 1e-3, fopt);
  rep.holds("no curve of the base area inside Sigma_3/2", !w0.has_value() && area > sup_area, kOracle);

  DataTable rot;
  rot.name = "rotation";
  rot.title = "<dphi, rho> of circular orbits";
  rot.columns = {"r", "rho", "h_prime_over_r"};
  rot.y_columns = {1, 2};
  std::vector<double> radii;
  for (int k = 1; k <= 15; ++k) radii.push_back(0.25 * k);
  std::vector<double> rho(radii.size());
  detail::parallel_for(radii.size(), cfg.threads, [&](std::size_t i) {
    const State x{radii[i], 0.0};
    rho[i] = rotation_vector(occupation_measure(integrate(sys, x, 10.0, iopt)), sys)[0];
  });
  for (std::size_t i = 0; i < radii.size(); ++i) rot.rows.push_back({radii[i], rho[i], h.derivative_over_r(radii[i])});
  rep.tables.push_back(std::move(rot));

  if (w1) {
    DataTable img;
    img.name = "witness_6dphi";
    img.title = "image of the base circle, 6[dphi] witness";
    img.columns = {"x", "y"};
    img.y_columns = {1};
    for (const auto& p : w1->image) img.rows.push_back({p[0], p[1]});
    rep.tables.push_back(std::move(img));
    rep.parameters["witness_6dphi"] = w1->isotopy.parameters;
  }
  if (w2) rep.parameters["witness_minus2dphi"] = w2->isotopy.parameters;
  rep.notes.push_back("kappa values are upper bounds over the star-shaped circle family");
  return rep;
}

// ---------------------------------------------------------------- pendulum

struct PendulumConfig {
  double c_min = -3.0;
  double c_max = 3.0;
  double c_step = 0.25;
  std::size_t N = 64;
  double R = kDefaultDisplacementCap;
  int substeps = 8;
  std::uint64_t seed = 1;
  std::size_t threads = 0;

  static PendulumConfig from_json(const nlohmann::json& j) { return from_json(j, PendulumConfig{}); }

  static PendulumConfig from_json(const nlohmann::json& j, PendulumConfig c) {
    detail::ConfigReader r(j, "pendulum-alpha");
    r.read("c_min", c.c_min);
    r.read("c_max", c.c_max);
    r.read("c_step", c.c_step);
    r.read("N", c.N);
    r.read("R", c.R);
    r.read("substeps", c.substeps);
    r.read("seed", c.seed);
    r.read("threads", c.threads);
    r.finish();
    return c;
  }

  nlohmann::ordered_json to_json() const {
    return {{"c_min", c_min}, {"c_max", c_max}, {"c_step", c_step}, {"N", N},
            {"R", R},         {"substeps", substeps}, {"seed", seed}};
  }

  void validate() const {
    if (N < 32) throw ConfigError("pendulum-alpha: N must be >= 32");
    if (!(c_step > 0.0) || !(c_max > c_min)) throw ConfigError("pendulum-alpha: need c_step > 0 and c_max > c_min");
    if ((c_max - c_min) / c_step > 400) throw ConfigError("pendulum-alpha: too many classes");
    if (!(R > 0.0) || substeps < 1) throw ConfigError("pendulum-alpha: need R > 0 and substeps >= 1");
  }
};

inline ScenarioReport run_pendulum_alpha(const PendulumConfig& cfg) {
  cfg.validate();
  using namespace sources;
  ScenarioReport rep;
  rep.scenario = "pendulum_alpha";
  rep.parameters = cfg.to_json();
  rep.parameters["lagrangian"] = "v^2/2 - cos(2 pi q)";

  const auto l = MechanicalLagrangian::pendulum();
  const auto S = discretize_lagrangian(l, cfg.N, cfg.R, cfg.substeps, cfg.threads);
  std::vector<double> cs;
  const auto steps = static_cast<long>(std::floor((cfg.c_max - cfg.c_min) / cfg.c_step + 1e-9));
  for (long k = 0; k <= steps; ++k) cs.push_back(cfg.c_min + static_cast<double>(k) * cfg.c_step);
  if (std::none_of(cs.begin(), cs.end(), [](double c) { return std::abs(c) < 1e-12; })) cs.push_back(0.0);
  std::sort(cs.begin(), cs.end());
  for (double& c : cs)
    if (std::abs(c) < 1e-12) c = 0.0;
  std::vector<std::vector<double>> classes;
  for (double c : cs) classes.push_back({c});
  const auto rows = alpha_scan(S, classes, cfg.threads);

  auto index_of = [&](double c) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < cs.size(); ++i)
      if (std::abs(cs[i] - c) < 1e-9) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  const std::size_t i0 = static_cast<std::size_t>(index_of(0.0));
  rep.near("alpha(0)", rows[i0].alpha, 1.0, 5e-2, kOracle);

  double lp_lo = 0.0, gap = 0.0;
  for (const auto& r : rows) {
    lp_lo = std::max(lp_lo, std::abs(r.alpha - r.lax_oleinik) - r.duality_gap);
    gap = std::max(gap, r.duality_gap);
  }
  rep.at_most("max |alpha_lp - alpha_lax_oleinik| - duality gap", lp_lo, 2e-3, kCrossCheck);
  rep.at_most("max LP duality gap", gap, 1e-7, kDefinition);

  double convex = -INFINITY, even = 0.0, flat = 0.0;
  for (std::size_t i = 1; i + 1 < cs.size(); ++i)
    if (std::abs(cs[i] - 0.5 * (cs[i - 1] + cs[i + 1])) < 1e-12)
      convex = std::max(convex, rows[i].alpha - 0.5 * (rows[i - 1].alpha + rows[i + 1].alpha));
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const auto j = index_of(-cs[i]);
    if (j >= 0) even = std::max(even, std::abs(rows[i].alpha - rows[static_cast<std::size_t>(j)].alpha));
    if (std::abs(cs[i]) <= 1.0) flat = std::max(flat, std::abs(rows[i].rotation[0]));
  }
  rep.at_most("convexity: max alpha(mid) - mean of neighbours", convex, 1e-9, kDefinition);
  rep.at_most("evenness: max |alpha(c) - alpha(-c)|", even, 1e-9, kDefinition);
  rep.at_most("flat piece: max |rho| for |c| <= 1", flat, 1e-9, kOracle);

  // alpha(c)/|c| increasing on both rays beyond the flat piece, up to R/2
  bool superlinear = true;
  std::size_t ray_points = 0;
  for (int sign : {1, -1}) {
    double prev = -INFINITY;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const std::size_t i = sign > 0 ? k : cs.size() - 1 - k;
      const double c = cs[i] * sign;
      if (c < 1.5 || c > 0.5 * cfg.R) continue;
      const double q = rows[i].alpha / c;
      if (!(q > prev)) superlinear = false;
      prev = q;
      ++ray_points;
    }
  }
  rep.holds("alpha(c)/|c| increasing on both rays over [1.5, R/2]", superlinear && ray_points >= 4, kPublished);

  std::vector<std::pair<std::vector<double>, double>> samples;
  for (const auto& r : rows) samples.push_back({r.c, r.alpha});
  double violation = 0.0, residual = 0.0;
  std::vector<double> residuals(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    violation = std::max(violation, subdifferential_contains_rotation(rows[i].result, samples, 2e-2).max_violation);
    const auto mu = transition_phase_measure(S, rows[i].result);
    residuals[i] = std::abs(action_of_measure(mu, l.hamiltonian()) - rows[i].alpha + cs[i] * rows[i].rotation[0]);
    residual = std::max(residual, residuals[i]);
  }
  rep.at_most("subgradient inequality: max violation over the scan", violation, 2e-2, kPublished);
  rep.at_most("minimising measures: max |A(mu) - alpha(c) + c rho|", residual, 5e-2, kPublished);

  const auto beta0 = beta_conjugate(samples, std::vector<double>{0.0});
  rep.near("beta(0)", beta0.value, -1.0, 5e-2, kOracle);
  const std::size_t last = cs.size() - 1;
  const double cl = cs[last];
  rep.relative("alpha at the largest class vs c^2/2", rows[last].alpha, 0.5 * cl * cl, 2e-2, kOracle);
  rep.relative("rho at the largest class vs c", rows[last].rotation[0], cl, 2e-2, kOracle);

  // Clarke estimate of the piecewise-linear interpolant of the scan
  auto slope_at = [&](double c) {
    std::size_t k = 0;
    while (k + 2 < cs.size() && c > cs[k + 1]) ++k;
    return (rows[k + 1].alpha - rows[k].alpha) / (cs[k + 1] - cs[k]);
  };
  auto interp = [&](std::span<const double> x) {
    const double c = std::clamp(x[0], cs.front(), cs.back());
    std::size_t k = 0;
    while (k + 2 < cs.size() && c > cs[k + 1]) ++k;
    return rows[k].alpha + slope_at(c) * (c - cs[k]);
  };
  SampledFunction alpha_fn(1, interp, std::max(std::abs(cs.front()), std::abs(cs.back())));
  alpha_fn.with_gradient([&](std::span<const double> x, std::span<double> g) { g[0] = slope_at(x[0]); });

  DataTable scan;
  scan.name = "alpha_scan";
  scan.title = "pendulum alpha-function";
  scan.columns = {"c", "alpha", "rho", "duality_gap", "lax_oleinik", "clarke_lo", "clarke_hi", "identity_residual"};
  scan.y_columns = {1, 2};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double radius = 0.5 * cfg.c_step;
    const auto est = clarke_subdifferential(alpha_fn, std::vector<double>{cs[i]}, radius, 64, cfg.seed + i);
    const auto [lo, hi] = est.hull.interval();
    scan.rows.push_back({cs[i], rows[i].alpha, rows[i].rotation[0], rows[i].duality_gap, rows[i].lax_oleinik, lo, hi,
                         residuals[i]});
  }
  double outside = 0.0;
  for (const auto& row : scan.rows) outside = std::max({outside, row[5] - row[2], row[2] - row[6]});
  rep.at_most("distance of rho from the Clarke estimate of alpha", outside, 2e-2, kPublished);
  rep.tables.push_back(std::move(scan));

  // one continuous orbit for the measure identity
  {
    const auto H = l.hamiltonian();
    const State x{0.1, 1.5};
    const auto tr = integrate(H, x, 20.0, {});
    rep.at_most("orbit-measure identity residual (pendulum orbit)",
                detail::identity_residual(occupation_measure(tr), H, {0.7}), 1e-6, kDefinition);
  }
  rep.notes.push_back("alpha is computed on a grid of " + std::to_string(cfg.N) + " points with displacements up to R");
  return rep;
}

// ---------------------------------------------------------------- pathological

struct PathologicalConfig {
  std::vector<double> p0{1.0, 0.0};
  double r = 0.25;
  double T = 50.0;
  double dt = 1e-3;
  std::uint64_t seed = 1;

  static PathologicalConfig from_json(const nlohmann::json& j) { return from_json(j, PathologicalConfig{}); }

  static PathologicalConfig from_json(const nlohmann::json& j, PathologicalConfig c) {
    detail::ConfigReader rd(j, "pathological");
    rd.read("p0", c.p0);
    rd.read("r", c.r);
    rd.read("T", c.T);
    rd.read("dt", c.dt);
    rd.read("seed", c.seed);
    rd.finish();
    return c;
  }

  nlohmann::ordered_json to_json() const { return {{"p0", p0}, {"r", r}, {"T", T}, {"dt", dt}, {"seed", seed}}; }

  void validate() const {
    if (!(dt > 0.0) || !(T >= dt)) throw ConfigError("pathological: need dt > 0 and T >= dt");
    systems::PathologicalProfile check(p0, r);
    (void)check;
  }
};

inline ScenarioReport run_pathological(const PathologicalConfig& cfg) {
  cfg.validate();
  using namespace sources;
  ScenarioReport rep;
  rep.scenario = "pathological";
  rep.parameters = cfg.to_json();
  rep.parameters["h"] = "<dh0, p - p0> cutoff(|p - p0| / r), dh0 unit and orthogonal to p0, even";

  const systems::PathologicalProfile h(cfg.p0, cfg.r);
  const auto sys = systems::pathological(cfg.p0, cfg.r);
  std::vector<double> dh(2);
  h.gradient(cfg.p0, dh);
  rep.near("h(p0)", h(cfg.p0), 0.0, 1e-15, kDefinition);
  rep.near("dh(p0) . p0", detail::dot(dh, cfg.p0), 0.0, 1e-15, kDefinition);
  rep.near("|dh(p0)|", detail::norm2(dh), 1.0, 1e-15, kDefinition);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double q1 = unit(rng), q2 = unit(rng);
  IntegrateOptions iopt;
  iopt.dt = cfg.dt;
  const State x1{q1, q2, cfg.p0[0], cfg.p0[1]};
  const State x2{q1, q2, -cfg.p0[0], -cfg.p0[1]};
  const auto mu1 = occupation_measure(integrate(sys, x1, cfg.T, iopt));
  const auto mu2 = occupation_measure(integrate(sys, x2, cfg.T, iopt));
  const auto rho1 = rotation_vector(mu1, sys);
  const auto rho2 = rotation_vector(mu2, sys);
  rep.near("|rho(mu1) - dh(p0)|", std::hypot(rho1[0] - dh[0], rho1[1] - dh[1]), 0.0, 1e-6, kPublished);
  rep.near("|rho(mu1) + rho(mu2)|", std::hypot(rho1[0] + rho2[0], rho1[1] + rho2[1]), 0.0, 1e-6, kPublished);
  rep.near("A(mu1)", action_of_measure(mu1, sys), 0.0, 1e-6, kPublished);
  rep.near("A(mu2)", action_of_measure(mu2, sys), 0.0, 1e-6, kPublished);

  const auto mu = convex_combine({mu1, mu2}, {0.5, 0.5});
  const auto rho = rotation_vector(mu, sys);
  rep.near("|rho(mu)| for mu = (mu1 + mu2)/2", std::hypot(rho[0], rho[1]), 0.0, 1e-6, kPublished);
  rep.near("A(mu)", action_of_measure(mu, sys), 0.0, 1e-6, kPublished);
  const double band = detail::norm2(cfg.p0) - cfg.r;
  const double clearance = support_clearance(mu, regions::momentum_ball(2, band));
  rep.above("support clearance of mu from |p| < |p0| - r", clearance, 0.0, kDefinition);
  rep.at_most("orbit-measure identity residual (mu1)", detail::identity_residual(mu1, sys, {0.4, -1.1}), 1e-6,
              kDefinition);

  DataTable atoms;
  atoms.name = "measure_mu";
  atoms.title = "momentum support of mu";
  atoms.columns = {"p1", "p2", "weight"};
  std::map<std::pair<double, double>, double> by_momentum;
  for (std::size_t k = 0; k < mu.size(); ++k) by_momentum[{mu.atoms[k][2], mu.atoms[k][3]}] += mu.weights[k];
  for (const auto& [p, w] : by_momentum) atoms.rows.push_back({p.first, p.second, w});
  rep.tables.push_back(std::move(atoms));
  rep.notes.push_back("mu has rotation 0 and action 0 yet its support avoids the zero section");
  return rep;
}

}  // namespace matherlab
