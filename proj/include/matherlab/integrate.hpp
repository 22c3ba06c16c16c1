#pragma once

// Symplectic integration of Hamiltonian orbits and event detection.
//
// Strang splitting is used when the system declares H = H0(I) + V(theta, I):
// the H0 flow is exact, the V flow is an exact kick when V does not depend on
// I and an implicit midpoint step otherwise. Systems without a splitting use
// the implicit midpoint rule. All three maps are symplectic and symmetric.

#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/detail/parallel.hpp"
#include "matherlab/phase.hpp"
#include "matherlab/region.hpp"

namespace matherlab {

struct IntegrateOptions {
  double dt = 1e-3;
  int order = 4;  // 2: one Strang / midpoint step, 4: its symmetric triple-jump composition
  std::size_t record_every = 1;
  bool backward = false;
  double newton_tol = 1e-12;
  int newton_max_iter = 20;
};

/// Samples of an orbit. States are stored in lifted coordinates (angles not
/// wrapped) so that winding can be read off directly; point() wraps them.
struct Trajectory {
  Chart chart = Chart::CotangentTorus;
  std::size_t dof = 0;
  double t0 = 0.0;
  double dt = 0.0;           // spacing between stored samples
  double step = 0.0;         // integrator step
  std::vector<State> lifted;
  std::vector<double> energies;

  std::size_t size() const { return lifted.size(); }
  double time(std::size_t k) const { return t0 + dt * static_cast<double>(k); }
  double duration() const { return lifted.empty() ? 0.0 : dt * static_cast<double>(lifted.size() - 1); }
  State point(std::size_t k) const { return normalize_state(chart, lifted[k]); }

  double max_energy_drift() const {
    double m = 0.0;
    for (double e : energies) m = std::max(m, std::abs(e - energies.front()));
    return m;
  }

  int order = 4;

  /// Empirical constant C in drift <= C * step^order.
  double drift_constant() const { return step > 0.0 ? max_energy_drift() / std::pow(step, order) : 0.0; }
};

struct EscapeEvent {
  double time = 0.0;
  State point;
  std::string criterion;
};

namespace detail {

using Field = std::function<void(std::span<const double>, std::span<double>)>;

/// Implicit midpoint steps z1 = z0 + h F((z0 + z1)/2), solved by Newton
/// iteration with a finite-difference Jacobian. Factorised Jacobians are
/// kept per step size, reused for up to kRefresh steps and rebuilt when the
/// iteration stalls.
class MidpointSolver {
 public:
  static constexpr int kRefresh = 32;

  MidpointSolver(Field field, double tol, int max_iter) : field_(std::move(field)), tol_(tol), max_iter_(max_iter) {}

  void step(State& z, double h) {
    Entry* e = nullptr;
    for (auto& c : cache_)
      if (c.h == h) e = &c;
    if (e == nullptr) {
      if (cache_.size() >= 4) cache_.erase(cache_.begin());
      cache_.push_back({h, std::nullopt, 0});
      e = &cache_.back();
    }
    if (!e->lu || e->age >= kRefresh) refactor(*e, z);
    ++e->age;
    if (iterate(*e, z)) return;
    refactor(*e, z);
    if (iterate(*e, z)) return;
    throw ConvergenceError("implicit midpoint: Newton iteration did not converge", last_);
  }

 private:
  struct Entry {
    double h;
    std::optional<LU> lu;
    int age;
  };

  void refactor(Entry& e, const State& z) {
    const double h = e.h;
    const std::size_t d = z.size();
    State fp(d), fm(d), probe(z);
    Matrix J(d, d);
    for (std::size_t j = 0; j < d; ++j) {
      const double e = 1e-7 * (1.0 + std::abs(z[j]));
      probe[j] = z[j] + e;
      field_(probe, fp);
      probe[j] = z[j] - e;
      field_(probe, fm);
      probe[j] = z[j];
      for (std::size_t i = 0; i < d; ++i) J(i, j) = (fp[i] - fm[i]) / (2 * e);
    }
    Matrix M = Matrix::identity(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) M(i, j) -= 0.5 * h * J(i, j);
    e.lu.emplace(std::move(M));
    e.age = 0;
  }

  bool iterate(const Entry& e, State& z) {
    const double h = e.h;
    const std::size_t d = z.size();
    f0_.resize(d);
    z1_.resize(d);
    mid_.resize(d);
    fmid_.resize(d);
    res_.resize(d);
    field_(z, f0_);
    for (std::size_t i = 0; i < d; ++i) z1_[i] = z[i] + h * f0_[i];
    for (int it = 0; it < max_iter_; ++it) {
      for (std::size_t i = 0; i < d; ++i) mid_[i] = 0.5 * (z[i] + z1_[i]);
      field_(mid_, fmid_);
      for (std::size_t i = 0; i < d; ++i) res_[i] = z1_[i] - z[i] - h * fmid_[i];
      const State delta = e.lu->solve(res_);
      last_ = 0.0;
      for (std::size_t i = 0; i < d; ++i) {
        z1_[i] -= delta[i];
        last_ = std::max(last_, std::abs(delta[i]) / (1.0 + std::abs(z1_[i])));
      }
      if (last_ <= tol_) {
        z = z1_;
        return true;
      }
    }
    return false;
  }

  Field field_;
  double tol_;
  int max_iter_;
  std::vector<Entry> cache_;
  double last_ = 0.0;
  State f0_, z1_, mid_, fmid_, res_;
};

class Stepper {
 public:
  Stepper(const HamiltonianSystem& sys, const IntegrateOptions& opt) : sys_(sys), opt_(opt) {
    const std::size_t n = sys.dof();
    full_ = [this, n](std::span<const double> x, std::span<double> out) {
      State g(2 * n);
      sys_.gradient(x, g);
      symplectic_rearrange(sys_.chart(), n, g, out);
    };
    if (sys.splitting()) {
      potential_ = [this, n](std::span<const double> x, std::span<double> out) {
        State g(2 * n), g0(n);
        sys_.gradient(x, g);
        sys_.splitting()->kinetic_gradient(x.subspan(n), g0);
        for (std::size_t i = 0; i < n; ++i) g[n + i] -= g0[i];
        symplectic_rearrange(Chart::CotangentTorus, n, g, out);
      };
      potential_solver_.emplace(potential_, opt.newton_tol, opt.newton_max_iter);
    }
    full_solver_.emplace(full_, opt.newton_tol, opt.newton_max_iter);
  }

  void step(State& z, double h) const {
    if (opt_.order == 2) {
      base_step(z, h);
      return;
    }
    static const double w1 = 1.0 / (2.0 - std::cbrt(2.0));
    static const double w0 = 1.0 - 2.0 * w1;
    base_step(z, w1 * h);
    base_step(z, w0 * h);
    base_step(z, w1 * h);
  }

 private:
  void base_step(State& z, double h) const {
    if (!sys_.splitting()) {
      full_solver_->step(z, h);
      return;
    }
    const Splitting& sp = *sys_.splitting();
    if (!sp.potential_vanishes) potential_flow(z, 0.5 * h);
    drift(z, h);
    if (!sp.potential_vanishes) potential_flow(z, 0.5 * h);
  }

  void drift(State& z, double h) const {
    const std::size_t n = sys_.dof();
    State g0(n);
    sys_.splitting()->kinetic_gradient(std::span<const double>(z).subspan(n), g0);
    for (std::size_t i = 0; i < n; ++i) z[i] += h * g0[i];
  }

  void potential_flow(State& z, double h) const {
    const std::size_t n = sys_.dof();
    if (sys_.splitting()->potential_depends_on_momentum) {
      potential_solver_->step(z, h);
      return;
    }
    State g(2 * n);
    sys_.gradient(z, g);
    for (std::size_t i = 0; i < n; ++i) z[n + i] -= h * g[i];
  }

  const HamiltonianSystem& sys_;
  IntegrateOptions opt_;
  Field full_;
  Field potential_;
  mutable std::optional<MidpointSolver> full_solver_;
  mutable std::optional<MidpointSolver> potential_solver_;
};

/// Advance z by time tau (any sign) with steps no longer than max_step.
inline void advance(const Stepper& stepper, State& z, double tau, double max_step) {
  if (tau == 0.0) return;
  const auto k = static_cast<long>(std::ceil(std::abs(tau) / max_step - 1e-9));
  const double h = tau / static_cast<double>(std::max(1L, k));
  for (long i = 0; i < std::max(1L, k); ++i) stepper.step(z, h);
}

}  // namespace detail

/// Integrate the flow of `system` from x0 over [0, T] (or [0, -T] when
/// opt.backward). If T is not a multiple of dt the step is shortened
/// uniformly so that the final sample lands on T.
inline Trajectory integrate(const HamiltonianSystem& system, std::span<const double> x0, double T,
                            const IntegrateOptions& opt = {}) {
  require_dim(x0.size(), system.state_dim(), "integrate");
  if (!(opt.dt > 0.0)) throw ConfigError("integrate: dt must be > 0");
  if (!(T >= opt.dt)) throw ConfigError("integrate: T must be >= dt");
  if (opt.record_every == 0) throw ConfigError("integrate: record_every must be >= 1");
  if (opt.order != 2 && opt.order != 4) throw ConfigError("integrate: order must be 2 or 4");

  const auto steps = static_cast<std::size_t>(std::ceil(T / opt.dt - 1e-9));
  const double h = (opt.backward ? -T : T) / static_cast<double>(steps);
  const detail::Stepper stepper(system, opt);
  const std::size_t n = system.dof();

  Trajectory traj;
  traj.chart = system.chart();
  traj.dof = n;
  traj.step = std::abs(h);
  traj.order = opt.order;
  traj.dt = h * static_cast<double>(opt.record_every);
  traj.lifted.reserve(steps / opt.record_every + 2);
  traj.energies.reserve(steps / opt.record_every + 2);

  State z(x0.begin(), x0.end());
  traj.lifted.push_back(z);
  traj.energies.push_back(system.energy(z));

  State prev;
  for (std::size_t k = 1; k <= steps; ++k) {
    prev = z;
    try {
      stepper.step(z, h);
    } catch (const ConvergenceError& e) {
      throw NumericalError(e.what(), prev, static_cast<double>(k - 1) * h);
    }
    if (!detail::all_finite(z))
      throw NumericalError("integrate: non-finite state", prev, static_cast<double>(k - 1) * h);
    if (system.chart() == Chart::CotangentTorus) {
      for (std::size_t i = 0; i < n; ++i)
        if (std::abs(z[i] - prev[i]) >= 0.5)
          throw NumericalError("integrate: angle changed by >= 1/2 in one step; reduce dt", prev,
                               static_cast<double>(k - 1) * h);
    }
    if (k % opt.record_every == 0) {
      traj.lifted.push_back(z);
      traj.energies.push_back(system.energy(z));
    }
  }
  return traj;
}

/// First sample at which `criterion` holds (signed distance < 0 means "holds").
/// The crossing inside the last step is refined by bisection on the flow to
/// a time tolerance of step * 1e-3.
inline std::optional<EscapeEvent> detect_escape(const Trajectory& traj, const Region& criterion,
                                                const HamiltonianSystem* system = nullptr,
                                                const IntegrateOptions& opt = {}) {
  if (traj.size() == 0) return std::nullopt;
  if (criterion.contains(traj.lifted[0])) return EscapeEvent{traj.time(0), traj.point(0), criterion.description};
  for (std::size_t k = 1; k < traj.size(); ++k) {
    if (!criterion.contains(traj.lifted[k])) continue;
    if (system == nullptr) return EscapeEvent{traj.time(k), traj.point(k), criterion.description};
    const detail::Stepper stepper(*system, opt);
    double lo = 0.0, hi = traj.dt;
    State hit = traj.lifted[k];
    const double tol = traj.step * 1e-3;
    while (std::abs(hi - lo) > tol) {
      const double mid = 0.5 * (lo + hi);
      State z = traj.lifted[k - 1];
      detail::advance(stepper, z, mid, traj.step);
      if (criterion.contains(z)) {
        hi = mid;
        hit = std::move(z);
      } else {
        lo = mid;
      }
    }
    return EscapeEvent{traj.time(k - 1) + hi, normalize_state(traj.chart, hit), criterion.description};
  }
  return std::nullopt;
}

/// Integrate many orbits; result i depends only on initial condition i.
inline std::vector<Trajectory> integrate_batch(const HamiltonianSystem& system,
                                               const std::vector<State>& initial, double T,
                                               const IntegrateOptions& opt = {}, std::size_t threads = 0) {
  std::vector<Trajectory> out(initial.size());
  detail::parallel_for(initial.size(), threads,
                       [&](std::size_t i) { out[i] = integrate(system, initial[i], T, opt); });
  return out;
}

/// Format a double with 17 significant digits.
inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// CSV: t, coordinates (angles wrapped), H.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n = traj.dof;
  os << "t";
  for (std::size_t i = 0; i < n; ++i) os << (traj.chart == Chart::CotangentTorus ? ",theta" : ",x") << i + 1;
  for (std::size_t i = 0; i < n; ++i) os << (traj.chart == Chart::CotangentTorus ? ",I" : ",y") << i + 1;
  os << ",H\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    os << format_number(traj.time(k));
    for (double c : traj.point(k)) os << ',' << format_number(c);
    os << ',' << format_number(traj.energies[k]) << '\n';
  }
}

}  // namespace matherlab
