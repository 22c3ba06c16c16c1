#pragma once

// Phase-space types, Hamiltonian systems and the pairing of closed 1-forms
// with Hamiltonian vector fields.
//
// Conventions. The symplectic gradient is defined by i_X omega = -dH.
//  * Cotangent torus T*T^n: state (theta_1..theta_n, I_1..I_n), angles on the
//    unit torus (2*pi only appears inside trigonometric functions) and
//    omega = sum dI_i ^ dtheta_i, so theta' = dH/dI and I' = -dH/dtheta.
//  * Plane R^2n: state (x_1..x_n, y_1..y_n), omega = sum dx_i ^ dy_i, so
//    x' = -dH/dy and y' = dH/dx. For H = h(r) this gives <dphi, X_H> = h'(r)/r.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/error.hpp"

namespace matherlab {

using State = std::vector<double>;

enum class Chart { CotangentTorus, Plane };

inline const char* to_string(Chart c) {
  return c == Chart::CotangentTorus ? "cotangent-torus" : "plane";
}

/// Wrap an angle into [0, 1). Idempotent.
inline double wrap_unit(double a) {
  double r = a - std::floor(a);
  if (r >= 1.0) r = 0.0;
  return r;
}

struct TorusCotangentPoint {
  std::vector<double> theta;
  std::vector<double> momentum;

  TorusCotangentPoint() = default;
  TorusCotangentPoint(std::vector<double> th, std::vector<double> mom)
      : theta(std::move(th)), momentum(std::move(mom)) {
    require_dim(momentum.size(), theta.size(), "TorusCotangentPoint momentum");
  }

  std::size_t dof() const { return theta.size(); }

  TorusCotangentPoint normalized() const {
    TorusCotangentPoint out = *this;
    for (double& a : out.theta) a = wrap_unit(a);
    return out;
  }

  State to_state() const {
    State s(theta);
    s.insert(s.end(), momentum.begin(), momentum.end());
    return s;
  }

  static TorusCotangentPoint from_state(std::span<const double> s) {
    if (s.size() % 2 != 0) throw DimensionError("TorusCotangentPoint: odd state size");
    const std::size_t n = s.size() / 2;
    return {std::vector<double>(s.begin(), s.begin() + n),
            std::vector<double>(s.begin() + n, s.end())};
  }
};

struct PlanePoint {
  double x = 0.0;
  double y = 0.0;

  double r() const { return std::hypot(x, y); }
  double phi() const { return std::atan2(y, x); }
  static PlanePoint from_polar(double r, double phi) { return {r * std::cos(phi), r * std::sin(phi)}; }
  State to_state() const { return {x, y}; }
  static PlanePoint from_state(std::span<const double> s) {
    require_dim(s.size(), 2, "PlanePoint");
    return {s[0], s[1]};
  }
};

/// Decomposition H = H0(momentum) + V(theta, momentum) on T*T^n used by the
/// splitting integrator. V is implied as H - H0.
struct Splitting {
  std::function<double(std::span<const double>)> kinetic;
  std::function<void(std::span<const double>, std::span<double>)> kinetic_gradient;
  bool potential_depends_on_momentum = true;
  bool potential_vanishes = false;
};

class HamiltonianSystem {
 public:
  using ScalarField = std::function<double(std::span<const double>)>;
  using GradientField = std::function<void(std::span<const double>, std::span<double>)>;

  HamiltonianSystem(std::string name, Chart chart, std::size_t dof, ScalarField energy,
                    GradientField gradient = {}, std::optional<Splitting> splitting = {})
      : name_(std::move(name)),
        chart_(chart),
        dof_(dof),
        energy_(std::move(energy)),
        gradient_(std::move(gradient)),
        splitting_(std::move(splitting)) {
    if (dof_ == 0) throw DimensionError("HamiltonianSystem: dof must be positive");
    if (splitting_ && chart_ != Chart::CotangentTorus)
      throw ConfigError("HamiltonianSystem: splitting only defined on T*T^n");
  }

  const std::string& name() const { return name_; }
  Chart chart() const { return chart_; }
  std::size_t dof() const { return dof_; }
  std::size_t state_dim() const { return 2 * dof_; }
  const std::optional<Splitting>& splitting() const { return splitting_; }
  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }

  const std::map<std::string, double>& parameters() const { return params_; }
  HamiltonianSystem& with_parameter(const std::string& key, double value) {
    params_[key] = value;
    return *this;
  }

  double energy(std::span<const double> x) const {
    require_dim(x.size(), state_dim(), name_.c_str());
    return energy_(x);
  }

  void gradient(std::span<const double> x, std::span<double> out) const {
    require_dim(x.size(), state_dim(), name_.c_str());
    require_dim(out.size(), state_dim(), name_.c_str());
    if (gradient_) {
      gradient_(x, out);
      return;
    }
    finite_difference_gradient(x, out);
  }

  State gradient(std::span<const double> x) const {
    State g(state_dim());
    gradient(x, g);
    return g;
  }

  /// Central differences with step 1e-5 * (1 + |x|).
  void finite_difference_gradient(std::span<const double> x, std::span<double> out) const {
    const double h = 1e-5 * (1.0 + detail::norm2(x));
    State xp(x.begin(), x.end());
    for (std::size_t i = 0; i < xp.size(); ++i) {
      const double keep = xp[i];
      xp[i] = keep + h;
      const double fp = energy_(xp);
      xp[i] = keep - h;
      const double fm = energy_(xp);
      xp[i] = keep;
      out[i] = (fp - fm) / (2.0 * h);
    }
  }

 private:
  std::string name_;
  Chart chart_;
  std::size_t dof_;
  ScalarField energy_;
  GradientField gradient_;
  std::optional<Splitting> splitting_;
  std::map<std::string, double> params_;
};

/// Symplectic rearrangement of a covector dH into X_H for the given chart.
inline void symplectic_rearrange(Chart chart, std::size_t n, std::span<const double> dH,
                                 std::span<double> out) {
  if (chart == Chart::CotangentTorus) {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = dH[n + i];
      out[n + i] = -dH[i];
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = -dH[n + i];
      out[n + i] = dH[i];
    }
  }
}

inline State hamiltonian_vector_field(const HamiltonianSystem& system, std::span<const double> x) {
  require_dim(x.size(), system.state_dim(), "hamiltonian_vector_field");
  const State g = system.gradient(x);
  State v(x.size());
  symplectic_rearrange(system.chart(), system.dof(), g, v);
  return v;
}

/// omega(u, v) for the chart's symplectic form.
inline double symplectic_form(Chart chart, std::span<const double> u, std::span<const double> v) {
  const std::size_t n = u.size() / 2;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (chart == Chart::CotangentTorus) {
      s += u[n + i] * v[i] - u[i] * v[n + i];  // dI ^ dtheta
    } else {
      s += u[i] * v[n + i] - u[n + i] * v[i];  // dx ^ dy
    }
  }
  return s;
}

/// <lambda, v> for the standard primitive: sum I_i dtheta_i on T*T^n,
/// (x dy - y dx)/2 on the plane.
inline double liouville_pairing(Chart chart, std::span<const double> x, std::span<const double> v) {
  const std::size_t n = x.size() / 2;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (chart == Chart::CotangentTorus) {
      s += x[n + i] * v[i];
    } else {
      s += 0.5 * (x[i] * v[n + i] - x[n + i] * v[i]);
    }
  }
  return s;
}

/// Closed 1-form eta = sum c_i e_i + du.
/// On T*T^n the e_i are dtheta_i and u is a periodic function of theta.
/// On the plane the e_i are the angle forms dphi_i of the (x_i, y_i) factors
/// (integral 2*pi around the origin) and u is a function of (x, y).
class ClosedOneForm {
 public:
  using Potential = std::function<double(std::span<const double>)>;
  using PotentialGradient = std::function<void(std::span<const double>, std::span<double>)>;

  ClosedOneForm() = default;

  static ClosedOneForm torus(std::vector<double> constant_part) {
    ClosedOneForm f;
    f.chart_ = Chart::CotangentTorus;
    f.constant_ = std::move(constant_part);
    return f;
  }

  static ClosedOneForm torus(std::vector<double> constant_part, Potential u, PotentialGradient du) {
    ClosedOneForm f = torus(std::move(constant_part));
    f.u_ = std::move(u);
    f.du_ = std::move(du);
    return f;
  }

  /// coefficient * dphi on R^2 (n = 1).
  static ClosedOneForm angle_form(double coefficient = 1.0) {
    ClosedOneForm f;
    f.chart_ = Chart::Plane;
    f.constant_ = {coefficient};
    return f;
  }

  static ClosedOneForm plane(std::vector<double> coefficients, Potential u = {},
                             PotentialGradient du = {}) {
    ClosedOneForm f;
    f.chart_ = Chart::Plane;
    f.constant_ = std::move(coefficients);
    f.u_ = std::move(u);
    f.du_ = std::move(du);
    return f;
  }

  Chart chart() const { return chart_; }
  std::size_t dim() const { return constant_.size(); }
  const std::vector<double>& constant_part() const { return constant_; }
  bool has_exact_part() const { return static_cast<bool>(u_); }

  /// Value of the exact potential at the angle (torus) or position (plane) part.
  double potential(std::span<const double> base) const { return u_ ? u_(base) : 0.0; }

  /// <eta, v> at the phase point x.
  double pair(std::span<const double> x, std::span<const double> v) const {
    const std::size_t n = x.size() / 2;
    require_dim(dim(), n, "ClosedOneForm::pair");
    double s = 0.0;
    if (chart_ == Chart::CotangentTorus) {
      for (std::size_t i = 0; i < n; ++i) s += constant_[i] * v[i];
      if (u_) {
        State g(n);
        potential_gradient(x.first(n), g);
        for (std::size_t i = 0; i < n; ++i) s += g[i] * v[i];
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        const double px = x[i], py = x[n + i];
        const double r2 = px * px + py * py;
        if (constant_[i] != 0.0) {
          if (r2 == 0.0) throw DimensionError("angle form undefined at the origin");
          s += constant_[i] * (px * v[n + i] - py * v[i]) / r2;
        }
      }
      if (u_) {
        State g(2 * n);
        potential_gradient(x, g);
        for (std::size_t i = 0; i < 2 * n; ++i) s += g[i] * v[i];
      }
    }
    return s;
  }

  /// Integral over the i-th basis loop by composite quadrature. On the torus
  /// the loop is theta0 + s e_i; on the plane it is the unit circle in the
  /// i-th factor centred at the origin.
  double loop_integral(std::size_t i, std::span<const double> base_point, int panels = 512) const {
    const std::size_t n = dim();
    if (i >= n) throw DimensionError("loop_integral: loop index out of range");
    double total = 0.0;
    State x(2 * n, 0.0), v(2 * n, 0.0);
    for (int k = 0; k < panels; ++k) {
      const double s = (k + 0.5) / panels;  // midpoint rule, exact for trig polynomials
      std::fill(x.begin(), x.end(), 0.0);
      std::fill(v.begin(), v.end(), 0.0);
      if (chart_ == Chart::CotangentTorus) {
        for (std::size_t j = 0; j < n; ++j) x[j] = base_point[j];
        x[i] += s;
        v[i] = 1.0;
      } else {
        const double a = detail::kTwoPi * s;
        for (std::size_t j = 0; j < 2 * n; ++j) x[j] = base_point[j];
        x[i] = std::cos(a);
        x[n + i] = std::sin(a);
        v[i] = -detail::kTwoPi * std::sin(a);
        v[n + i] = detail::kTwoPi * std::cos(a);
      }
      total += pair(x, v);
    }
    return total / panels;
  }

 private:
  void potential_gradient(std::span<const double> base, std::span<double> out) const {
    if (du_) {
      du_(base, out);
      return;
    }
    const double h = 1e-6;
    State b(base.begin(), base.end());
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double keep = b[j];
      b[j] = keep + h;
      const double fp = u_(b);
      b[j] = keep - h;
      const double fm = u_(b);
      b[j] = keep;
      out[j] = (fp - fm) / (2 * h);
    }
  }

  Chart chart_ = Chart::CotangentTorus;
  std::vector<double> constant_;
  Potential u_;
  PotentialGradient du_;
};

inline double pair_form_with_field(const ClosedOneForm& eta, const HamiltonianSystem& system,
                                   std::span<const double> x) {
  if (eta.chart() != system.chart()) throw DimensionError("pair_form_with_field: chart mismatch");
  require_dim(eta.dim(), system.dof(), "pair_form_with_field");
  const State v = hamiltonian_vector_field(system, x);
  return eta.pair(x, v);
}

/// Wrap the angle components of a torus state; plane states are returned unchanged.
inline State normalize_state(Chart chart, std::span<const double> x) {
  State out(x.begin(), x.end());
  if (chart == Chart::CotangentTorus) {
    const std::size_t n = x.size() / 2;
    for (std::size_t i = 0; i < n; ++i) out[i] = wrap_unit(out[i]);
  }
  return out;
}

}  // namespace matherlab
