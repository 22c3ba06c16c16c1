#pragma once

// Occupation measures: finite weighted samples of phase points standing in
// for invariant probability measures. Support means the atom set.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/integrate.hpp"
#include "matherlab/phase.hpp"
#include "matherlab/region.hpp"

namespace matherlab {

inline constexpr double kWeightThreshold = 1e-9;

struct OccupationMeasure {
  Chart chart = Chart::CotangentTorus;
  std::size_t dof = 0;
  std::vector<State> atoms;
  std::vector<double> weights;
  std::string provenance = "analytic";

  // Set for orbit measures: lifted angle increment over the window divided
  // by its length. Torus angles in turns, planar angles in radians.
  std::optional<std::vector<double>> winding_rate;

  std::size_t size() const { return atoms.size(); }

  double total_weight() const { return detail::pairwise_sum(weights); }

  static OccupationMeasure dirac(Chart chart, State point, std::string provenance = "analytic") {
    OccupationMeasure m;
    m.chart = chart;
    m.dof = point.size() / 2;
    m.atoms.push_back(normalize_state(chart, point));
    m.weights.push_back(1.0);
    m.provenance = std::move(provenance);
    return m;
  }

  /// Integral of f against the measure.
  double expectation(const std::function<double(std::span<const double>)>& f) const {
    std::vector<double> terms(atoms.size());
    for (std::size_t k = 0; k < atoms.size(); ++k) terms[k] = weights[k] * f(atoms[k]);
    return detail::pairwise_sum(terms);
  }

  /// Merge atoms with identical coordinates; atoms come out sorted.
  OccupationMeasure merged() const {
    std::vector<std::size_t> order(atoms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return atoms[a] < atoms[b]; });
    OccupationMeasure out = *this;
    out.atoms.clear();
    out.weights.clear();
    for (std::size_t k : order) {
      if (!out.atoms.empty() && out.atoms.back() == atoms[k]) {
        out.weights.back() += weights[k];
      } else {
        out.atoms.push_back(atoms[k]);
        out.weights.push_back(weights[k]);
      }
    }
    return out;
  }
};

/// Time average over the samples of `traj` in the elapsed-time window
/// [t_a, t_b], trapezoidal weights.
inline OccupationMeasure occupation_measure(const Trajectory& traj, double t_a, double t_b) {
  if (traj.size() == 0) throw Error("occupation_measure: empty trajectory");
  if (!(t_b >= t_a)) throw ConfigError("occupation_measure: window end before start");
  const double h = std::abs(traj.dt);
  const double slack = 1e-9 * h;
  if (t_a < -slack || t_b > std::abs(traj.duration()) + slack)
    throw ConfigError("occupation_measure: window outside trajectory span");
  const auto ka = static_cast<std::size_t>(std::ceil((t_a - slack) / h));
  const auto kb = std::min(traj.size() - 1, static_cast<std::size_t>(std::floor((t_b + slack) / h)));
  if (ka > kb) throw Error("occupation_measure: empty window");

  OccupationMeasure m;
  m.chart = traj.chart;
  m.dof = traj.dof;
  char buf[96];
  std::snprintf(buf, sizeof buf, "orbit window [%.6g, %.6g]", static_cast<double>(ka) * h,
                static_cast<double>(kb) * h);
  m.provenance = buf;
  const std::size_t count = kb - ka + 1;
  m.atoms.reserve(count);
  m.weights.reserve(count);
  if (count == 1) {
    m.atoms.push_back(traj.point(ka));
    m.weights.push_back(1.0);
    return m;
  }
  const double span = static_cast<double>(count - 1);
  for (std::size_t k = ka; k <= kb; ++k) {
    m.atoms.push_back(traj.point(k));
    m.weights.push_back((k == ka || k == kb ? 0.5 : 1.0) / span);
  }

  const std::size_t n = traj.dof;
  const double duration = span * traj.dt;
  std::vector<double> rate(n, 0.0);
  if (traj.chart == Chart::CotangentTorus) {
    for (std::size_t i = 0; i < n; ++i) rate[i] = (traj.lifted[kb][i] - traj.lifted[ka][i]) / duration;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t k = ka; k < kb; ++k) {
        const auto& a = traj.lifted[k];
        const auto& b = traj.lifted[k + 1];
        total += std::atan2(a[i] * b[n + i] - a[n + i] * b[i], a[i] * b[i] + a[n + i] * b[n + i]);
      }
      rate[i] = total / duration;
    }
  }
  m.winding_rate = std::move(rate);
  return m;
}

inline OccupationMeasure occupation_measure(const Trajectory& traj) {
  return occupation_measure(traj, 0.0, std::abs(traj.duration()));
}

/// <[eta_i], rho(mu)> = sum_k w_k <eta_i, X_H>(x_k) for each form.
inline std::vector<double> rotation_vector(const OccupationMeasure& mu, const HamiltonianSystem& system,
                                           const std::vector<ClosedOneForm>& forms) {
  if (mu.chart != system.chart()) throw DimensionError("rotation_vector: chart mismatch");
  require_dim(mu.dof, system.dof(), "rotation_vector");
  std::vector<State> fields(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) fields[k] = hamiltonian_vector_field(system, mu.atoms[k]);
  std::vector<double> out(forms.size());
  std::vector<double> terms(mu.size());
  for (std::size_t i = 0; i < forms.size(); ++i) {
    require_dim(forms[i].dim(), system.dof(), "rotation_vector form");
    for (std::size_t k = 0; k < mu.size(); ++k) terms[k] = mu.weights[k] * forms[i].pair(mu.atoms[k], fields[k]);
    out[i] = detail::pairwise_sum(terms);
  }
  return out;
}

/// Pairings with the basis classes [dtheta_i] (torus) or [dphi_i] (plane).
inline std::vector<double> rotation_vector(const OccupationMeasure& mu, const HamiltonianSystem& system) {
  std::vector<ClosedOneForm> basis;
  for (std::size_t i = 0; i < system.dof(); ++i) {
    std::vector<double> e(system.dof(), 0.0);
    e[i] = 1.0;
    basis.push_back(system.chart() == Chart::CotangentTorus ? ClosedOneForm::torus(e) : ClosedOneForm::plane(e));
  }
  return rotation_vector(mu, system, basis);
}

/// A(mu) = sum_k w_k (H - <lambda, X_H>)(x_k) for the standard primitive lambda.
inline double action_of_measure(const OccupationMeasure& mu, const HamiltonianSystem& system) {
  if (mu.chart != system.chart()) throw DimensionError("action_of_measure: chart mismatch");
  require_dim(mu.dof, system.dof(), "action_of_measure");
  std::vector<double> terms(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const State v = hamiltonian_vector_field(system, mu.atoms[k]);
    terms[k] = mu.weights[k] * (system.energy(mu.atoms[k]) - liouville_pairing(mu.chart, mu.atoms[k], v));
  }
  return detail::pairwise_sum(terms);
}

/// sum_k w_k (H - <lambda, X_H> + <eta, X_H>)(x_k).
inline double action_with_form(const OccupationMeasure& mu, const HamiltonianSystem& system,
                               const ClosedOneForm& eta) {
  std::vector<double> terms(mu.size());
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const State v = hamiltonian_vector_field(system, mu.atoms[k]);
    terms[k] = mu.weights[k] *
               (system.energy(mu.atoms[k]) - liouville_pairing(mu.chart, mu.atoms[k], v) + eta.pair(mu.atoms[k], v));
  }
  return detail::pairwise_sum(terms);
}

/// sum_j t_j mu_j. Measures with weight 0 contribute no atoms.
inline OccupationMeasure convex_combine(const std::vector<OccupationMeasure>& measures,
                                        const std::vector<double>& weights) {
  require_dim(weights.size(), measures.size(), "convex_combine");
  if (measures.empty()) throw ConfigError("convex_combine: no measures");
  double total = 0.0;
  for (double t : weights) {
    if (!(t >= 0.0)) throw ConfigError("convex_combine: negative weight");
    total += t;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("convex_combine: weights must sum to 1");

  OccupationMeasure out;
  out.chart = measures.front().chart;
  out.dof = measures.front().dof;
  out.provenance = "convex combination of";
  std::vector<double> rate(out.dof, 0.0);
  bool rates = true;
  for (std::size_t j = 0; j < measures.size(); ++j) {
    const auto& m = measures[j];
    if (m.chart != out.chart || m.dof != out.dof) throw DimensionError("convex_combine: incompatible measures");
    if (weights[j] == 0.0) continue;
    out.provenance += " {" + m.provenance + "}";
    for (std::size_t k = 0; k < m.size(); ++k) {
      out.atoms.push_back(m.atoms[k]);
      out.weights.push_back(weights[j] * m.weights[k]);
    }
    if (m.winding_rate) {
      for (std::size_t i = 0; i < out.dof; ++i) rate[i] += weights[j] * (*m.winding_rate)[i];
    } else {
      rates = false;
    }
  }
  if (rates) out.winding_rate = std::move(rate);
  return out;
}

/// Smallest signed distance from the atoms of weight above w_min to the
/// region (negative when some atom lies inside).
inline double support_clearance(const OccupationMeasure& mu, const Region& region,
                                double w_min = kWeightThreshold) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mu.size(); ++k)
    if (mu.weights[k] > w_min) best = std::min(best, region.signed_distance(mu.atoms[k]));
  return best;
}

/// CSV: coordinates then weight, 17 significant digits.
inline void write_measure_csv(std::ostream& os, const OccupationMeasure& mu) {
  const bool torus = mu.chart == Chart::CotangentTorus;
  for (std::size_t i = 0; i < mu.dof; ++i) os << (i ? "," : "") << (torus ? "theta" : "x") << i + 1;
  for (std::size_t i = 0; i < mu.dof; ++i) os << ',' << (torus ? "I" : "y") << i + 1;
  os << ",weight\n";
  for (std::size_t k = 0; k < mu.size(); ++k) {
    for (double c : mu.atoms[k]) os << format_number(c) << ',';
    os << format_number(mu.weights[k]) << '\n';
  }
}

inline nlohmann::ordered_json measure_to_json(const OccupationMeasure& mu) {
  nlohmann::ordered_json j;
  j["provenance"] = {{"source", mu.provenance}, {"support", "atom set (empirical)"}};
  j["chart"] = to_string(mu.chart);
  j["dof"] = mu.dof;
  j["atoms"] = mu.atoms;
  j["weights"] = mu.weights;
  if (mu.winding_rate) j["winding_rate"] = *mu.winding_rate;
  return j;
}

inline OccupationMeasure measure_from_json(const nlohmann::ordered_json& j) {
  OccupationMeasure mu;
  mu.chart = j.at("chart").get<std::string>() == "plane" ? Chart::Plane : Chart::CotangentTorus;
  mu.dof = j.at("dof").get<std::size_t>();
  mu.atoms = j.at("atoms").get<std::vector<State>>();
  mu.weights = j.at("weights").get<std::vector<double>>();
  mu.provenance = j.at("provenance").at("source").get<std::string>();
  if (j.contains("winding_rate")) mu.winding_rate = j.at("winding_rate").get<std::vector<double>>();
  require_dim(mu.weights.size(), mu.atoms.size(), "measure_from_json");
  return mu;
}

}  // namespace matherlab
