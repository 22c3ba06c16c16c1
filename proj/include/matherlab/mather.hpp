#pragma once

// Mather's alpha function for mechanical Lagrangians on T^n (n <= 2).
//
// The time-1 action S(q, q') between grid points is minimised over
// piecewise-linear paths. alpha(c) is minus the optimum of the linear program
// over transition measures w(q, k) >= 0 (k a lifted displacement in cells)
//   min sum w (S(q, q+k) - c.k/N)   s.t.  sum_k w(q,k) = sum_{q',k: q'+k = q} w(q',k),  sum w = 1.
// The discrete Lax-Oleinik iteration gives an independent value.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/detail/parallel.hpp"
#include "matherlab/integrate.hpp"
#include "matherlab/lp.hpp"
#include "matherlab/measure.hpp"
#include "matherlab/systems.hpp"

namespace matherlab {

inline constexpr double kDefaultDisplacementCap = 6.5;

/// l(q, v) = |v|^2/2 - U(q) on T^n.
struct MechanicalLagrangian {
  std::string name = "free";
  std::size_t dof = 1;
  std::function<double(std::span<const double>)> U;
  std::function<void(std::span<const double>, std::span<double>)> dU;
  std::function<void(std::span<const double>, std::span<double>)> d2U;  // row-major dof x dof

  double value(std::span<const double> q, std::span<const double> v) const {
    return 0.5 * detail::dot(v, v) - (U ? U(q) : 0.0);
  }

  /// Legendre dual H = |p|^2/2 + U(q).
  HamiltonianSystem hamiltonian() const {
    const std::size_t n = dof;
    auto u = U ? U : [](std::span<const double>) { return 0.0; };
    auto du = dU ? dU : [n](std::span<const double>, std::span<double> g) {
      for (std::size_t i = 0; i < n; ++i) g[i] = 0.0;
    };
    return systems::mechanical(name, n, u, du);
  }

  static MechanicalLagrangian free(std::size_t n) {
    MechanicalLagrangian l;
    l.name = "free";
    l.dof = n;
    return l;
  }

  static MechanicalLagrangian pendulum() {
    MechanicalLagrangian l;
    l.name = "pendulum";
    l.dof = 1;
    l.U = [](std::span<const double> q) { return std::cos(detail::kTwoPi * q[0]); };
    l.dU = [](std::span<const double> q, std::span<double> g) {
      g[0] = -detail::kTwoPi * std::sin(detail::kTwoPi * q[0]);
    };
    l.d2U = [](std::span<const double> q, std::span<double> h) {
      h[0] = -detail::kTwoPi * detail::kTwoPi * std::cos(detail::kTwoPi * q[0]);
    };
    return l;
  }
};

struct PathResult {
  double action = 0.0;
  std::vector<double> path;  // (substeps + 1) lifted points, each of size dof
  int iterations = 0;
};

/// Minimise sum_j [ |x_{j+1}-x_j|^2 / (2 dt) - dt U((x_j + x_{j+1})/2) ] over
/// interior points, x_0 = q, x_M = q + d, dt = 1/M. Newton from the straight
/// line, Levenberg shift when the Hessian is not positive definite, Armijo
/// backtracking.
inline PathResult minimize_path(const MechanicalLagrangian& l, std::span<const double> q,
                                std::span<const double> d, int substeps) {
  const std::size_t n = l.dof;
  const auto M = static_cast<std::size_t>(std::max(1, substeps));
  const double dt = 1.0 / static_cast<double>(M);
  PathResult out;
  out.path.resize((M + 1) * n);
  for (std::size_t j = 0; j <= M; ++j)
    for (std::size_t a = 0; a < n; ++a) out.path[j * n + a] = q[a] + d[a] * static_cast<double>(j) * dt;

  std::vector<double> mid(n), grad(n), hess(n * n);
  auto action = [&](const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t j = 0; j < M; ++j) {
      double kin = 0.0;
      for (std::size_t a = 0; a < n; ++a) {
        const double dx = x[(j + 1) * n + a] - x[j * n + a];
        kin += dx * dx;
        mid[a] = 0.5 * (x[(j + 1) * n + a] + x[j * n + a]);
      }
      s += 0.5 * kin / dt - (l.U ? dt * l.U(mid) : 0.0);
    }
    return s;
  };

  out.action = action(out.path);
  if (M == 1 || !l.U) return out;

  const std::size_t dim = (M - 1) * n;
  std::vector<double> g(dim), step, trial;
  for (int it = 0; it < 100; ++it) {
    out.iterations = it;
    detail::Matrix Hm(dim, dim);
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t j = 1; j < M; ++j)
      for (std::size_t a = 0; a < n; ++a) {
        const std::size_t r = (j - 1) * n + a;
        g[r] = (2.0 * out.path[j * n + a] - out.path[(j - 1) * n + a] - out.path[(j + 1) * n + a]) / dt;
        Hm(r, r) = 2.0 / dt;
        if (j + 1 < M) Hm(r, r + n) = Hm(r + n, r) = -1.0 / dt;
      }
    for (std::size_t j = 0; j < M; ++j) {
      for (std::size_t a = 0; a < n; ++a) mid[a] = 0.5 * (out.path[j * n + a] + out.path[(j + 1) * n + a]);
      l.dU(mid, grad);
      if (l.d2U) {
        l.d2U(mid, hess);
      } else {
        std::fill(hess.begin(), hess.end(), 0.0);
      }
      // segment j touches interior points j and j+1
      for (std::size_t side = 0; side < 2; ++side) {
        const std::size_t pj = j + side;
        if (pj == 0 || pj == M) continue;
        for (std::size_t a = 0; a < n; ++a) {
          g[(pj - 1) * n + a] -= 0.5 * dt * grad[a];
          for (std::size_t other = 0; other < 2; ++other) {
            const std::size_t pk = j + other;
            if (pk == 0 || pk == M) continue;
            for (std::size_t b = 0; b < n; ++b) Hm((pj - 1) * n + a, (pk - 1) * n + b) -= 0.25 * dt * hess[a * n + b];
          }
        }
      }
    }
    if (detail::norm_inf(g) < 1e-12) break;

    std::vector<double> rhs(dim);
    for (std::size_t r = 0; r < dim; ++r) rhs[r] = -g[r];
    double mu = 0.0;
    while (true) {
      detail::Matrix shifted = Hm;
      for (std::size_t r = 0; r < dim; ++r) shifted(r, r) += mu;
      if (detail::cholesky_solve(shifted, rhs, step)) break;
      mu = mu == 0.0 ? 1e-3 * (2.0 / dt) : 2.0 * mu;
    }
    const double slope = detail::dot(g, step);
    double t = 1.0;
    trial = out.path;
    bool moved = false;
    while (t > 1e-12) {
      for (std::size_t j = 1; j < M; ++j)
        for (std::size_t a = 0; a < n; ++a) trial[j * n + a] = out.path[j * n + a] + t * step[(j - 1) * n + a];
      const double value = action(trial);
      if (value <= out.action + 1e-4 * t * slope) {
        out.path = trial;
        out.action = value;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved || t * detail::norm_inf(step) < 1e-15) break;
  }
  out.action = action(out.path);
  return out;
}

/// One-step actions S(q, q + k/N) on the grid (Z/N)^n for |k_a| <= K cells.
struct DiscreteLagrangian {
  MechanicalLagrangian lagrangian;
  std::size_t dim = 1;
  std::size_t N = 0;
  int K = 0;
  double R = kDefaultDisplacementCap;
  int substeps = 8;
  std::vector<double> S;  // node-major, nodes() x displacements()

  std::size_t side() const { return static_cast<std::size_t>(2 * K + 1); }
  std::size_t nodes() const { return dim == 1 ? N : N * N; }
  std::size_t displacements() const { return dim == 1 ? side() : side() * side(); }
  double at(std::size_t node, std::size_t disp) const { return S[node * displacements() + disp]; }

  std::vector<int> cells(std::size_t disp) const {
    if (dim == 1) return {static_cast<int>(disp) - K};
    return {static_cast<int>(disp / side()) - K, static_cast<int>(disp % side()) - K};
  }

  std::vector<double> displacement(std::size_t disp) const {
    const auto k = cells(disp);
    std::vector<double> d(dim);
    for (std::size_t a = 0; a < dim; ++a) d[a] = static_cast<double>(k[a]) / static_cast<double>(N);
    return d;
  }

  std::vector<double> point(std::size_t node) const {
    if (dim == 1) return {static_cast<double>(node) / static_cast<double>(N)};
    return {static_cast<double>(node / N) / static_cast<double>(N), static_cast<double>(node % N) / static_cast<double>(N)};
  }

  std::size_t target(std::size_t node, std::size_t disp) const {
    const auto k = cells(disp);
    const auto Ni = static_cast<long>(N);
    auto wrap = [Ni](long v) { return static_cast<std::size_t>(((v % Ni) + Ni) % Ni); };
    if (dim == 1) return wrap(static_cast<long>(node) + k[0]);
    return wrap(static_cast<long>(node / N) + k[0]) * N + wrap(static_cast<long>(node % N) + k[1]);
  }

  std::size_t zero_displacement() const { return dim == 1 ? static_cast<std::size_t>(K) : static_cast<std::size_t>(K) * side() + K; }

  DiscreteLagrangian shifted(double k) const {
    DiscreteLagrangian out = *this;
    for (double& s : out.S) s += k;
    return out;
  }
};

inline DiscreteLagrangian discretize_lagrangian(const MechanicalLagrangian& l, std::size_t N,
                                                double R = kDefaultDisplacementCap, int substeps = 8,
                                                std::size_t threads = 0) {
  if (l.dof < 1 || l.dof > 2) throw ConfigError("discretize_lagrangian: only T^1 and T^2 are supported");
  if (N < 8) throw ConfigError("discretize_lagrangian: N must be >= 8");
  if (!(R > 0.0)) throw ConfigError("discretize_lagrangian: R must be > 0");
  if (substeps < 1) throw ConfigError("discretize_lagrangian: substeps must be >= 1");
  if (l.U && (!l.dU)) throw ConfigError("discretize_lagrangian: potential gradient required");
  DiscreteLagrangian out;
  out.lagrangian = l;
  out.dim = l.dof;
  out.N = N;
  out.R = R;
  out.K = static_cast<int>(std::floor(R * static_cast<double>(N) + 1e-9));
  out.substeps = substeps;
  const std::size_t D = out.displacements();
  out.S.assign(out.nodes() * D, 0.0);
  detail::parallel_for(out.nodes(), threads, [&](std::size_t i) {
    const auto q = out.point(i);
    for (std::size_t k = 0; k < D; ++k) out.S[i * D + k] = minimize_path(l, q, out.displacement(k), substeps).action;
  });
  return out;
}

struct TransitionEntry {
  std::size_t node = 0;
  std::size_t disp = 0;
  double weight = 0.0;
};

struct TransitionMeasure {
  std::vector<TransitionEntry> entries;
  double invariance_residual = 0.0;
};

struct AlphaResult {
  std::vector<double> c;
  double alpha = 0.0;
  TransitionMeasure measure;
  std::vector<double> rotation;
  double duality_gap = 0.0;
  double dual_infeasibility = 0.0;
  double diagonal_objective = 0.0;  // best rest measure, an upper bound on -alpha
  std::size_t iterations = 0;
  std::vector<std::size_t> basis;
};

class AlphaSolver {
 public:
  explicit AlphaSolver(const DiscreteLagrangian& S, lp::Options options = {}) : S_(S), options_(options) {
    const std::size_t nodes = S.nodes();
    const std::size_t D = S.displacements();
    problem_ = lp::Problem(nodes);
    problem_.rhs[nodes - 1] = 1.0;
    problem_.row_index.reserve(nodes * D * 3);
    problem_.value.reserve(nodes * D * 3);
    std::vector<std::pair<std::size_t, double>> entries;
    for (std::size_t i = 0; i < nodes; ++i) {
      for (std::size_t k = 0; k < D; ++k) {
        entries.clear();
        const std::size_t t = S.target(i, k);
        if (t != i) {
          if (i + 1 < nodes) entries.emplace_back(i, 1.0);
          if (t + 1 < nodes) entries.emplace_back(t, -1.0);
        }
        entries.emplace_back(nodes - 1, 1.0);
        std::sort(entries.begin(), entries.end());
        problem_.add_column(0.0, entries);
      }
    }
  }

  AlphaResult solve(std::span<const double> c, const std::vector<std::size_t>* warm = nullptr) const {
    require_dim(c.size(), S_.dim, "alpha_lp class");
    const std::size_t nodes = S_.nodes();
    const std::size_t D = S_.displacements();
    lp::Problem p = problem_;
    std::vector<std::vector<double>> disp(D);
    for (std::size_t k = 0; k < D; ++k) disp[k] = S_.displacement(k);
    double diag = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes; ++i) {
      for (std::size_t k = 0; k < D; ++k) p.cost[i * D + k] = S_.at(i, k) - detail::dot(c, disp[k]);
      diag = std::min(diag, S_.at(i, S_.zero_displacement()));
    }
    const lp::Solution sol = lp::solve(p, options_, warm);
    if (sol.status != lp::Status::Optimal)
      throw NumericalError(std::string("alpha_lp: simplex ended with status ") + lp::to_string(sol.status));

    AlphaResult r;
    r.c.assign(c.begin(), c.end());
    r.alpha = -sol.objective;
    r.duality_gap = sol.duality_gap();
    r.dual_infeasibility = sol.dual_infeasibility;
    r.diagonal_objective = diag;
    r.iterations = sol.iterations;
    r.basis = sol.basis;
    r.rotation.assign(S_.dim, 0.0);
    std::vector<double> balance(nodes, 0.0);
    for (std::size_t j = 0; j < sol.x.size(); ++j) {
      if (sol.x[j] <= 0.0) continue;
      const std::size_t i = j / D, k = j % D;
      r.measure.entries.push_back({i, k, sol.x[j]});
      for (std::size_t a = 0; a < S_.dim; ++a) r.rotation[a] += sol.x[j] * disp[k][a];
      balance[i] += sol.x[j];
      balance[S_.target(i, k)] -= sol.x[j];
    }
    for (double b : balance) r.measure.invariance_residual = std::max(r.measure.invariance_residual, std::abs(b));
    return r;
  }

  const DiscreteLagrangian& lagrangian() const { return S_; }

 private:
  const DiscreteLagrangian& S_;
  lp::Options options_;
  lp::Problem problem_;
};

inline AlphaResult alpha_lp(const DiscreteLagrangian& S, std::span<const double> c) {
  return AlphaSolver(S).solve(c);
}

struct LaxOleinikResult {
  double alpha = 0.0;
  double oscillation = 0.0;  // final osc(Tu - u); alpha is within half of it
  std::size_t iterations = 0;
  std::vector<double> u;
};

/// Averaged iteration u <- (u + Tu)/2 of the min-plus operator
/// (Tu)(q') = min_q [u(q) + S(q,q') - c.(q'-q)], normalised so max u = 0.
/// Since min(Tu - u) <= -alpha <= max(Tu - u) for every u, the result is the
/// midpoint of that interval once it is shorter than tol.
inline LaxOleinikResult alpha_lax_oleinik(const DiscreteLagrangian& S, std::span<const double> c,
                                          std::size_t max_iters = 200000, double tol = 1e-9) {
  require_dim(c.size(), S.dim, "alpha_lax_oleinik class");
  const std::size_t nodes = S.nodes();
  const std::size_t D = S.displacements();
  std::vector<double> shift(D);
  for (std::size_t k = 0; k < D; ++k) shift[k] = detail::dot(c, S.displacement(k));
  std::vector<std::size_t> targets(nodes * D);
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t k = 0; k < D; ++k) targets[i * D + k] = S.target(i, k);

  LaxOleinikResult r;
  r.u.assign(nodes, 0.0);
  std::vector<double> v(nodes);
  double osc = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= max_iters; ++it) {
    std::fill(v.begin(), v.end(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < nodes; ++i) {
      const double ui = r.u[i];
      const double* row = &S.S[i * D];
      const std::size_t* tg = &targets[i * D];
      for (std::size_t k = 0; k < D; ++k) {
        const double val = ui + row[k] - shift[k];
        if (val < v[tg[k]]) v[tg[k]] = val;
      }
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < nodes; ++i) {
      lo = std::min(lo, v[i] - r.u[i]);
      hi = std::max(hi, v[i] - r.u[i]);
    }
    osc = hi - lo;
    r.iterations = it;
    r.oscillation = osc;
    if (osc < tol) {
      r.alpha = -0.5 * (lo + hi);
      return r;
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes; ++i) {
      r.u[i] = 0.5 * (r.u[i] + v[i]);
      top = std::max(top, r.u[i]);
    }
    for (double& x : r.u) x -= top;
  }
  throw ConvergenceError("alpha_lax_oleinik: no convergence", osc);
}

struct BetaResult {
  double value = 0.0;
  std::vector<double> argmax;
  bool outside_reliable_range = false;  // maximiser sits on the edge of the sampled classes
};

/// beta(h) = max over samples of <c, h> - alpha(c).
inline BetaResult beta_conjugate(const std::vector<std::pair<std::vector<double>, double>>& alpha_samples,
                                 std::span<const double> h) {
  if (alpha_samples.empty()) throw ConfigError("beta_conjugate: no samples");
  const std::size_t m = h.size();
  BetaResult r;
  r.value = -std::numeric_limits<double>::infinity();
  std::vector<double> lo(m, std::numeric_limits<double>::infinity()), hi(m, -std::numeric_limits<double>::infinity());
  for (const auto& [c, a] : alpha_samples) {
    require_dim(c.size(), m, "beta_conjugate");
    for (std::size_t i = 0; i < m; ++i) {
      lo[i] = std::min(lo[i], c[i]);
      hi[i] = std::max(hi[i], c[i]);
    }
    const double v = detail::dot(c, h) - a;
    if (v > r.value) {
      r.value = v;
      r.argmax = c;
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    if (h[i] != 0.0 && (r.argmax[i] == lo[i] || r.argmax[i] == hi[i])) r.outside_reliable_range = true;
  return r;
}

struct SubgradientReport {
  double max_violation = 0.0;
  bool holds = true;
  std::size_t checked = 0;
};

/// Checks alpha(c') >= alpha(c) + <c' - c, rho> - slack on every sample.
inline SubgradientReport subdifferential_contains_rotation(
    const AlphaResult& result, const std::vector<std::pair<std::vector<double>, double>>& alpha_samples,
    double slack) {
  SubgradientReport rep;
  for (const auto& [c, a] : alpha_samples) {
    require_dim(c.size(), result.c.size(), "subdifferential_contains_rotation");
    double lin = result.alpha;
    for (std::size_t i = 0; i < c.size(); ++i) lin += (c[i] - result.c[i]) * result.rotation[i];
    rep.max_violation = std::max(rep.max_violation, lin - a);
    ++rep.checked;
  }
  rep.holds = rep.max_violation <= slack;
  return rep;
}

/// Occupation measure on T*T^n of the minimising transitions: each support
/// transition contributes its minimising path (recomputed with
/// substep_factor times the grid substeps), one atom (midpoint, slope) per
/// segment.
inline OccupationMeasure transition_phase_measure(const DiscreteLagrangian& S, const AlphaResult& r,
                                                  int substep_factor = 2) {
  const std::size_t n = S.dim;
  const int M = S.substeps * std::max(1, substep_factor);
  OccupationMeasure mu;
  mu.chart = Chart::CotangentTorus;
  mu.dof = n;
  mu.provenance = "minimising transition measure";
  for (const auto& e : r.measure.entries) {
    const auto path = minimize_path(S.lagrangian, S.point(e.node), S.displacement(e.disp), M);
    for (int j = 0; j < M; ++j) {
      State x(2 * n);
      for (std::size_t a = 0; a < n; ++a) {
        const double x0 = path.path[j * n + a], x1 = path.path[(j + 1) * n + a];
        x[a] = wrap_unit(0.5 * (x0 + x1));
        x[n + a] = (x1 - x0) * M;
      }
      mu.atoms.push_back(std::move(x));
      mu.weights.push_back(e.weight / M);
    }
  }
  return mu;
}

struct AlphaScanRow {
  std::vector<double> c;
  double alpha = 0.0;
  std::vector<double> rotation;
  double duality_gap = 0.0;
  double lax_oleinik = 0.0;
  AlphaResult result;
};

inline std::vector<AlphaScanRow> alpha_scan(const DiscreteLagrangian& S, const std::vector<std::vector<double>>& classes,
                                            std::size_t threads = 0, double lo_tol = 1e-9) {
  const AlphaSolver solver(S);
  std::vector<AlphaScanRow> rows(classes.size());
  detail::parallel_for(classes.size(), threads, [&](std::size_t i) {
    AlphaScanRow& row = rows[i];
    row.result = solver.solve(classes[i]);
    row.c = classes[i];
    row.alpha = row.result.alpha;
    row.rotation = row.result.rotation;
    row.duality_gap = row.result.duality_gap;
    row.lax_oleinik = alpha_lax_oleinik(S, classes[i], 200000, lo_tol).alpha;
  });
  return rows;
}

inline void write_alpha_scan_csv(std::ostream& os, const std::vector<AlphaScanRow>& rows) {
  if (rows.empty()) return;
  const std::size_t n = rows.front().c.size();
  for (std::size_t i = 0; i < n; ++i) os << 'c' << i + 1 << ',';
  os << "alpha";
  for (std::size_t i = 0; i < n; ++i) os << ",rho" << i + 1;
  os << ",duality_gap,lax_oleinik\n";
  for (const auto& r : rows) {
    for (double v : r.c) os << format_number(v) << ',';
    os << format_number(r.alpha);
    for (double v : r.rotation) os << ',' << format_number(v);
    os << ',' << format_number(r.duality_gap) << ',' << format_number(r.lax_oleinik) << '\n';
  }
}

}  // namespace matherlab
