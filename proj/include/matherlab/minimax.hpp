#pragma once

// Derivative-free and smoothed minimisation of max-type objectives.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/detail/parallel.hpp"

namespace matherlab {

struct MinimizeResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
};

struct NelderMeadOptions {
  double initial_step = 0.1;
  std::size_t max_evaluations = 4000;
  double tolerance = 1e-12;  // stop when the simplex values spread below this
  int restarts = 2;          // re-seed the simplex around the best point
};

/// Nelder-Mead with standard coefficients. The returned value never exceeds
/// f(x0).
inline MinimizeResult nelder_mead(const std::function<double(std::span<const double>)>& f, std::vector<double> x0,
                                  const NelderMeadOptions& opt = {}) {
  const std::size_t n = x0.size();
  MinimizeResult best;
  best.x = x0;
  best.value = f(x0);
  best.evaluations = 1;
  if (n == 0) return best;

  for (int round = 0; round <= opt.restarts && best.evaluations < opt.max_evaluations; ++round) {
    std::vector<std::vector<double>> pts(n + 1, best.x);
    std::vector<double> vals(n + 1, best.value);
    const double step = opt.initial_step / std::pow(4.0, round);
    for (std::size_t i = 0; i < n; ++i) {
      pts[i + 1][i] += step;
      vals[i + 1] = f(pts[i + 1]);
      ++best.evaluations;
    }
    std::vector<std::size_t> order(n + 1);
    std::vector<double> centroid(n), xr(n), xe(n), xc(n);
    while (best.evaluations < opt.max_evaluations) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[n - 1];
      if (vals[hi] - vals[lo] <= opt.tolerance * (1.0 + std::abs(vals[lo]))) break;
      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t k = 0; k <= n; ++k)
        if (k != hi)
          for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) xr[i] = centroid[i] + (centroid[i] - pts[hi][i]);
      const double fr = f(xr);
      ++best.evaluations;
      if (fr < vals[lo]) {
        for (std::size_t i = 0; i < n; ++i) xe[i] = centroid[i] + 2.0 * (xr[i] - centroid[i]);
        const double fe = f(xe);
        ++best.evaluations;
        if (fe < fr) {
          pts[hi] = xe;
          vals[hi] = fe;
        } else {
          pts[hi] = xr;
          vals[hi] = fr;
        }
      } else if (fr < vals[second]) {
        pts[hi] = xr;
        vals[hi] = fr;
      } else {
        const bool outside = fr < vals[hi];
        for (std::size_t i = 0; i < n; ++i)
          xc[i] = outside ? centroid[i] + 0.5 * (xr[i] - centroid[i]) : centroid[i] + 0.5 * (pts[hi][i] - centroid[i]);
        const double fc = f(xc);
        ++best.evaluations;
        if (fc < std::min(fr, vals[hi])) {
          pts[hi] = xc;
          vals[hi] = fc;
        } else {
          for (std::size_t k = 0; k <= n; ++k) {
            if (k == lo) continue;
            for (std::size_t i = 0; i < n; ++i) pts[k][i] = pts[lo][i] + 0.5 * (pts[k][i] - pts[lo][i]);
            vals[k] = f(pts[k]);
            ++best.evaluations;
          }
        }
      }
    }
    for (std::size_t k = 0; k <= n; ++k) {
      if (vals[k] < best.value) {
        best.value = vals[k];
        best.x = pts[k];
      }
    }
  }
  return best;
}

/// Pieces f_j(a) = offset_j + <slope_j, a>; minimises max_j f_j.
struct AffinePieces {
  std::size_t dim = 0;
  std::vector<double> offset;
  std::vector<double> slope;  // row-major, pieces x dim

  std::size_t size() const { return offset.size(); }

  double piece(std::size_t j, std::span<const double> a) const {
    double v = offset[j];
    const double* row = &slope[j * dim];
    for (std::size_t i = 0; i < dim; ++i) v += row[i] * a[i];
    return v;
  }

  double max(std::span<const double> a) const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < size(); ++j) m = std::max(m, piece(j, a));
    return m;
  }

  /// (1/beta) log sum exp(beta f_j) and its gradient.
  double softmax(std::span<const double> a, double beta, std::vector<double>& grad) const {
    std::vector<double> v(size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < size(); ++j) {
      v[j] = piece(j, a);
      m = std::max(m, v[j]);
    }
    double z = 0.0;
    for (double& x : v) {
      x = std::exp(beta * (x - m));
      z += x;
    }
    grad.assign(dim, 0.0);
    for (std::size_t j = 0; j < size(); ++j) {
      const double p = v[j] / z;
      if (p < 1e-300) continue;
      const double* row = &slope[j * dim];
      for (std::size_t i = 0; i < dim; ++i) grad[i] += p * row[i];
    }
    return m + std::log(z) / beta;
  }
};

struct SoftmaxOptions {
  double beta_start = 10.0;
  double beta_end = 1e4;
  std::size_t steps_per_stage = 200;
  std::size_t multistarts = 8;
  double init_scale = 0.1;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

/// Softmax continuation: gradient descent with backtracking on the smoothed
/// max while beta doubles from beta_start to beta_end, from the given starts
/// plus random ones. Reports the exact max at the best iterate seen.
inline MinimizeResult softmax_minimax(const AffinePieces& pieces, const std::vector<std::vector<double>>& starts,
                                      const SoftmaxOptions& opt = {}) {
  std::vector<std::vector<double>> all = starts;
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u(-opt.init_scale, opt.init_scale);
  while (all.size() < starts.size() + opt.multistarts) {
    std::vector<double> a(pieces.dim);
    for (double& x : a) x = u(rng);
    all.push_back(std::move(a));
  }
  std::vector<MinimizeResult> results(all.size());
  detail::parallel_for(all.size(), opt.threads, [&](std::size_t s) {
    MinimizeResult r;
    std::vector<double> a = all[s];
    r.x = a;
    r.value = pieces.max(a);
    std::vector<double> g, trial(pieces.dim), gt;
    double t = 1.0;
    for (double beta = opt.beta_start; beta <= opt.beta_end * (1.0 + 1e-12); beta *= 2.0) {
      double F = pieces.softmax(a, beta, g);
      for (std::size_t k = 0; k < opt.steps_per_stage; ++k) {
        const double g2 = detail::dot(g, g);
        if (g2 < 1e-30) break;
        t = std::min(1.0, 2.0 * t);
        bool accepted = false;
        while (t > 1e-14) {
          for (std::size_t i = 0; i < pieces.dim; ++i) trial[i] = a[i] - t * g[i];
          const double Ft = pieces.softmax(trial, beta, gt);
          if (Ft <= F - 0.5 * t * g2) {
            a = trial;
            F = Ft;
            g = gt;
            accepted = true;
            break;
          }
          t *= 0.5;
        }
        ++r.evaluations;
        if (!accepted) break;
        const double exact = pieces.max(a);
        if (exact < r.value) {
          r.value = exact;
          r.x = a;
        }
      }
    }
    results[s] = std::move(r);
  });
  MinimizeResult best = results.front();
  std::size_t evals = 0;
  for (const auto& r : results) {
    evals += r.evaluations;
    if (r.value < best.value) best = r;
  }
  best.evaluations = evals;
  return best;
}

}  // namespace matherlab
