#pragma once

// Revised simplex for  min c.x  s.t.  A x = b, x >= 0.
//
// Columns are stored sparse (CSC); the basis inverse is dense and updated in
// product form with periodic refactorisation. Phase 1 starts from an
// artificial basis. Artificials still basic after phase 1 are held at zero.
// Pricing is Dantzig's rule, switching to Bland's rule during long runs of
// degenerate pivots.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "matherlab/detail/linalg.hpp"
#include "matherlab/error.hpp"

namespace matherlab::lp {

struct Problem {
  std::size_t rows = 0;
  std::vector<double> rhs;
  std::vector<double> cost;
  std::vector<std::size_t> col_start{0};
  std::vector<std::size_t> row_index;
  std::vector<double> value;

  explicit Problem(std::size_t m = 0) : rows(m), rhs(m, 0.0) {}

  std::size_t cols() const { return cost.size(); }

  void add_column(double c, std::span<const std::pair<std::size_t, double>> entries) {
    for (const auto& [r, v] : entries) {
      if (r >= rows) throw DimensionError("lp::Problem: row index out of range");
      if (v == 0.0) continue;
      row_index.push_back(r);
      value.push_back(v);
    }
    cost.push_back(c);
    col_start.push_back(row_index.size());
  }
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration limit";
  }
  return "?";
}

struct Options {
  double optimality_tol = 1e-11;
  double feasibility_tol = 1e-9;
  double pivot_tol = 1e-9;
  std::size_t max_iterations = 200000;
  std::size_t refactor_every = 50;
  std::size_t degenerate_streak = 40;
};

struct Solution {
  Status status = Status::IterationLimit;
  std::vector<double> x;
  std::vector<double> dual;
  double objective = 0.0;
  double dual_objective = 0.0;
  double dual_infeasibility = 0.0;    // max(0, -min reduced cost)
  double primal_infeasibility = 0.0;  // |A x - b|_inf
  std::size_t iterations = 0;
  std::vector<std::size_t> basis;     // basic column per row; >= cols() means artificial

  /// |primal - dual| plus the dual infeasibility: bounds the distance of the
  /// objective from the true optimum when sum of x is normalised to 1.
  double duality_gap() const { return std::abs(objective - dual_objective) + dual_infeasibility; }
};

namespace detail {

class Simplex {
 public:
  Simplex(const Problem& p, const Options& o) : p_(p), o_(o), m_(p.rows), n_(p.cols()) {
    sign_.assign(m_, 1.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (p_.rhs[r] < 0.0) sign_[r] = -1.0;
  }

  bool warm_start(const std::vector<std::size_t>& basis) {
    if (basis.size() != m_) return false;
    basis_ = basis;
    for (std::size_t j : basis_)
      if (j >= n_ + m_) return false;
    try {
      refactor();
    } catch (const NumericalError&) {
      return false;
    }
    for (std::size_t r = 0; r < m_; ++r) {
      if (xb_[r] < -o_.feasibility_tol) return false;
      if (basis_[r] >= n_ && std::abs(xb_[r]) > o_.feasibility_tol) return false;
    }
    return true;
  }

  void cold_start() {
    basis_.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) basis_[r] = n_ + r;
    refactor();
  }

  Status run(bool phase_one) {
    phase_one_ = phase_one;
    std::size_t since_refactor = 0;
    std::size_t streak = 0;
    bool bland = false;
    std::vector<double> y(m_), w(m_);
    std::vector<char> basic(n_ + m_, 0);
    for (std::size_t j : basis_) basic[j] = 1;

    for (;;) {
      if (iterations_ >= o_.max_iterations) return Status::IterationLimit;
      compute_dual(y);

      std::size_t enter = npos;
      double best = -o_.optimality_tol;
      for (std::size_t j = 0; j < n_; ++j) {
        if (basic[j]) continue;
        const double d = cost(j) - column_dot(j, y);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter == npos) return Status::Optimal;

      std::fill(w.begin(), w.end(), 0.0);
      for (std::size_t k = p_.col_start[enter]; k < p_.col_start[enter + 1]; ++k) {
        const std::size_t r = p_.row_index[k];
        const double v = p_.value[k];
        for (std::size_t i = 0; i < m_; ++i) w[i] += binv_(i, r) * v;
      }

      std::size_t leave = npos;
      double theta = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const bool fixed_zero = !phase_one_ && basis_[i] >= n_;
        double ratio;
        if (fixed_zero) {
          if (std::abs(w[i]) <= o_.pivot_tol) continue;
          ratio = 0.0;
        } else {
          if (w[i] <= o_.pivot_tol) continue;
          ratio = std::max(0.0, xb_[i]) / w[i];
        }
        bool take = false;
        if (leave == npos || ratio < theta - 1e-12) {
          take = true;
        } else if (ratio <= theta + 1e-12) {
          take = bland ? basis_[i] < basis_[leave] : std::abs(w[i]) > std::abs(w[leave]);
        }
        if (take) {
          leave = i;
          theta = ratio;
        }
      }
      if (leave == npos) return Status::Unbounded;

      for (std::size_t i = 0; i < m_; ++i) xb_[i] -= theta * w[i];
      xb_[leave] = theta;
      const double piv = w[leave];
      for (std::size_t c = 0; c < m_; ++c) binv_(leave, c) /= piv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leave || w[i] == 0.0) continue;
        const double f = w[i];
        for (std::size_t c = 0; c < m_; ++c) binv_(i, c) -= f * binv_(leave, c);
      }
      basic[basis_[leave]] = 0;
      basis_[leave] = enter;
      basic[enter] = 1;
      ++iterations_;

      if (theta <= o_.feasibility_tol) {
        if (++streak >= o_.degenerate_streak) bland = true;
      } else {
        streak = 0;
        bland = false;
      }
      if (++since_refactor >= o_.refactor_every) {
        refactor();
        since_refactor = 0;
      }
    }
  }

  double artificial_mass() const {
    double s = 0.0;
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] >= n_) s += std::max(0.0, xb_[r]);
    return s;
  }

  Solution finish(Status status) {
    refactor();
    phase_one_ = false;
    Solution s;
    s.status = status;
    s.iterations = iterations_;
    s.basis = basis_;
    s.x.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r)
      if (basis_[r] < n_) s.x[basis_[r]] = std::max(0.0, xb_[r]);
    std::vector<double> y(m_);
    compute_dual(y);
    s.dual.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) s.dual[r] = y[r] * sign_[r];
    std::vector<double> terms(n_);
    for (std::size_t j = 0; j < n_; ++j) terms[j] = p_.cost[j] * s.x[j];
    s.objective = matherlab::detail::pairwise_sum(terms);
    double dobj = 0.0;
    for (std::size_t r = 0; r < m_; ++r) dobj += s.dual[r] * p_.rhs[r];
    s.dual_objective = dobj;
    double worst = 0.0;
    for (std::size_t j = 0; j < n_; ++j) worst = std::max(worst, -(cost(j) - column_dot(j, y)));
    s.dual_infeasibility = worst;
    std::vector<double> ax(m_, 0.0);
    for (std::size_t j = 0; j < n_; ++j) {
      if (s.x[j] == 0.0) continue;
      for (std::size_t k = p_.col_start[j]; k < p_.col_start[j + 1]; ++k) ax[p_.row_index[k]] += p_.value[k] * s.x[j];
    }
    double res = 0.0;
    for (std::size_t r = 0; r < m_; ++r) res = std::max(res, std::abs(ax[r] - p_.rhs[r]));
    s.primal_infeasibility = res;
    return s;
  }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  double cost(std::size_t j) const {
    if (j >= n_) return phase_one_ ? 1.0 : 0.0;
    return phase_one_ ? 0.0 : p_.cost[j];
  }

  // y . a_j with rows scaled by sign (the scaled system has b >= 0).
  double column_dot(std::size_t j, const std::vector<double>& y) const {
    if (j >= n_) return y[j - n_];
    double s = 0.0;
    for (std::size_t k = p_.col_start[j]; k < p_.col_start[j + 1]; ++k)
      s += y[p_.row_index[k]] * p_.value[k] * sign_[p_.row_index[k]];
    return s;
  }

  void compute_dual(std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost(basis_[i]);
      if (cb == 0.0) continue;
      for (std::size_t c = 0; c < m_; ++c) y[c] += cb * binv_(i, c);
    }
  }

  void refactor() {
    matherlab::detail::Matrix B(m_, m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const std::size_t j = basis_[i];
      if (j >= n_) {
        B(j - n_, i) = 1.0;
      } else {
        for (std::size_t k = p_.col_start[j]; k < p_.col_start[j + 1]; ++k)
          B(p_.row_index[k], i) = p_.value[k] * sign_[p_.row_index[k]];
      }
    }
    const matherlab::detail::LU lu(B);
    binv_ = matherlab::detail::Matrix(m_, m_);
    std::vector<double> e(m_, 0.0);
    for (std::size_t c = 0; c < m_; ++c) {
      e[c] = 1.0;
      const auto col = lu.solve(e);
      e[c] = 0.0;
      for (std::size_t i = 0; i < m_; ++i) binv_(i, c) = col[i];
    }
    xb_.assign(m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      for (std::size_t c = 0; c < m_; ++c) xb_[i] += binv_(i, c) * p_.rhs[c] * sign_[c];
    for (double& v : xb_)
      if (std::abs(v) < 1e-14) v = 0.0;
  }

  const Problem& p_;
  Options o_;
  std::size_t m_, n_;
  std::vector<double> sign_;
  std::vector<std::size_t> basis_;
  matherlab::detail::Matrix binv_;
  std::vector<double> xb_;
  std::size_t iterations_ = 0;
  bool phase_one_ = false;
};

}  // namespace detail

inline Solution solve(const Problem& problem, const Options& options = {},
                      const std::vector<std::size_t>* warm_basis = nullptr) {
  if (problem.rhs.size() != problem.rows) throw DimensionError("lp::solve: rhs size");
  detail::Simplex simplex(problem, options);
  if (!(warm_basis && simplex.warm_start(*warm_basis))) {
    simplex.cold_start();
    const Status s1 = simplex.run(true);
    if (s1 == Status::IterationLimit) return simplex.finish(s1);
    if (simplex.artificial_mass() > options.feasibility_tol) return simplex.finish(Status::Infeasible);
  }
  return simplex.finish(simplex.run(false));
}

}  // namespace matherlab::lp
