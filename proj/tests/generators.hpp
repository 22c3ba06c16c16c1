#pragma once

// Small random generators for property tests. Every property runs over a
// fixed seed so failures reproduce.

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace gen {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
  bool coin() { return integer(0, 1) == 1; }

  std::vector<double> vec(std::size_t n, double lo, double hi) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  // Point of T*T^n: angles in [0,1), momenta in [-p, p].
  std::vector<double> torus_state(std::size_t n, double p) {
    std::vector<double> x(2 * n);
    for (std::size_t i = 0; i < n; ++i) x[i] = uniform(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) x[n + i] = uniform(-p, p);
    return x;
  }

  // Probability vector of length n with all entries positive.
  std::vector<double> simplex(std::size_t n) {
    std::vector<double> w(n);
    double s = 0.0;
    for (double& x : w) s += (x = uniform(0.05, 1.0));
    for (double& x : w) x /= s;
    return w;
  }

 private:
  std::mt19937_64 eng_;
};

// Runs prop(rng, case_index) for `cases` cases.
inline void for_all(std::size_t cases, std::uint64_t seed, const std::function<void(Rng&, std::size_t)>& prop) {
  Rng rng(seed);
  for (std::size_t k = 0; k < cases; ++k) prop(rng, k);
}

}  // namespace gen
