#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace matherlab {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown (overflow, non-convergence). Carries the last state
// that was still finite so callers can report where things went wrong.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::vector<double> last_valid = {},
                 double last_time = 0.0)
      : Error(what), last_valid_(std::move(last_valid)), last_time_(last_time) {}

  const std::vector<double>& last_valid() const noexcept { return last_valid_; }
  double last_time() const noexcept { return last_time_; }

 private:
  std::vector<double> last_valid_;
  double last_time_;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : NumericalError(what), last_residual_(last_residual) {}
  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(got) +
                         ", expected " + std::to_string(want));
  }
}

}  // namespace matherlab
