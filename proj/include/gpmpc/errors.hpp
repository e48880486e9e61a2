#pragma once

#include <stdexcept>
#include <string>

namespace gpmpc {

/// A symmetric factorization failed even after jitter escalation.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Hyperparameter training produced no finite likelihood at all.
class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& what) : std::runtime_error(what) {}
};

/// A forecaster could not produce an envelope; callers fall back to a
/// fixed-range envelope.
class ForecastError : public std::runtime_error {
 public:
  explicit ForecastError(const std::string& what) : std::runtime_error(what) {}
};

/// The control solver never saw a finite objective value.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpmpc
