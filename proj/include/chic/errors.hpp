#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace chic {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct KernelError : Error {
  using Error::Error;
};

// Thrown when the adaptive integrator cannot meet the requested tolerance.
// Carries the best available estimate so callers can report it.
struct QuadratureError : Error {
  QuadratureError(const std::string& msg, double best, double err)
      : Error(msg), best_estimate(best), error_estimate(err) {}
  double best_estimate;
  double error_estimate;
};

struct TuningError : Error {
  using Error::Error;
};

// Linear or nonlinear solver failure. residual_history is the GMRES residual
// trace when the failure came from the linear solve.
struct SolverError : Error {
  SolverError(const std::string& msg, std::vector<double> history = {})
      : Error(msg), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

}  // namespace chic
