#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace tvopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised when an inner iterative solve (prox, argmin) fails to reach its
/// tolerance. Carries the last residual so callers can report it.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Invalid user-supplied configuration (bad step size, missing oracle, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace tvopt
