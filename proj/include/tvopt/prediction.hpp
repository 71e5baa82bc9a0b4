#pragma once

#include <string>
#include <vector>

#include "tvopt/problem.hpp"

namespace tvopt {

enum class Strategy { one_step_back, taylor, taylor_fd, extrapolation };

/// Names used in configuration files: osb, taylor, taylor_fd, extrapolation.
std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

/// Predicted problem (f_hat, g_hat) for t_{k+1}. g_hat is always g_k.
struct Surrogate : CompositeProblem {
  Strategy provenance = Strategy::one_step_back;
  int extrapolation_order = 1;  // number of past costs combined
  Vector anchor_x;              // expansion point (Taylor only)
  double anchor_t = 0.0;
};

Surrogate one_step_back(const SampledProblem& current);

/// Second-order expansion of f around (x_k, t_k), advanced by Ts in time:
/// gradient grad f_k(x_k) + Ts dt_grad f_k(x_k) + H_k (x - x_k), Hessian H_k.
/// The value offset is f_k(x_k); time terms of the value do not move the argmin.
/// Throws ConfigError when the cost has no dt_grad oracle.
Surrogate taylor_surrogate(const SmoothCost& f, const SampledProblem& current, const Vector& x_k,
                           double Ts);
/// Same expansion with the time derivative replaced by the backward difference
/// of the gradients at t_k and t_{k-1}.
Surrogate taylor_surrogate_fd(const SampledProblem& current, const SampledProblem& previous,
                              const Vector& x_k, double Ts);

/// Lagrange weights l_i = prod_{j != i} j / (j - i), i = 1..I, for
/// extrapolating to t_{k+1} from t_k, ..., t_{k+1-I}.
std::vector<double> interpolation_coefficients(int I);

/// f_hat = sum_i l_i f_{k+1-i}; history[0] is the newest sample. Rejects C2 > 0.
Surrogate extrapolation_surrogate(const std::vector<SampledProblem>& history, double C2);
/// Two-point case 2 f_k - f_{k-1}.
Surrogate extrapolation_surrogate(const SampledProblem& current, const SampledProblem& previous,
                                  double C2);

/// ||x*_{k+1} - x*_k|| <= (C0 Ts + D0) / mu.
double optimizer_drift_bound(const RegularityConstants& c, double Ts);
/// (2L/mu) e + 2 ((C0 Ts + D0)/mu)(1 + L/mu).
double taylor_linear_error_bound(const RegularityConstants& c, double Ts, double e);
/// C1/(2 mu) e^2 + C4 e + C5 Ts^2/2 + C6 D0, with C5 + C3/mu for finite differences.
double taylor_quadratic_error_bound(const RegularityConstants& c, double Ts, double e,
                                   bool finite_difference);
/// (C3 Ts^2 + D0) / mu.
double extrapolation_error_bound(const RegularityConstants& c, double Ts);

/// Tightest available bound on ||x_hat*_{k+1} - x*_{k+1}|| for the strategy,
/// given the current tracking error e = ||x_k - x*_k||.
double prediction_error_bound(Strategy s, const RegularityConstants& c, double Ts, double e);

}  // namespace tvopt
