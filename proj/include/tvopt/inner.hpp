#pragma once

#include <functional>

#include "tvopt/types.hpp"

namespace tvopt {

struct NewtonOptions {
  double grad_tol = 1e-10;
  int max_iterations = 100;
};

struct NewtonResult {
  Vector x;
  double residual = 0.0;
  int iterations = 0;
};

/// Safeguarded Newton for smooth strongly convex objectives: Newton
/// direction (gradient fallback if the Hessian solve is not a descent
/// direction) with Armijo backtracking. Stops on ||grad|| <= grad_tol.
/// Throws SolverError carrying the last residual after max_iterations.
NewtonResult minimize_newton(const std::function<double(const Vector&)>& value,
                             const std::function<Vector(const Vector&)>& grad,
                             const std::function<Matrix(const Vector&)>& hessian,
                             Vector x0, const NewtonOptions& options = {});

struct CompositeOptions {
  double step_tol = 1e-14;  // relative successive-iterate distance
  int max_iterations = 1000000;
  double initial_step = 1.0;
};

/// Proximal gradient with backtracking on the local Lipschitz estimate for
/// min s(x) + r(x), s smooth, r given through prox(step, v). Throws
/// SolverError carrying the last step length after max_iterations.
NewtonResult minimize_composite(const std::function<Vector(const Vector&)>& smooth_grad,
                                const std::function<Vector(double, const Vector&)>& prox,
                                Vector x0, const CompositeOptions& options = {});

}  // namespace tvopt
