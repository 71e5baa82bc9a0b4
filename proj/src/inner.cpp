#include "tvopt/inner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace tvopt {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

}  // namespace

NewtonResult minimize_newton(const std::function<double(const Vector&)>& value,
                             const std::function<Vector(const Vector&)>& grad,
                             const std::function<Matrix(const Vector&)>& hessian,
                             Vector x0, const NewtonOptions& options) {
  constexpr double kArmijo = 1e-4;
  Vector x = std::move(x0);
  Vector g = grad(x);
  double residual = g.norm();
  for (int it = 0; it < options.max_iterations; ++it) {
    if (residual <= options.grad_tol) return {x, residual, it};

    Eigen::LDLT<Matrix> ldlt(hessian(x));
    Vector d = ldlt.solve(-g);
    double slope = g.dot(d);
    if (ldlt.info() != Eigen::Success || !d.allFinite() || slope >= 0.0) {
      d = -g;
      slope = -g.squaredNorm();
    }

    const double f0 = value(x);
    Vector trial = x + d;
    const double f_full = value(trial);
    // Near the minimizer value differences drop below rounding; a full step
    // that halves the gradient is accepted regardless.
    bool accepted = std::isfinite(f_full) && (f_full <= f0 + kArmijo * slope || grad(trial).norm() <= 0.5 * residual);
    for (double step = 0.5; !accepted && step > 1e-12; step *= 0.5) {
      trial = x + step * d;
      const double f1 = value(trial);
      accepted = std::isfinite(f1) && f1 <= f0 + kArmijo * step * slope;
    }
    if (!accepted) {
      throw SolverError("newton line search stalled, residual " + sci(residual), residual);
    }
    x = std::move(trial);
    g = grad(x);
    residual = g.norm();
  }
  if (residual <= options.grad_tol) return {x, residual, options.max_iterations};
  throw SolverError("newton did not converge in " + std::to_string(options.max_iterations) +
                        " iterations, residual " + sci(residual),
                    residual);
}

NewtonResult minimize_composite(const std::function<Vector(const Vector&)>& smooth_grad,
                                const std::function<Vector(double, const Vector&)>& prox,
                                Vector x0, const CompositeOptions& options) {
  Vector x = prox(options.initial_step, x0);
  double step = options.initial_step;
  double moved = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const Vector g = smooth_grad(x);
    Vector next;
    for (;;) {
      next = prox(step, x - step * g);
      const Vector d = next - x;
      // Gradient form of the descent condition; free of value cancellation near the optimum.
      if ((smooth_grad(next) - g).dot(d) <= d.squaredNorm() / step || step < 1e-16) break;
      step *= 0.5;
    }
    moved = (next - x).norm();
    // x - step g is rounded at the scale of step ||g||, so the move cannot drop below it.
    const double scale = std::max(1.0, x.norm() + step * g.norm());
    x = std::move(next);
    if (moved <= options.step_tol * scale) return {x, moved, it + 1};
    step *= 1.25;  // let the step recover after conservative backtracking
  }
  throw SolverError("proximal gradient did not converge in " +
                        std::to_string(options.max_iterations) + " iterations, last move " + sci(moved),
                    moved);
}

}  // namespace tvopt
