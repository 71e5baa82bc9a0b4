#pragma once

// Test-side problem builders and independent oracles. Nothing here calls the
// library solvers, so comparisons against them are genuine cross-checks.

#include <cmath>
#include <functional>
#include <limits>

#include "tvopt/problem.hpp"

namespace testing {

using tvopt::Matrix;
using tvopt::Vector;

inline Vector vec1(double v) { return Vector::Constant(1, v); }

/// f(x; t) = a/2 x^2 - d(t) x with the drift d supplied with its derivatives.
inline tvopt::TimeVaryingProblem scalar_drift(double a, std::function<double(double)> d,
                                              std::function<double(double)> dd,
                                              std::function<double(double)> ddd, tvopt::NonsmoothCost g,
                                              double C0, double C3, double Ts) {
  tvopt::TimeVaryingProblem p;
  p.name = "scalar_drift";
  p.smooth.dim = 1;
  p.smooth.value = [=](const Vector& x, double t) { return 0.5 * a * x[0] * x[0] - d(t) * x[0]; };
  p.smooth.grad = [=](const Vector& x, double t) { return vec1(a * x[0] - d(t)); };
  p.smooth.hessian = [=](const Vector&, double) { return Matrix::Constant(1, 1, a); };
  p.smooth.dt_grad = [=](const Vector&, double t) { return vec1(-dd(t)); };
  p.smooth.dtt_grad = [=](const Vector&, double t) { return vec1(-ddd(t)); };
  p.nonsmooth = std::move(g);
  p.constants.mu = a;
  p.constants.L = a;
  p.constants.C0 = C0;
  p.constants.C3 = C3;
  p.sampling_period = Ts;
  return p;
}

/// f = x^2/2 - t x: optimum t (with g = 0), C0 = 1.
inline tvopt::TimeVaryingProblem linear_drift(double Ts = 0.1,
                                              tvopt::NonsmoothCost g = tvopt::NonsmoothCost::zero()) {
  return scalar_drift(
      1.0, [](double t) { return t; }, [](double) { return 1.0; }, [](double) { return 0.0; }, std::move(g),
      1.0, 0.0, Ts);
}

/// f = x^2/2 - sin(t) x: optimum sin(t) (with g = 0), C0 = C3 = 1.
inline tvopt::TimeVaryingProblem sin_drift(double Ts, tvopt::NonsmoothCost g = tvopt::NonsmoothCost::zero()) {
  return scalar_drift(
      1.0, [](double t) { return std::sin(t); }, [](double t) { return std::cos(t); },
      [](double t) { return -std::sin(t); }, std::move(g), 1.0, 1.0, Ts);
}

/// Minimizer of phi(x) + nu |x| on the line: grid scan with step h over
/// [lo, hi], then bisection on the subgradient inclusion around the best cell.
/// dphi must be increasing (phi strictly convex).
inline double brute_force_l1(const std::function<double(double)>& phi, const std::function<double(double)>& dphi,
                             double nu, double lo = -2.0, double hi = 2.0, double h = 1e-4) {
  double best = lo, best_v = std::numeric_limits<double>::infinity();
  const int n = static_cast<int>(std::round((hi - lo) / h));
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double v = phi(x) + nu * std::abs(x);
    if (v < best_v) {
      best_v = v;
      best = x;
    }
  }
  if (nu > 0.0 && std::abs(dphi(0.0)) <= nu) return 0.0;  // 0 in dphi(0) + nu [-1, 1]
  // Away from 0 the minimizer has the sign s with dphi(x) + nu s = 0.
  const double s = dphi(0.0) > nu ? -1.0 : 1.0;
  auto slope = [&](double x) { return dphi(x) + nu * s; };
  double a = best - 2 * h, b = best + 2 * h;
  while (slope(a) > 0) a -= h;
  while (slope(b) < 0) b += h;
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    (slope(m) > 0 ? b : a) = m;
  }
  return 0.5 * (a + b);
}

/// KKT solution of min 1/2 x'Hx + g'x s.t. A x = c: returns (x, w) with H x + g = A' w.
inline std::pair<Vector, Vector> kkt_solve(const Matrix& H, const Vector& g, const Matrix& A, const Vector& c) {
  const int n = static_cast<int>(H.rows()), p = static_cast<int>(A.rows());
  Matrix K = Matrix::Zero(n + p, n + p);
  K.topLeftCorner(n, n) = H;
  K.topRightCorner(n, p) = -A.transpose();
  K.bottomLeftCorner(p, n) = A;
  Vector rhs(n + p);
  rhs << -g, c;
  const Vector s = K.fullPivLu().solve(rhs);
  return {s.head(n), s.tail(p)};
}

}  // namespace testing

namespace testing {

/// f(x; t) = 1/2 (x - r(t))' Q (x - r(t)) with the drift derivatives supplied.
inline tvopt::SmoothCost target_quadratic(const Matrix& Q, std::function<Vector(double)> r,
                                          std::function<Vector(double)> dr) {
  tvopt::SmoothCost f;
  f.dim = static_cast<int>(Q.rows());
  f.value = [=](const Vector& x, double t) { return 0.5 * (x - r(t)).dot(Q * (x - r(t))); };
  f.grad = [=](const Vector& x, double t) { return Vector(Q * (x - r(t))); };
  f.hessian = [=](const Vector&, double) { return Q; };
  f.dt_grad = [=](const Vector&, double t) { return Vector(-Q * dr(t)); };
  return f;
}

/// Closed-form dual value f*(A'w) - <w, c> of target_quadratic:
/// <A'w, r> + 1/2 w' A Q^-1 A' w - <w, c>.
inline double target_quadratic_dual(const Matrix& Q, const Vector& r, const Matrix& A, const Vector& c,
                                    const Vector& w) {
  const Vector v = A.transpose() * w;
  return v.dot(r) + 0.5 * v.dot(Q.ldlt().solve(v)) - w.dot(c);
}

}  // namespace testing
