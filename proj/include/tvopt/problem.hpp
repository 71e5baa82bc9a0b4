#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tvopt/inner.hpp"
#include "tvopt/types.hpp"

namespace tvopt {

/// f(x) = offset + <gradient, x - anchor> + 1/2 (x - anchor)' H (x - anchor).
struct QuadraticModel {
  Matrix hessian;
  Vector gradient;
  Vector anchor;
  double offset = 0.0;

  double value(const Vector& x) const;
  Vector grad(const Vector& x) const;
  /// argmin_y f(y) + ||y - v||^2 / (2 rho), by a linear solve.
  Vector prox(double rho, const Vector& v) const;
};

/// Smooth part f(x; t). value and grad are mandatory; the remaining oracles
/// are optional and fall back to finite differences when empty.
struct SmoothCost {
  int dim = 0;
  std::function<double(const Vector&, double)> value;
  std::function<Vector(const Vector&, double)> grad;
  std::function<Matrix(const Vector&, double)> hessian;
  std::function<Vector(const Vector&, double)> dt_grad;
  std::function<Vector(const Vector&, double)> dtt_grad;
  /// Set when f(.; t) is exactly quadratic; enables closed-form proxes.
  std::function<QuadraticModel(double)> quadratic;

  Matrix eval_hessian(const Vector& x, double t) const;
  Vector eval_dt_grad(const Vector& x, double t) const;
  Vector eval_dtt_grad(const Vector& x, double t) const;
  bool has_dt_grad() const { return static_cast<bool>(dt_grad); }
};

enum class NonsmoothKind { zero, l1, box, halfspace, custom };

/// Non-smooth part g(x; t), closed convex proper per time slice.
struct NonsmoothCost {
  NonsmoothKind kind = NonsmoothKind::zero;
  std::function<double(const Vector&, double)> value;
  std::function<Vector(double, const Vector&, double)> prox;
  std::function<Vector(const Vector&, double)> subgrad;
  bool time_varying = false;

  static NonsmoothCost zero();
  static NonsmoothCost l1(double weight);
  static NonsmoothCost l1(std::function<double(double)> weight);
  static NonsmoothCost box(Vector lower, Vector upper);
  static NonsmoothCost box(std::function<Vector(double)> lower, std::function<Vector(double)> upper);
  /// Indicator of {x : <a, x> <= b}.
  static NonsmoothCost halfspace(Vector a, double b);
  static NonsmoothCost custom(std::function<double(const Vector&, double)> value,
                              std::function<Vector(double, const Vector&, double)> prox,
                              std::function<Vector(const Vector&, double)> subgrad,
                              bool time_varying);
};

/// Component-wise soft thresholding sign(v) max(|v| - threshold, 0).
Vector soft_threshold(const Vector& v, double threshold);

struct RegularityConstants {
  double mu = 1.0;
  double L = 1.0;
  double C0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 0.0;
  double D0 = 0.0;

  double kappa() const { return L / mu; }
  /// Throws ConfigError on non-finite, negative, mu <= 0 or L < mu.
  void validate() const;
};

struct TimeVaryingProblem {
  std::string name;
  SmoothCost smooth;
  NonsmoothCost nonsmooth;
  RegularityConstants constants;
  double sampling_period = 0.1;

  int dim() const { return smooth.dim; }
  double time(int k) const { return k * sampling_period; }
  void validate() const;
};

/// Oracles of a smooth cost frozen at one time instant (or a prediction).
struct FrozenSmooth {
  int dim = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> grad;
  std::function<Matrix(const Vector&)> hessian;
  std::optional<QuadraticModel> quadratic;
};

struct FrozenNonsmooth {
  NonsmoothKind kind = NonsmoothKind::zero;
  std::function<double(const Vector&)> value;
  std::function<Vector(double, const Vector&)> prox;
  std::function<Vector(const Vector&)> subgrad;
};

/// A time-invariant composite problem min f(x) + g(x).
struct CompositeProblem {
  FrozenSmooth f;
  FrozenNonsmooth g;
  int dim() const { return f.dim; }
};

struct SampledProblem : CompositeProblem {
  double t = 0.0;
  int k = 0;
};

FrozenSmooth freeze(const SmoothCost& cost, double t);
/// Frozen oracles of an explicit quadratic; the model is kept for closed-form proxes.
FrozenSmooth frozen_quadratic(const QuadraticModel& q);
/// The same quadratic written around a new anchor.
QuadraticModel reanchor(const QuadraticModel& q, const Vector& anchor);
FrozenNonsmooth freeze(const NonsmoothCost& cost, double t);

/// Frozen oracles at t_k = k Ts.
SampledProblem sample(const TimeVaryingProblem& problem, int k);

/// prox_{rho f}(v): closed form for quadratic f, safeguarded Newton otherwise.
Vector prox_smooth(const FrozenSmooth& f, double rho, const Vector& v,
                   const NewtonOptions& options = {});

/// Backward finite difference (grad f_k(x) - grad f_{k-1}(x)) / Ts.
Vector finite_diff_dt_grad(const FrozenSmooth& f_k, const FrozenSmooth& f_km1, const Vector& x,
                           double Ts);

struct Probe {
  Vector x;
  double t = 0.0;
};

/// Uniform probes in [lo, hi]^n x [0, t_max], reproducible from the seed.
std::vector<Probe> random_probes(int dim, double lo, double hi, double t_max, int count,
                                 unsigned seed);
/// Tensor grid for scalar problems: nx points in [lo, hi] times nt in [0, t_max].
std::vector<Probe> grid_probes_1d(double lo, double hi, int nx, double t_max, int nt);

struct ConstantReport {
  int probes = 0;
  double max_dt_grad = 0.0;        // observed C0
  double min_eigenvalue = 0.0;     // observed mu
  double max_eigenvalue = 0.0;     // observed L
  double max_third_x = 0.0;        // observed C1 (finite differences)
  double max_dt_hessian = 0.0;     // observed C2 (finite differences)
  double max_dtt_grad = 0.0;       // observed C3
  double max_grad_fd_error = 0.0;  // relative mismatch of grad vs. differenced value
  double max_hess_fd_error = 0.0;  // relative mismatch of hessian vs. differenced grad
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Probes every declared constant of the smooth part on the grid and lists
/// each one the observations contradict. Never throws on a violation.
ConstantReport validate_constants(const TimeVaryingProblem& problem, const std::vector<Probe>& grid);

/// max_k ||subgrad g(x*_k; t_{k+1}) - subgrad g(x*_k; t_k)|| along a trajectory.
double estimate_d0(const TimeVaryingProblem& problem, const std::vector<Vector>& trajectory);

}  // namespace tvopt
