#pragma once

#include <string>
#include <vector>

#include "tvopt/bounds.hpp"
#include "tvopt/operators.hpp"
#include "tvopt/runner.hpp"

namespace tvopt {

/// min f(x; t) + h(y; t)  s.t.  A x + B y = c, with static A, B, c.
/// m = 0 (or B = 0) requires h = 0.
struct ConstrainedProblem {
  std::string name;
  SmoothCost f;
  NonsmoothCost h;
  int m = 0;
  Matrix A;
  Matrix B;
  Vector c;
  RegularityConstants constants;  // of f
  double D0_bar = 0.0;
  double sampling_period = 0.1;

  int n() const { return f.dim; }
  int p() const { return static_cast<int>(A.rows()); }
  bool h_zero() const { return h.kind == NonsmoothKind::zero; }
  double time(int k) const { return k * sampling_period; }
  /// Rejects rank-deficient A unless allowed, and c outside range([A B]).
  void validate(bool allow_rank_deficient = false) const;
};

/// One time slice (or a prediction) of a constrained problem.
struct FrozenConstrained {
  FrozenSmooth f;
  FrozenNonsmooth h;
  bool h_zero = true;
  Matrix A;
  Matrix B;
  Vector c;
  double t = 0.0;

  int n() const { return f.dim; }
  int m() const { return static_cast<int>(B.cols()); }
  int p() const { return static_cast<int>(A.rows()); }
};

/// w: dual iterate, z: fixed-point iterate (differs from w for admm only),
/// x, y: primal readout.
struct DualState {
  Vector w;
  Vector z;
  Vector x;
  Vector y;
  int iterations = 0;
};

struct DualDerivatives {
  Vector x_bar;  // argmin f(x) - <A'w, x>
  double value = 0.0;
  Vector grad;     // A x_bar - c
  Matrix hessian;  // A H^-1 A'
  Vector dt_grad;  // -A H^-1 dt_grad f(x_bar)
};

struct DualProblem {
  ConstrainedProblem primal;
  DualConstants constants;
  double normA = 0.0;
  double normB = 0.0;
  bool rank_deficient = false;
  Matrix range_projector;  // orthogonal projector onto range(A)

  FrozenConstrained sample(int k) const;
  FrozenConstrained freeze_at(double t) const;
  /// Smooth dual d^f(w) = f*(A'w) - <w, c> as a problem over w; h must be 0.
  TimeVaryingProblem as_time_varying_problem() const;
};

/// Dual constants mu_bar = lambda_min(AA')/L, L_bar = lambda_max(AA')/mu,
/// C0_bar = ||A|| C0 / mu. With rank-deficient A (dual ascent and method of
/// multipliers only) lambda_min is the smallest positive eigenvalue.
DualProblem build_dual(const ConstrainedProblem& cp, bool allow_rank_deficient = false);

/// Dual value, gradient, hessian and time derivative of the gradient at (w, t).
DualDerivatives dual_derivatives(const DualProblem& dp, const Vector& w, double t);
DualDerivatives dual_derivatives(const FrozenConstrained& fc, const SmoothCost* f, const Vector& w);

/// argmin_x f(x) - <A'w, x>.
Vector primal_argmin(const FrozenConstrained& fc, const Vector& w, const Vector& hint);
/// argmin_x f(x) - <v, A x> + rho/2 ||A x - c||^2.
Vector augmented_argmin(const FrozenConstrained& fc, const Vector& v, double rho, const Vector& hint);
/// argmin_y h(y) - <u, B y> + rho/2 ||B y||^2.
Vector y_argmin(const FrozenConstrained& fc, const Vector& u, double rho, const Vector& hint);

DualState dual_ascent_step(const FrozenConstrained& fc, const DualState& s, double rho);
DualState mm_step(const FrozenConstrained& fc, const DualState& s, double rho);
DualState dual_fbs_step(const FrozenConstrained& fc, const DualState& s, double rho);
DualState admm_step(const FrozenConstrained& fc, const DualState& s, double rho);

/// State whose dual readout is w. For admm z = w + rho (A x_bar(w) - c).
DualState dual_warm_start(const FrozenConstrained& fc, const SolverSpec& spec, const Vector& w,
                          const Vector& x_hint);
/// Readout from the dual iterate: x = x_bar(w), y = y_argmin(w - rho (A x - c)).
void dual_readout(const FrozenConstrained& fc, const SolverSpec& spec, DualState& s);
/// Exactly N steps followed by the readout; N = 0 returns init unchanged.
DualState run_dual_solver(const FrozenConstrained& fc, const SolverSpec& spec, DualState init, int N);

/// Primal prediction problem equivalent to the dual Taylor expansion at w_k:
/// f_hat quadratic around x_bar_k with gradient grad f_k(x_bar_k) + Ts dt_grad f_k(x_bar_k)
/// and hessian of f_k at x_bar_k; h, A, B, c unchanged. The constant term is dropped.
FrozenConstrained dual_taylor_surrogate(const DualProblem& dp, const Vector& w_k, int k);

struct DualOptimum {
  Vector w;
  Vector x;
  Vector y;
};
/// Optimum of one slice by dual forward-backward iterations until the
/// successive dual distance drops to tol.
DualOptimum dual_optimum(const DualProblem& dp, const FrozenConstrained& fc, double tol, const Vector& w0);
std::vector<DualOptimum> dual_optimal_trajectory(const DualProblem& dp, int K, double tol,
                                                 const Vector& w0);

struct DualRunConfig {
  int np = 0;
  int nc = 0;
  Strategy strategy = Strategy::one_step_back;  // one_step_back or taylor
  SolverSpec correction;
  SolverSpec prediction;
  int horizon = 0;
  Vector w0;
  double oracle_tol = 1e-12;
  bool timing = false;
};

struct DualTraceRow {
  int k = 0;
  double t = 0.0;
  Vector w, w_opt, x, x_opt, y, y_opt;
  double err_w = 0.0;
  double err_x = 0.0;
  double err_By = 0.0;
  double bound_w = 0.0;  // one-step bound on err_w from the previous row
  double ms = 0.0;
};

struct DualTrace {
  std::vector<DualTraceRow> rows;
  std::string failure;
  bool ok() const { return failure.empty(); }
};

DualTrace run_dual_prediction_correction(const DualProblem& dp, const DualRunConfig& config,
                                         const std::vector<DualOptimum>* oracle = nullptr);

/// One-step bound on the dual error using the dual constants.
double dual_one_step_bound(const DualConstants& d, const DualRunConfig& config, double Ts, double e,
                           Strategy used);

struct DualCheckReport {
  int checked = 0;
  std::vector<int> recursion_violations;  // dual error above the one-step bound
  std::vector<int> recovery_violations;   // primal errors above factor * dual error
  bool ok() const { return recursion_violations.empty() && recovery_violations.empty(); }
};
DualCheckReport check_dual_trace(const DualProblem& dp, const DualTrace& trace,
                                 const DualRunConfig& config, double slack = 1e-9);

/// Statistics of err_w over the last ceil(4K/5) rows.
ErrorStats dual_asymptotic_stats(const DualTrace& trace);

}  // namespace tvopt
