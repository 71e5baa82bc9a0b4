#pragma once

#include <string>
#include <vector>

#include "tvopt/operators.hpp"
#include "tvopt/prediction.hpp"

namespace tvopt {

struct RunConfig {
  int np = 0;
  int nc = 0;
  Strategy strategy = Strategy::one_step_back;
  SolverSpec correction;
  SolverSpec prediction;
  int horizon = 0;  // number of sampled instants t_0 .. t_{K-1}
  Vector x0;
  double oracle_tol = 1e-12;
  bool timing = false;  // off keeps traces byte-reproducible (ms column is 0)

  void validate(int dim) const;
};

/// Row k describes the iterate at t_k and the step that produced it.
struct TraceRow {
  int k = 0;
  double t = 0.0;
  Vector x;       // corrected iterate x_k
  Vector x_pred;  // prediction x_hat_k made at t_{k-1} (x_0 for k = 0)
  Vector x_opt;   // oracle optimum x*_k
  double err = 0.0;       // ||x_k - x*_k||
  double bound = 0.0;     // one-step bound on err from the previous row (err itself at k = 0)
  double pred_err = 0.0;  // ||x_hat_k - x*_k||
  double ms = 0.0;        // wall time of the prediction + correction step
  Strategy used = Strategy::one_step_back;  // strategy actually used for x_pred
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::string failure;  // non-empty when a solver step aborted the run
  bool ok() const { return failure.empty(); }
};

/// x*_k for k < K by warm-started forward-backward splitting, stopped when the
/// successive-iterate distance drops to tol. Throws SolverError after 1e6 iterations.
std::vector<Vector> optimal_trajectory(const TimeVaryingProblem& problem, int K, double tol,
                                       const Vector& start);

/// Prediction-correction loop. oracle, when given, must hold at least
/// horizon optima; otherwise it is computed. Solver failures end the run
/// and are reported in RunTrace::failure with the rows completed so far.
RunTrace run_prediction_correction(const TimeVaryingProblem& problem, const RunConfig& config,
                                   const std::vector<Vector>* oracle = nullptr);

/// zeta_C (zeta_P e + zeta_P sigma + xi_P tau(e)) with the prediction-error bounds for
/// sigma and tau under the strategy actually used.
double one_step_bound(const RegularityConstants& c, const RunConfig& config, double Ts, double e,
                      Strategy used);

struct RecursionReport {
  int checked = 0;
  std::vector<int> violations;  // row indices k whose err exceeded the bound
  double max_excess = 0.0;      // max over rows of err - bound
  bool ok() const { return violations.empty(); }
};

/// Recomputes each one-step bound from the given constants (absolute slack
/// 1e-10 for oracle inexactness) and lists the rows that exceed it.
RecursionReport check_recursion_bound(const RunTrace& trace, const RegularityConstants& c,
                                      const RunConfig& config, double Ts, double slack = 1e-10);

struct ErrorStats {
  int count = 0;
  double min = 0.0;
  double mean = 0.0;
  double stddev = 0.0;
  double max = 0.0;
  double mean_ms = 0.0;
};

/// Statistics of err over the last ceil(4K/5) rows.
ErrorStats asymptotic_stats(const RunTrace& trace);
int asymptotic_window(int rows);

/// Independent runs on a pool of `jobs` workers; results in config order.
std::vector<RunTrace> run_sweep(const TimeVaryingProblem& problem, const std::vector<RunConfig>& configs,
                                int jobs);

}  // namespace tvopt
