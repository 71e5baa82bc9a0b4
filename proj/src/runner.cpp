#include "tvopt/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <thread>

#include "tvopt/bounds.hpp"

namespace tvopt {

void RunConfig::validate(int dim) const {
  if (np < 0 || nc < 0) throw ConfigError("solver horizons N_P and N_C must be >= 0");
  if (horizon < 0) throw ConfigError("horizon K must be >= 0");
  if (x0.size() != dim) {
    throw ConfigError("initial point has dimension " + std::to_string(x0.size()) + ", problem has " +
                      std::to_string(dim));
  }
  if (!(oracle_tol > 0.0)) throw ConfigError("oracle tolerance must be > 0");
  if (is_dual(correction.method) || (np > 0 && is_dual(prediction.method))) {
    throw ConfigError("dual solvers run through the dual prediction-correction loop");
  }
  if (!(correction.rho > 0.0) || (np > 0 && !(prediction.rho > 0.0))) {
    throw ConfigError("solver specs need rho > 0; build them with make_spec");
  }
}

std::vector<Vector> optimal_trajectory(const TimeVaryingProblem& problem, int K, double tol,
                                       const Vector& start) {
  if (!(tol > 0.0)) throw ConfigError("oracle tolerance must be > 0");
  constexpr int kMaxIterations = 1000000;
  const double rho = 2.0 / (problem.constants.L + problem.constants.mu);
  std::vector<Vector> out;
  out.reserve(std::max(K, 0));
  Vector x = start;
  for (int k = 0; k < K; ++k) {
    const SampledProblem s = sample(problem, k);
    int it = 0;
    for (;; ++it) {
      if (it == kMaxIterations) {
        throw SolverError("oracle did not converge at k=" + std::to_string(k), tol);
      }
      Vector next = fbs_step(s, x, rho);
      const double moved = (next - x).norm();
      x = std::move(next);
      if (moved <= tol) break;
    }
    out.push_back(x);
  }
  return out;
}

double one_step_bound(const RegularityConstants& c, const RunConfig& config, double Ts, double e,
                      Strategy used) {
  const double zc = zeta(config.nc, config.correction.rates);
  const double zp = zeta(config.np, config.prediction.rates);
  const double xp = xi(config.np, config.prediction.rates);
  const double sigma = optimizer_drift_bound(c, Ts);
  double inner = zp * e + zp * sigma;
  if (xp != 0.0) inner += xp * prediction_error_bound(used, c, Ts, e);
  return zc * inner;
}

namespace {

using Clock = std::chrono::steady_clock;

Surrogate build_surrogate(const TimeVaryingProblem& problem, const RunConfig& config,
                          const SampledProblem& current, const std::optional<SampledProblem>& previous,
                          const Vector& x) {
  const double Ts = problem.sampling_period;
  switch (config.strategy) {
    case Strategy::one_step_back: return one_step_back(current);
    case Strategy::taylor: return taylor_surrogate(problem.smooth, current, x, Ts);
    case Strategy::taylor_fd:
      if (!previous) return one_step_back(current);
      return taylor_surrogate_fd(current, *previous, x, Ts);
    case Strategy::extrapolation:
      if (!previous) return one_step_back(current);
      return extrapolation_surrogate(current, *previous, problem.constants.C2);
  }
  return one_step_back(current);
}

}  // namespace

RunTrace run_prediction_correction(const TimeVaryingProblem& problem, const RunConfig& config,
                                   const std::vector<Vector>* oracle) {
  problem.validate();
  config.validate(problem.dim());
  if (config.strategy == Strategy::extrapolation && problem.constants.C2 > 0.0) {
    throw ConfigError("extrapolation prediction requires C2 = 0");
  }
  if (config.strategy == Strategy::taylor && !problem.smooth.dt_grad) {
    throw ConfigError("taylor prediction needs a dt_grad oracle; use taylor_fd");
  }
  RunTrace trace;
  const int K = config.horizon;
  if (K == 0) return trace;

  std::vector<Vector> own;
  if (oracle == nullptr || static_cast<int>(oracle->size()) < K) {
    own = optimal_trajectory(problem, K, config.oracle_tol, config.x0);
    oracle = &own;
  }
  const std::vector<Vector>& xs = *oracle;
  const double Ts = problem.sampling_period;
  const RegularityConstants& c = problem.constants;

  Vector x = config.x0;
  TraceRow first;
  first.k = 0;
  first.t = problem.time(0);
  first.x = x;
  first.x_pred = x;
  first.x_opt = xs[0];
  first.err = (x - xs[0]).norm();
  first.bound = first.err;
  first.pred_err = first.err;
  trace.rows.reserve(K);
  trace.rows.push_back(first);

  std::optional<SampledProblem> previous;
  SampledProblem current = sample(problem, 0);
  for (int k = 0; k + 1 < K; ++k) {
    try {
      const auto start = Clock::now();
      const bool has_history = previous.has_value();
      const Surrogate surrogate = build_surrogate(problem, config, current, previous, x);
      Vector x_hat = x;
      if (config.np > 0) {
        SolverState s = warm_start(surrogate, config.prediction, x);
        x_hat = run_solver(surrogate, config.prediction, s, config.np).x;
      }
      SampledProblem next = sample(problem, k + 1);
      Vector x_next = x_hat;
      if (config.nc > 0) {
        SolverState s = warm_start(next, config.correction, x_hat);
        x_next = run_solver(next, config.correction, s, config.nc).x;
      }
      const auto stop = Clock::now();

      TraceRow row;
      row.k = k + 1;
      row.t = problem.time(k + 1);
      row.x = x_next;
      row.x_pred = x_hat;
      row.x_opt = xs[k + 1];
      row.err = (x_next - xs[k + 1]).norm();
      row.pred_err = (x_hat - xs[k + 1]).norm();
      row.used = config.strategy;
      if (!has_history &&
          (config.strategy == Strategy::taylor_fd || config.strategy == Strategy::extrapolation)) {
        row.used = Strategy::one_step_back;
      }
      row.bound = one_step_bound(c, config, Ts, trace.rows.back().err, row.used);
      row.ms = config.timing
                   ? std::chrono::duration<double, std::milli>(stop - start).count()
                   : 0.0;
      trace.rows.push_back(std::move(row));

      x = std::move(x_next);
      previous = std::move(current);
      current = std::move(next);
    } catch (const SolverError& e) {
      trace.failure = "step " + std::to_string(k + 1) + ": " + e.what();
      break;
    }
  }
  return trace;
}

RecursionReport check_recursion_bound(const RunTrace& trace, const RegularityConstants& c,
                                      const RunConfig& config, double Ts, double slack) {
  RecursionReport r;
  r.max_excess = -kInfinity;
  for (std::size_t k = 1; k < trace.rows.size(); ++k) {
    const TraceRow& row = trace.rows[k];
    const double b = one_step_bound(c, config, Ts, trace.rows[k - 1].err, row.used);
    ++r.checked;
    r.max_excess = std::max(r.max_excess, row.err - b);
    if (!(row.err <= b + slack)) r.violations.push_back(row.k);
  }
  if (r.checked == 0) r.max_excess = 0.0;
  return r;
}

int asymptotic_window(int rows) { return rows <= 0 ? 0 : (4 * rows + 4) / 5; }

ErrorStats asymptotic_stats(const RunTrace& trace) {
  ErrorStats s;
  const int n = static_cast<int>(trace.rows.size());
  const int w = asymptotic_window(n);
  if (w == 0) return s;
  s.count = w;
  s.min = kInfinity;
  s.max = -kInfinity;
  double sum = 0.0, sum_ms = 0.0;
  for (int i = n - w; i < n; ++i) {
    const double e = trace.rows[i].err;
    s.min = std::min(s.min, e);
    s.max = std::max(s.max, e);
    sum += e;
    sum_ms += trace.rows[i].ms;
  }
  s.mean = sum / w;
  s.mean_ms = sum_ms / w;
  double var = 0.0;
  for (int i = n - w; i < n; ++i) var += (trace.rows[i].err - s.mean) * (trace.rows[i].err - s.mean);
  s.stddev = std::sqrt(var / w);
  return s;
}

std::vector<RunTrace> run_sweep(const TimeVaryingProblem& problem, const std::vector<RunConfig>& configs,
                                int jobs) {
  std::vector<RunTrace> out(configs.size());
  if (configs.empty()) return out;
  int K = 0;
  for (const auto& c : configs) K = std::max(K, c.horizon);
  const std::vector<Vector> oracle =
      optimal_trajectory(problem, K, configs.front().oracle_tol, configs.front().x0);

  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min<int>(jobs, static_cast<int>(configs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      try {
        out[i] = run_prediction_correction(problem, configs[i], &oracle);
      } catch (const std::exception& e) {
        out[i].failure = e.what();
      }
    }
  };
  if (jobs == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace tvopt
