#include "tvopt/dual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <sstream>

namespace tvopt {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::scientific << v;
  return os.str();
}

bool b_is_zero(const Matrix& B) { return B.size() == 0 || B.isZero(0.0); }

Vector sized_hint(const Vector& hint, int n) {
  return hint.size() == n ? hint : Vector(Vector::Zero(n));
}

/// Newton on f(x) - <a, x> + (rho/2)||A x - c||^2 (rho = 0 drops the penalty).
Vector newton_argmin(const FrozenConstrained& fc, const Vector& a, double rho, const Vector& hint) {
  const FrozenSmooth& f = fc.f;
  auto value = [&](const Vector& x) {
    double v = f.value(x) - a.dot(x);
    if (rho > 0.0) v += 0.5 * rho * (fc.A * x - fc.c).squaredNorm();
    return v;
  };
  auto grad = [&](const Vector& x) {
    Vector g = f.grad(x) - a;
    if (rho > 0.0) g += rho * fc.A.transpose() * (fc.A * x - fc.c);
    return g;
  };
  auto hess = [&](const Vector& x) {
    Matrix H = f.hessian(x);
    if (rho > 0.0) H += rho * fc.A.transpose() * fc.A;
    return H;
  };
  return minimize_newton(value, grad, hess, sized_hint(hint, fc.n())).x;
}

}  // namespace

void ConstrainedProblem::validate(bool allow_rank_deficient) const {
  if (f.dim <= 0) throw ConfigError("constrained problem: dimension of x must be positive");
  if (!f.value || !f.grad) throw ConfigError("constrained problem: f needs value and grad oracles");
  if (A.rows() == 0 || A.cols() != f.dim) throw ConfigError("constrained problem: A must be p x n");
  if (c.size() != A.rows()) throw ConfigError("constrained problem: c must have p entries");
  if (B.rows() != A.rows() || B.cols() != m) throw ConfigError("constrained problem: B must be p x m");
  if ((m == 0 || b_is_zero(B)) && !h_zero()) {
    throw ConfigError("constrained problem: B = 0 requires h = 0");
  }
  if (!(sampling_period > 0.0 && sampling_period < 1.0)) {
    throw ConfigError("constrained problem: sampling period Ts must lie in (0, 1)");
  }
  constants.validate();
  if (!(D0_bar >= 0.0 && std::isfinite(D0_bar))) throw ConfigError("constrained problem: D0_bar must be >= 0");

  Eigen::JacobiSVD<Matrix> svd(A);
  const auto& sv = svd.singularValues();
  const double smin = A.rows() <= A.cols() ? sv(A.rows() - 1) : 0.0;
  Matrix AB(A.rows(), A.cols() + m);
  AB << A, B;
  const Vector s = AB.completeOrthogonalDecomposition().solve(c);
  const double residual = (AB * s - c).norm();
  if (residual > 1e-9 * (1.0 + c.norm())) {
    throw ConfigError("constrained problem: c is not in range([A B]), residual " + num(residual));
  }
  if (smin <= 1e-10) {
    if (!allow_rank_deficient) {
      throw ConfigError("constrained problem: A is not full row rank (smallest singular value " +
                        num(smin) + ")");
    }
    if (!h_zero() || !b_is_zero(B)) {
      throw ConfigError("constrained problem: rank-deficient A needs B = 0 and h = 0");
    }
  }
}

DualProblem build_dual(const ConstrainedProblem& cp, bool allow_rank_deficient) {
  cp.validate(allow_rank_deficient);
  DualProblem dp;
  dp.primal = cp;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cp.A * cp.A.transpose(), Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double lmax = ev.maxCoeff();
  double lmin = ev.minCoeff();
  if (lmin <= 1e-20 * std::max(1.0, lmax)) {
    dp.rank_deficient = true;
    lmin = lmax;
    for (int i = 0; i < ev.size(); ++i) {
      if (ev[i] > 1e-12 * lmax) lmin = std::min(lmin, ev[i]);
    }
  }
  dp.normA = std::sqrt(lmax);
  dp.normB = b_is_zero(cp.B) ? 0.0 : Eigen::JacobiSVD<Matrix>(cp.B).singularValues()(0);
  dp.constants.mu_bar = lmin / cp.constants.L;
  dp.constants.L_bar = lmax / cp.constants.mu;
  dp.constants.C0_bar = dp.normA * cp.constants.C0 / cp.constants.mu;
  dp.constants.D0_bar = cp.D0_bar;
  dp.range_projector = cp.A * cp.A.completeOrthogonalDecomposition().pseudoInverse();
  return dp;
}

FrozenConstrained DualProblem::freeze_at(double t) const {
  FrozenConstrained fc;
  fc.f = freeze(primal.f, t);
  fc.h = freeze(primal.h, t);
  fc.h_zero = primal.h_zero();
  fc.A = primal.A;
  fc.B = primal.B;
  fc.c = primal.c;
  fc.t = t;
  return fc;
}

FrozenConstrained DualProblem::sample(int k) const {
  if (k < 0) throw ConfigError("sample index must be >= 0");
  return freeze_at(primal.time(k));
}

Vector primal_argmin(const FrozenConstrained& fc, const Vector& w, const Vector& hint) {
  const Vector a = fc.A.transpose() * w;
  if (fc.f.quadratic) {
    const QuadraticModel& q = *fc.f.quadratic;
    return q.hessian.ldlt().solve(q.hessian * q.anchor - q.gradient + a);
  }
  return newton_argmin(fc, a, 0.0, hint);
}

Vector augmented_argmin(const FrozenConstrained& fc, const Vector& v, double rho, const Vector& hint) {
  const Vector a = fc.A.transpose() * v;
  if (fc.f.quadratic) {
    const QuadraticModel& q = *fc.f.quadratic;
    const Matrix M = q.hessian + rho * fc.A.transpose() * fc.A;
    return M.ldlt().solve(q.hessian * q.anchor - q.gradient + a + rho * fc.A.transpose() * fc.c);
  }
  return newton_argmin(fc, a, rho, hint);
}

Vector y_argmin(const FrozenConstrained& fc, const Vector& u, double rho, const Vector& hint) {
  const int m = fc.m();
  if (m == 0) return Vector();
  if (b_is_zero(fc.B)) return Vector::Zero(m);
  const Matrix& B = fc.B;
  if (B.rows() == B.cols()) {
    const double b = B(0, 0);
    if (b != 0.0 && (B - b * Matrix::Identity(m, m)).isZero(0.0)) {
      // rho b^2/2 ||y - u/(rho b)||^2 + h(y)
      return fc.h.prox(1.0 / (rho * b * b), u / (rho * b));
    }
  }
  const Vector Btu = B.transpose() * u;
  const Matrix BtB = B.transpose() * B;
  auto grad = [&](const Vector& y) { return Vector(-Btu + rho * BtB * y); };
  CompositeOptions opts;
  opts.initial_step = 1.0 / (rho * BtB.norm());
  return minimize_composite(grad, fc.h.prox, sized_hint(hint, m), opts).x;
}

DualDerivatives dual_derivatives(const FrozenConstrained& fc, const SmoothCost* f, const Vector& w) {
  DualDerivatives d;
  d.x_bar = primal_argmin(fc, w, Vector());
  const Vector Atw = fc.A.transpose() * w;
  d.value = Atw.dot(d.x_bar) - fc.f.value(d.x_bar) - w.dot(fc.c);
  d.grad = fc.A * d.x_bar - fc.c;
  const Eigen::LDLT<Matrix> H(fc.f.hessian(d.x_bar));
  d.hessian = fc.A * H.solve(fc.A.transpose());
  if (f != nullptr) {
    d.dt_grad = -(fc.A * H.solve(f->eval_dt_grad(d.x_bar, fc.t)));
  } else {
    d.dt_grad = Vector::Zero(fc.p());
  }
  return d;
}

DualDerivatives dual_derivatives(const DualProblem& dp, const Vector& w, double t) {
  return dual_derivatives(dp.freeze_at(t), &dp.primal.f, w);
}

DualState dual_ascent_step(const FrozenConstrained& fc, const DualState& s, double rho) {
  DualState out = s;
  out.x = primal_argmin(fc, s.w, s.x);
  out.w = s.w - rho * (fc.A * out.x - fc.c);
  out.z = out.w;
  ++out.iterations;
  return out;
}

DualState mm_step(const FrozenConstrained& fc, const DualState& s, double rho) {
  DualState out = s;
  out.x = augmented_argmin(fc, s.w, rho, s.x);
  out.w = s.w - rho * (fc.A * out.x - fc.c);
  out.z = out.w;
  ++out.iterations;
  return out;
}

DualState dual_fbs_step(const FrozenConstrained& fc, const DualState& s, double rho) {
  DualState out = s;
  out.x = primal_argmin(fc, s.w, s.x);
  const Vector u = s.w - rho * (fc.A * out.x - fc.c);
  out.y = y_argmin(fc, u, rho, s.y);
  out.w = fc.m() > 0 ? Vector(u - rho * fc.B * out.y) : u;
  out.z = out.w;
  ++out.iterations;
  return out;
}

DualState admm_step(const FrozenConstrained& fc, const DualState& s, double rho) {
  DualState out = s;
  out.x = augmented_argmin(fc, s.z, rho, s.x);
  out.w = s.z - rho * (fc.A * out.x - fc.c);
  const Vector r = 2.0 * out.w - s.z;
  out.y = y_argmin(fc, r, rho, s.y);
  const Vector u = fc.m() > 0 ? Vector(r - rho * fc.B * out.y) : r;
  out.z = s.z + 2.0 * (u - out.w);
  ++out.iterations;
  return out;
}

DualState dual_warm_start(const FrozenConstrained& fc, const SolverSpec& spec, const Vector& w,
                          const Vector& x_hint) {
  DualState s;
  s.w = w;
  s.x = sized_hint(x_hint, fc.n());
  s.y = Vector::Zero(fc.m());
  if (spec.method == Method::admm) {
    s.x = primal_argmin(fc, w, s.x);
    s.z = w + spec.rho * (fc.A * s.x - fc.c);
  } else {
    s.z = w;
  }
  return s;
}

void dual_readout(const FrozenConstrained& fc, const SolverSpec& spec, DualState& s) {
  s.x = primal_argmin(fc, s.w, s.x);
  s.y = y_argmin(fc, s.w - spec.rho * (fc.A * s.x - fc.c), spec.rho, s.y);
}

DualState run_dual_solver(const FrozenConstrained& fc, const SolverSpec& spec, DualState init, int N) {
  if (N < 0) throw ConfigError("solver step count must be >= 0");
  if (N == 0) return init;
  for (int i = 0; i < N; ++i) {
    switch (spec.method) {
      case Method::dual_ascent: init = dual_ascent_step(fc, init, spec.rho); break;
      case Method::mm: init = mm_step(fc, init, spec.rho); break;
      case Method::dual_fbs: init = dual_fbs_step(fc, init, spec.rho); break;
      case Method::admm: init = admm_step(fc, init, spec.rho); break;
      default: throw ConfigError(to_string(spec.method) + " is not a dual solver");
    }
  }
  if (spec.method == Method::admm) {
    init.x = augmented_argmin(fc, init.z, spec.rho, init.x);
    init.w = init.z - spec.rho * (fc.A * init.x - fc.c);
  }
  dual_readout(fc, spec, init);
  return init;
}

FrozenConstrained dual_taylor_surrogate(const DualProblem& dp, const Vector& w_k, int k) {
  FrozenConstrained fc = dp.sample(k);
  const Vector xb = primal_argmin(fc, w_k, Vector());
  QuadraticModel q;
  q.hessian = fc.f.hessian(xb);
  q.gradient = fc.f.grad(xb) + dp.primal.sampling_period * dp.primal.f.eval_dt_grad(xb, fc.t);
  q.anchor = xb;
  q.offset = fc.f.value(xb);
  fc.f = frozen_quadratic(q);
  return fc;
}

DualOptimum dual_optimum(const DualProblem& dp, const FrozenConstrained& fc, double tol,
                         const Vector& w0) {
  constexpr int kMaxIterations = 1000000;
  const double rho = 2.0 / (dp.constants.mu_bar + dp.constants.L_bar);
  DualState s;
  s.w = dp.rank_deficient ? Vector(dp.range_projector * w0) : w0;
  s.z = s.w;
  s.x = Vector::Zero(fc.n());
  s.y = Vector::Zero(fc.m());
  for (int it = 0;; ++it) {
    if (it == kMaxIterations) throw SolverError("dual oracle did not converge", tol);
    const DualState next = dual_fbs_step(fc, s, rho);
    const double moved = (next.w - s.w).norm();
    s = next;
    if (moved <= tol) break;
  }
  SolverSpec spec;
  spec.method = Method::dual_fbs;
  spec.rho = rho;
  dual_readout(fc, spec, s);
  return {s.w, s.x, s.y};
}

std::vector<DualOptimum> dual_optimal_trajectory(const DualProblem& dp, int K, double tol,
                                                 const Vector& w0) {
  std::vector<DualOptimum> out;
  Vector w = w0;
  for (int k = 0; k < K; ++k) {
    out.push_back(dual_optimum(dp, dp.sample(k), tol, w));
    w = out.back().w;
  }
  return out;
}

TimeVaryingProblem DualProblem::as_time_varying_problem() const {
  if (!primal.h_zero() || !b_is_zero(primal.B)) {
    throw ConfigError("dual as smooth problem requires h = 0 and B = 0");
  }
  auto self = std::make_shared<const DualProblem>(*this);
  TimeVaryingProblem p;
  p.name = "dual of " + primal.name;
  p.smooth.dim = primal.p();
  p.smooth.value = [self](const Vector& w, double t) { return dual_derivatives(*self, w, t).value; };
  p.smooth.grad = [self](const Vector& w, double t) { return dual_derivatives(*self, w, t).grad; };
  p.smooth.hessian = [self](const Vector& w, double t) { return dual_derivatives(*self, w, t).hessian; };
  p.smooth.dt_grad = [self](const Vector& w, double t) { return dual_derivatives(*self, w, t).dt_grad; };
  if (primal.f.quadratic) {
    p.smooth.quadratic = [self](double t) {
      const Vector zero = Vector::Zero(self->primal.p());
      const DualDerivatives d = dual_derivatives(*self, zero, t);
      QuadraticModel q;
      q.hessian = d.hessian;
      q.gradient = d.grad;
      q.anchor = zero;
      q.offset = d.value;
      return q;
    };
  }
  p.nonsmooth = NonsmoothCost::zero();
  p.constants.mu = constants.mu_bar;
  p.constants.L = constants.L_bar;
  p.constants.C0 = constants.C0_bar;
  p.constants.D0 = constants.D0_bar;
  p.sampling_period = primal.sampling_period;
  return p;
}

double dual_one_step_bound(const DualConstants& d, const DualRunConfig& config, double Ts, double e,
                           Strategy used) {
  RegularityConstants bar;
  bar.mu = d.mu_bar;
  bar.L = d.L_bar;
  bar.C0 = d.C0_bar;
  bar.D0 = d.D0_bar;
  const double zc = zeta(config.nc, config.correction.rates);
  const double zp = zeta(config.np, config.prediction.rates);
  const double xp = xi(config.np, config.prediction.rates);
  const double sigma = optimizer_drift_bound(bar, Ts);
  double inner = zp * e + zp * sigma;
  if (xp != 0.0) {
    inner += xp * (used == Strategy::taylor ? taylor_linear_error_bound(bar, Ts, e) : sigma);
  }
  return zc * inner;
}

namespace {

void fill_errors(const DualProblem& dp, DualTraceRow& row, const DualOptimum& opt) {
  row.w_opt = opt.w;
  row.x_opt = opt.x;
  row.y_opt = opt.y;
  row.err_w = (row.w - opt.w).norm();
  row.err_x = (row.x - opt.x).norm();
  row.err_By = dp.primal.m > 0 ? (dp.primal.B * (row.y - opt.y)).norm() : 0.0;
}

}  // namespace

DualTrace run_dual_prediction_correction(const DualProblem& dp, const DualRunConfig& config,
                                         const std::vector<DualOptimum>* oracle) {
  if (config.np < 0 || config.nc < 0) throw ConfigError("solver horizons must be >= 0");
  if (config.horizon < 0) throw ConfigError("horizon K must be >= 0");
  if (config.strategy != Strategy::one_step_back && config.strategy != Strategy::taylor) {
    throw ConfigError("dual prediction supports osb and taylor only");
  }
  if (!is_dual(config.correction.method) || (config.np > 0 && !is_dual(config.prediction.method))) {
    throw ConfigError("dual prediction-correction needs dual solvers (dual_ascent, mm, dual_fbs, admm)");
  }
  if (config.w0.size() != dp.primal.p()) throw ConfigError("w0 must have p entries");
  if (dp.rank_deficient) {
    for (const Method m : {config.correction.method, config.prediction.method}) {
      if (m != Method::dual_ascent && m != Method::mm) {
        throw ConfigError("rank-deficient A is supported by dual_ascent and mm only");
      }
    }
  }
  const bool needs_y_solver = !dp.primal.h_zero();
  if (needs_y_solver && (config.correction.method == Method::dual_ascent ||
                         config.correction.method == Method::mm)) {
    throw ConfigError("dual ascent and method of multipliers need h = 0 and B = 0");
  }

  DualTrace trace;
  const int K = config.horizon;
  if (K == 0) return trace;
  std::vector<DualOptimum> own;
  if (oracle == nullptr || static_cast<int>(oracle->size()) < K) {
    own = dual_optimal_trajectory(dp, K, config.oracle_tol, config.w0);
    oracle = &own;
  }
  const double Ts = dp.primal.sampling_period;

  DualState state;
  state.w = dp.rank_deficient ? Vector(dp.range_projector * config.w0) : config.w0;
  state.z = state.w;
  state.x = Vector::Zero(dp.primal.n());
  state.y = Vector::Zero(dp.primal.m);
  FrozenConstrained current = dp.sample(0);
  dual_readout(current, config.correction, state);

  DualTraceRow first;
  first.k = 0;
  first.t = 0.0;
  first.w = state.w;
  first.x = state.x;
  first.y = state.y;
  fill_errors(dp, first, (*oracle)[0]);
  first.bound_w = first.err_w;
  trace.rows.push_back(first);

  using Clock = std::chrono::steady_clock;
  for (int k = 0; k + 1 < K; ++k) {
    try {
      const auto start = Clock::now();
      Vector w_hat = state.w;
      if (config.np > 0) {
        const FrozenConstrained surrogate = config.strategy == Strategy::taylor
                                                ? dual_taylor_surrogate(dp, state.w, k)
                                                : current;
        DualState s = dual_warm_start(surrogate, config.prediction, state.w, state.x);
        w_hat = run_dual_solver(surrogate, config.prediction, s, config.np).w;
      }
      FrozenConstrained next = dp.sample(k + 1);
      DualState s = dual_warm_start(next, config.correction, w_hat, state.x);
      s = run_dual_solver(next, config.correction, s, config.nc);
      if (config.nc == 0) dual_readout(next, config.correction, s);
      const auto stop = Clock::now();

      DualTraceRow row;
      row.k = k + 1;
      row.t = dp.primal.time(k + 1);
      row.w = s.w;
      row.x = s.x;
      row.y = s.y;
      fill_errors(dp, row, (*oracle)[k + 1]);
      row.bound_w = dual_one_step_bound(dp.constants, config, Ts, trace.rows.back().err_w, config.strategy);
      row.ms = config.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
      trace.rows.push_back(std::move(row));
      state = std::move(s);
      current = std::move(next);
    } catch (const SolverError& e) {
      trace.failure = "step " + std::to_string(k + 1) + ": " + e.what();
      break;
    }
  }
  return trace;
}

DualCheckReport check_dual_trace(const DualProblem& dp, const DualTrace& trace,
                                 const DualRunConfig& config, double slack) {
  DualCheckReport r;
  const RecoveryFactors f =
      primal_recovery_factors(dp.normA, dp.normB, dp.primal.constants.mu, config.correction.rho);
  const double Ts = dp.primal.sampling_period;
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const DualTraceRow& row = trace.rows[k];
    ++r.checked;
    if (k > 0) {
      const double b =
          dual_one_step_bound(dp.constants, config, Ts, trace.rows[k - 1].err_w, config.strategy);
      if (!(row.err_w <= b + slack)) r.recursion_violations.push_back(row.k);
    }
    const bool x_ok = row.err_x <= f.fx * row.err_w + slack;
    const bool y_ok = row.err_By <= f.fBy * row.err_w + slack;
    if (!x_ok || !y_ok) r.recovery_violations.push_back(row.k);
  }
  return r;
}

ErrorStats dual_asymptotic_stats(const DualTrace& trace) {
  RunTrace proxy;
  proxy.rows.reserve(trace.rows.size());
  for (const auto& row : trace.rows) {
    TraceRow r;
    r.err = row.err_w;
    r.ms = row.ms;
    proxy.rows.push_back(r);
  }
  return asymptotic_stats(proxy);
}

}  // namespace tvopt
