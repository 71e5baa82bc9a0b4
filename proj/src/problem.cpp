#include "tvopt/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <sstream>

namespace tvopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double fd_step(const Vector& x) { return std::max(1e-6, 1e-6 * x.norm()); }
double fd_time_step(double t) { return std::max(1e-6, 1e-6 * std::abs(t)); }

double spectral_norm(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Matrix>(M).singularValues()(0);
}

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

double QuadraticModel::value(const Vector& x) const {
  const Vector d = x - anchor;
  return offset + gradient.dot(d) + 0.5 * d.dot(hessian * d);
}

Vector QuadraticModel::grad(const Vector& x) const { return gradient + hessian * (x - anchor); }

Vector QuadraticModel::prox(double rho, const Vector& v) const {
  // (I + rho H) y = v - rho g + rho H a
  const Matrix M = Matrix::Identity(hessian.rows(), hessian.cols()) + rho * hessian;
  const Vector rhs = v - rho * gradient + rho * (hessian * anchor);
  return M.ldlt().solve(rhs);
}

Matrix SmoothCost::eval_hessian(const Vector& x, double t) const {
  if (hessian) return hessian(x, t);
  const double h = fd_step(x);
  Matrix H(dim, dim);
  Vector e = Vector::Zero(dim);
  for (int i = 0; i < dim; ++i) {
    e[i] = h;
    H.col(i) = (grad(x + e, t) - grad(x - e, t)) / (2.0 * h);
    e[i] = 0.0;
  }
  return 0.5 * (H + H.transpose());
}

Vector SmoothCost::eval_dt_grad(const Vector& x, double t) const {
  if (dt_grad) return dt_grad(x, t);
  const double h = fd_time_step(t);
  return (grad(x, t + h) - grad(x, t - h)) / (2.0 * h);
}

Vector SmoothCost::eval_dtt_grad(const Vector& x, double t) const {
  if (dtt_grad) return dtt_grad(x, t);
  if (dt_grad) {
    const double h = fd_time_step(t);
    return (dt_grad(x, t + h) - dt_grad(x, t - h)) / (2.0 * h);
  }
  const double h = std::max(1e-4, 1e-4 * std::abs(t));
  return (grad(x, t + h) - 2.0 * grad(x, t) + grad(x, t - h)) / (h * h);
}

Vector soft_threshold(const Vector& v, double threshold) {
  return v.unaryExpr([threshold](double a) {
    const double m = std::abs(a) - threshold;
    return m > 0.0 ? std::copysign(m, a) : 0.0;
  });
}

NonsmoothCost NonsmoothCost::zero() {
  NonsmoothCost g;
  g.kind = NonsmoothKind::zero;
  g.value = [](const Vector&, double) { return 0.0; };
  g.prox = [](double, const Vector& v, double) { return v; };
  g.subgrad = [](const Vector& x, double) { return Vector(Vector::Zero(x.size())); };
  return g;
}

NonsmoothCost NonsmoothCost::l1(double weight) {
  if (!finite_nonneg(weight)) throw ConfigError("l1 weight must be finite and >= 0");
  NonsmoothCost g = l1([weight](double) { return weight; });
  g.time_varying = false;
  return g;
}

NonsmoothCost NonsmoothCost::l1(std::function<double(double)> weight) {
  NonsmoothCost g;
  g.kind = NonsmoothKind::l1;
  g.time_varying = true;
  g.value = [weight](const Vector& x, double t) { return weight(t) * x.lpNorm<1>(); };
  g.prox = [weight](double rho, const Vector& v, double t) {
    return soft_threshold(v, rho * weight(t));
  };
  g.subgrad = [weight](const Vector& x, double t) {
    const double w = weight(t);
    return Vector(x.unaryExpr([w](double a) { return a > 0.0 ? w : (a < 0.0 ? -w : 0.0); }));
  };
  return g;
}

NonsmoothCost NonsmoothCost::box(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || (lower.array() > upper.array()).any()) {
    throw ConfigError("box bounds must have equal size and lower <= upper");
  }
  NonsmoothCost g = box([lower](double) { return lower; }, [upper](double) { return upper; });
  g.time_varying = false;
  return g;
}

NonsmoothCost NonsmoothCost::box(std::function<Vector(double)> lower,
                                 std::function<Vector(double)> upper) {
  NonsmoothCost g;
  g.kind = NonsmoothKind::box;
  g.time_varying = true;
  g.value = [lower, upper](const Vector& x, double t) {
    constexpr double tol = 1e-12;
    const bool inside = ((x.array() >= lower(t).array() - tol) &&
                         (x.array() <= upper(t).array() + tol)).all();
    return inside ? 0.0 : kInf;
  };
  g.prox = [lower, upper](double, const Vector& v, double t) {
    return Vector(v.cwiseMax(lower(t)).cwiseMin(upper(t)));
  };
  g.subgrad = [](const Vector& x, double) { return Vector(Vector::Zero(x.size())); };
  return g;
}

NonsmoothCost NonsmoothCost::halfspace(Vector a, double b) {
  const double a2 = a.squaredNorm();
  if (!(a2 > 0.0)) throw ConfigError("halfspace normal must be nonzero");
  NonsmoothCost g;
  g.kind = NonsmoothKind::halfspace;
  g.value = [a, b](const Vector& x, double) { return a.dot(x) <= b + 1e-12 ? 0.0 : kInf; };
  g.prox = [a, b, a2](double, const Vector& v, double) {
    const double excess = a.dot(v) - b;
    return excess > 0.0 ? Vector(v - (excess / a2) * a) : v;
  };
  g.subgrad = [](const Vector& x, double) { return Vector(Vector::Zero(x.size())); };
  return g;
}

NonsmoothCost NonsmoothCost::custom(std::function<double(const Vector&, double)> value,
                                    std::function<Vector(double, const Vector&, double)> prox,
                                    std::function<Vector(const Vector&, double)> subgrad,
                                    bool time_varying) {
  if (!value || !prox || !subgrad) throw ConfigError("custom nonsmooth cost needs value, prox and subgrad");
  NonsmoothCost g;
  g.kind = NonsmoothKind::custom;
  g.value = std::move(value);
  g.prox = std::move(prox);
  g.subgrad = std::move(subgrad);
  g.time_varying = time_varying;
  return g;
}

void RegularityConstants::validate() const {
  const std::pair<const char*, double> fields[] = {{"mu", mu}, {"L", L},   {"C0", C0}, {"C1", C1},
                                                   {"C2", C2}, {"C3", C3}, {"D0", D0}};
  for (const auto& [name, v] : fields) {
    if (!finite_nonneg(v)) throw ConfigError(std::string("constant ") + name + " must be finite and >= 0");
  }
  if (!(mu > 0.0)) throw ConfigError("constant mu must be > 0");
  if (L < mu) throw ConfigError("constant L must be >= mu");
}

void TimeVaryingProblem::validate() const {
  if (smooth.dim <= 0) throw ConfigError("problem dimension must be positive");
  if (!smooth.value || !smooth.grad) throw ConfigError("smooth cost needs value and grad oracles");
  if (!nonsmooth.prox || !nonsmooth.value || !nonsmooth.subgrad) {
    throw ConfigError("nonsmooth cost needs value, prox and subgrad oracles");
  }
  if (!(sampling_period > 0.0 && sampling_period < 1.0)) {
    throw ConfigError("sampling period Ts must lie in (0, 1), got " + fmt(sampling_period));
  }
  constants.validate();
}

FrozenSmooth freeze(const SmoothCost& cost, double t) {
  auto c = std::make_shared<const SmoothCost>(cost);
  FrozenSmooth f;
  f.dim = cost.dim;
  f.value = [c, t](const Vector& x) { return c->value(x, t); };
  f.grad = [c, t](const Vector& x) { return c->grad(x, t); };
  f.hessian = [c, t](const Vector& x) { return c->eval_hessian(x, t); };
  if (cost.quadratic) f.quadratic = cost.quadratic(t);
  return f;
}

FrozenSmooth frozen_quadratic(const QuadraticModel& q) {
  auto m = std::make_shared<const QuadraticModel>(q);
  FrozenSmooth f;
  f.dim = static_cast<int>(q.anchor.size());
  f.value = [m](const Vector& x) { return m->value(x); };
  f.grad = [m](const Vector& x) { return m->grad(x); };
  f.hessian = [m](const Vector&) { return m->hessian; };
  f.quadratic = q;
  return f;
}

QuadraticModel reanchor(const QuadraticModel& q, const Vector& anchor) {
  QuadraticModel r;
  r.hessian = q.hessian;
  r.gradient = q.grad(anchor);
  r.anchor = anchor;
  r.offset = q.value(anchor);
  return r;
}

FrozenNonsmooth freeze(const NonsmoothCost& cost, double t) {
  auto c = std::make_shared<const NonsmoothCost>(cost);
  FrozenNonsmooth g;
  g.kind = cost.kind;
  g.value = [c, t](const Vector& x) { return c->value(x, t); };
  g.prox = [c, t](double rho, const Vector& v) { return c->prox(rho, v, t); };
  g.subgrad = [c, t](const Vector& x) { return c->subgrad(x, t); };
  return g;
}

SampledProblem sample(const TimeVaryingProblem& problem, int k) {
  if (k < 0) throw ConfigError("sample index must be >= 0");
  SampledProblem s;
  s.k = k;
  s.t = problem.time(k);
  s.f = freeze(problem.smooth, s.t);
  s.g = freeze(problem.nonsmooth, s.t);
  return s;
}

Vector prox_smooth(const FrozenSmooth& f, double rho, const Vector& v, const NewtonOptions& options) {
  if (!(rho > 0.0)) throw ConfigError("prox parameter rho must be > 0");
  if (f.quadratic) return f.quadratic->prox(rho, v);
  const double inv = 1.0 / rho;
  auto value = [&](const Vector& y) { return f.value(y) + 0.5 * inv * (y - v).squaredNorm(); };
  auto grad = [&](const Vector& y) { return Vector(f.grad(y) + inv * (y - v)); };
  auto hess = [&](const Vector& y) {
    return Matrix(f.hessian(y) + inv * Matrix::Identity(f.dim, f.dim));
  };
  return minimize_newton(value, grad, hess, v, options).x;
}

Vector finite_diff_dt_grad(const FrozenSmooth& f_k, const FrozenSmooth& f_km1, const Vector& x,
                           double Ts) {
  if (!(Ts > 0.0)) throw ConfigError("finite difference period Ts must be > 0");
  return (f_k.grad(x) - f_km1.grad(x)) / Ts;
}

std::vector<Probe> random_probes(int dim, double lo, double hi, double t_max, int count,
                                 unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo, hi);
  std::uniform_real_distribution<double> ut(0.0, t_max);
  std::vector<Probe> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    Probe p;
    p.x.resize(dim);
    for (int j = 0; j < dim; ++j) p.x[j] = ux(rng);
    p.t = ut(rng);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<Probe> grid_probes_1d(double lo, double hi, int nx, double t_max, int nt) {
  std::vector<Probe> out;
  for (int i = 0; i < nx; ++i) {
    const double x = nx > 1 ? lo + (hi - lo) * i / (nx - 1) : lo;
    for (int j = 0; j < nt; ++j) {
      const double t = nt > 1 ? t_max * j / (nt - 1) : 0.0;
      out.push_back({Vector::Constant(1, x), t});
    }
  }
  return out;
}

ConstantReport validate_constants(const TimeVaryingProblem& problem, const std::vector<Probe>& grid) {
  ConstantReport r;
  if (grid.empty()) {
    r.violations.push_back("probe grid is empty");
    return r;
  }
  const SmoothCost& f = problem.smooth;
  const RegularityConstants& c = problem.constants;
  const int n = f.dim;
  r.min_eigenvalue = kInf;
  double min_monotone = kInf;

  for (std::size_t p = 0; p < grid.size(); ++p) {
    const Vector& x = grid[p].x;
    const double t = grid[p].t;
    ++r.probes;

    const Matrix H = f.eval_hessian(x, t);
    const double asym = (H - H.transpose()).norm() / std::max(1.0, H.norm());
    if (asym > 1e-8) r.violations.push_back("hessian not symmetric at probe " + std::to_string(p));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (H + H.transpose()), Eigen::EigenvaluesOnly);
    r.min_eigenvalue = std::min(r.min_eigenvalue, eig.eigenvalues().minCoeff());
    r.max_eigenvalue = std::max(r.max_eigenvalue, eig.eigenvalues().maxCoeff());

    r.max_dt_grad = std::max(r.max_dt_grad, f.eval_dt_grad(x, t).norm());
    r.max_dtt_grad = std::max(r.max_dtt_grad, f.eval_dtt_grad(x, t).norm());

    // Third derivative and time-Hessian by central differences of the Hessian.
    const double hx = 1e-4;
    Vector e = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      e[i] = hx;
      const Matrix D = (f.eval_hessian(x + e, t) - f.eval_hessian(x - e, t)) / (2.0 * hx);
      r.max_third_x = std::max(r.max_third_x, spectral_norm(D));
      e[i] = 0.0;
    }
    const double ht = 1e-4;
    const Matrix Dt = (f.eval_hessian(x, t + ht) - f.eval_hessian(x, t - ht)) / (2.0 * ht);
    r.max_dt_hessian = std::max(r.max_dt_hessian, spectral_norm(Dt));

    // Oracle consistency.
    const double h = fd_step(x);
    const Vector g = f.grad(x, t);
    Vector g_fd(n);
    Matrix H_fd(n, n);
    for (int i = 0; i < n; ++i) {
      e[i] = h;
      g_fd[i] = (f.value(x + e, t) - f.value(x - e, t)) / (2.0 * h);
      H_fd.col(i) = (f.grad(x + e, t) - f.grad(x - e, t)) / (2.0 * h);
      e[i] = 0.0;
    }
    r.max_grad_fd_error = std::max(r.max_grad_fd_error, (g_fd - g).norm() / std::max(1.0, g.norm()));
    r.max_hess_fd_error = std::max(r.max_hess_fd_error, (H_fd - H).norm() / std::max(1.0, H.norm()));

    if (p + 1 < grid.size()) {
      const Vector& y = grid[p + 1].x;
      const double d2 = (x - y).squaredNorm();
      if (d2 > 1e-12) {
        min_monotone = std::min(min_monotone, (g - f.grad(y, t)).dot(x - y) / d2);
      }
    }
  }

  auto exceeds = [](double observed, double declared, double rel, double abs) {
    return observed > declared * (1.0 + rel) + abs;
  };
  if (r.min_eigenvalue < c.mu * (1.0 - 1e-6) - 1e-9) {
    r.violations.push_back("mu: observed hessian eigenvalue " + fmt(r.min_eigenvalue) +
                           " below declared " + fmt(c.mu));
  }
  if (std::isfinite(min_monotone) && min_monotone < c.mu * (1.0 - 1e-6) - 1e-9) {
    r.violations.push_back("mu: gradient monotonicity ratio " + fmt(min_monotone) +
                           " below declared " + fmt(c.mu));
  }
  if (exceeds(r.max_eigenvalue, c.L, 1e-6, 1e-9)) {
    r.violations.push_back("L: observed hessian eigenvalue " + fmt(r.max_eigenvalue) +
                           " above declared " + fmt(c.L));
  }
  if (exceeds(r.max_dt_grad, c.C0, 1e-6, 1e-9)) {
    r.violations.push_back("C0: observed time derivative of gradient " + fmt(r.max_dt_grad) +
                           " above declared " + fmt(c.C0));
  }
  // Differences of a differenced Hessian (or dt_grad) carry a larger noise floor.
  const double floor_hess = f.hessian ? 1e-6 : 1e-4;
  const double floor_dtt = f.dtt_grad ? 1e-6 : 1e-4;
  if (exceeds(r.max_third_x, c.C1, 1e-4, floor_hess)) {
    r.violations.push_back("C1: observed third derivative " + fmt(r.max_third_x) +
                           " above declared " + fmt(c.C1));
  }
  if (exceeds(r.max_dt_hessian, c.C2, 1e-4, floor_hess)) {
    r.violations.push_back("C2: observed time derivative of hessian " + fmt(r.max_dt_hessian) +
                           " above declared " + fmt(c.C2));
  }
  if (exceeds(r.max_dtt_grad, c.C3, 1e-4, floor_dtt)) {
    r.violations.push_back("C3: observed second time derivative of gradient " + fmt(r.max_dtt_grad) +
                           " above declared " + fmt(c.C3));
  }
  if (r.max_grad_fd_error > 1e-5) {
    r.violations.push_back("grad oracle disagrees with differenced value, rel " + fmt(r.max_grad_fd_error));
  }
  if (r.max_hess_fd_error > 1e-5) {
    r.violations.push_back("hessian oracle disagrees with differenced grad, rel " + fmt(r.max_hess_fd_error));
  }
  return r;
}

double estimate_d0(const TimeVaryingProblem& problem, const std::vector<Vector>& trajectory) {
  if (!problem.nonsmooth.time_varying) return 0.0;
  double d0 = 0.0;
  for (std::size_t k = 0; k + 1 < trajectory.size(); ++k) {
    const double tk = problem.time(static_cast<int>(k));
    const double tk1 = problem.time(static_cast<int>(k) + 1);
    const Vector a = problem.nonsmooth.subgrad(trajectory[k], tk1);
    const Vector b = problem.nonsmooth.subgrad(trajectory[k], tk);
    d0 = std::max(d0, (a - b).norm());
  }
  return d0;
}

}  // namespace tvopt
