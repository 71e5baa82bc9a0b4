#include "tvopt/prediction.hpp"

#include <algorithm>
#include <memory>

#include "tvopt/bounds.hpp"

namespace tvopt {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::one_step_back: return "osb";
    case Strategy::taylor: return "taylor";
    case Strategy::taylor_fd: return "taylor_fd";
    case Strategy::extrapolation: return "extrapolation";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "osb") return Strategy::one_step_back;
  if (name == "taylor") return Strategy::taylor;
  if (name == "taylor_fd") return Strategy::taylor_fd;
  if (name == "extrapolation") return Strategy::extrapolation;
  throw ConfigError("unknown prediction strategy '" + name +
                    "' (expected osb, taylor, taylor_fd or extrapolation)");
}

Surrogate one_step_back(const SampledProblem& current) {
  Surrogate s;
  s.f = current.f;
  s.g = current.g;
  s.provenance = Strategy::one_step_back;
  s.anchor_t = current.t;
  return s;
}

namespace {

Surrogate taylor_from(const SampledProblem& current, const Vector& x_k, const Vector& dt_grad,
                      double Ts, Strategy provenance) {
  QuadraticModel q;
  q.hessian = current.f.hessian(x_k);
  q.gradient = current.f.grad(x_k) + Ts * dt_grad;
  q.anchor = x_k;
  q.offset = current.f.value(x_k);
  Surrogate s;
  s.f = frozen_quadratic(q);
  s.g = current.g;
  s.provenance = provenance;
  s.anchor_x = x_k;
  s.anchor_t = current.t;
  return s;
}

}  // namespace

Surrogate taylor_surrogate(const SmoothCost& f, const SampledProblem& current, const Vector& x_k,
                           double Ts) {
  if (!f.dt_grad) {
    throw ConfigError("taylor prediction needs a dt_grad oracle; use taylor_fd for finite differences");
  }
  return taylor_from(current, x_k, f.dt_grad(x_k, current.t), Ts, Strategy::taylor);
}

Surrogate taylor_surrogate_fd(const SampledProblem& current, const SampledProblem& previous,
                              const Vector& x_k, double Ts) {
  return taylor_from(current, x_k, finite_diff_dt_grad(current.f, previous.f, x_k, Ts), Ts,
                     Strategy::taylor_fd);
}

std::vector<double> interpolation_coefficients(int I) {
  if (I < 1) throw ConfigError("extrapolation order must be >= 1");
  std::vector<double> l(I, 1.0);
  for (int i = 1; i <= I; ++i) {
    for (int j = 1; j <= I; ++j) {
      if (j != i) l[i - 1] *= static_cast<double>(j) / static_cast<double>(j - i);
    }
  }
  return l;
}

Surrogate extrapolation_surrogate(const std::vector<SampledProblem>& history, double C2) {
  if (C2 > 0.0) {
    throw ConfigError("extrapolation prediction requires a time-invariant hessian (C2 = 0), got C2 > 0");
  }
  if (history.empty()) throw ConfigError("extrapolation needs at least one past cost");
  const int I = static_cast<int>(history.size());
  const std::vector<double> l = interpolation_coefficients(I);

  Surrogate s;
  s.g = history.front().g;
  s.provenance = I == 1 ? Strategy::one_step_back : Strategy::extrapolation;
  s.extrapolation_order = I;
  s.anchor_t = history.front().t;

  const bool all_quadratic = std::all_of(history.begin(), history.end(),
                                         [](const SampledProblem& h) { return h.f.quadratic.has_value(); });
  if (all_quadratic) {
    const Vector& a = history.front().f.quadratic->anchor;
    QuadraticModel q;
    q.anchor = a;
    q.hessian = Matrix::Zero(a.size(), a.size());
    q.gradient = Vector::Zero(a.size());
    for (int i = 0; i < I; ++i) {
      const QuadraticModel r = reanchor(*history[i].f.quadratic, a);
      q.hessian += l[i] * r.hessian;
      q.gradient += l[i] * r.gradient;
      q.offset += l[i] * r.offset;
    }
    s.f = frozen_quadratic(q);
    return s;
  }

  auto parts = std::make_shared<std::vector<FrozenSmooth>>();
  for (const auto& h : history) parts->push_back(h.f);
  auto w = std::make_shared<const std::vector<double>>(l);
  s.f.dim = history.front().f.dim;
  s.f.value = [parts, w](const Vector& x) {
    double v = 0.0;
    for (std::size_t i = 0; i < parts->size(); ++i) v += (*w)[i] * (*parts)[i].value(x);
    return v;
  };
  s.f.grad = [parts, w](const Vector& x) {
    Vector g = (*w)[0] * (*parts)[0].grad(x);
    for (std::size_t i = 1; i < parts->size(); ++i) g += (*w)[i] * (*parts)[i].grad(x);
    return g;
  };
  s.f.hessian = [parts, w](const Vector& x) {
    Matrix H = (*w)[0] * (*parts)[0].hessian(x);
    for (std::size_t i = 1; i < parts->size(); ++i) H += (*w)[i] * (*parts)[i].hessian(x);
    return H;
  };
  return s;
}

Surrogate extrapolation_surrogate(const SampledProblem& current, const SampledProblem& previous,
                                  double C2) {
  return extrapolation_surrogate(std::vector<SampledProblem>{current, previous}, C2);
}

double optimizer_drift_bound(const RegularityConstants& c, double Ts) {
  return (c.C0 * Ts + c.D0) / c.mu;
}

double taylor_linear_error_bound(const RegularityConstants& c, double Ts, double e) {
  return 2.0 * c.kappa() * e + 2.0 * optimizer_drift_bound(c, Ts) * (1.0 + c.kappa());
}

double taylor_quadratic_error_bound(const RegularityConstants& c, double Ts, double e,
                                   bool finite_difference) {
  const TaylorConstants k = taylor_constants(c, Ts, finite_difference);
  return c.C1 / (2.0 * c.mu) * e * e + k.C4 * e + k.C5 * Ts * Ts / 2.0 + k.C6 * c.D0;
}

double extrapolation_error_bound(const RegularityConstants& c, double Ts) {
  return (c.C3 * Ts * Ts + c.D0) / c.mu;
}

double prediction_error_bound(Strategy s, const RegularityConstants& c, double Ts, double e) {
  switch (s) {
    case Strategy::one_step_back: return optimizer_drift_bound(c, Ts);
    case Strategy::taylor:
    case Strategy::taylor_fd:
      return std::min(taylor_linear_error_bound(c, Ts, e),
                      taylor_quadratic_error_bound(c, Ts, e, s == Strategy::taylor_fd));
    case Strategy::extrapolation: return extrapolation_error_bound(c, Ts);
  }
  return kInfinity;
}

}  // namespace tvopt
