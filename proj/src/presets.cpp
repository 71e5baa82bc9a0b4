#include "tvopt/presets.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace tvopt {

namespace {

/// Reads parameters with defaults and rejects keys nobody asked for.
class Params {
 public:
  Params(std::string preset, const ParamMap& values) : preset_(std::move(preset)), values_(values) {}

  double get(const std::string& key, double fallback) {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  void apply_constants(RegularityConstants& c, double& ts) {
    c.mu = get("mu", c.mu);
    c.L = get("L", c.L);
    c.C0 = get("C0", c.C0);
    c.C1 = get("C1", c.C1);
    c.C2 = get("C2", c.C2);
    c.C3 = get("C3", c.C3);
    c.D0 = get("D0", c.D0);
    ts = get("ts", ts);
  }

  void finish() const {
    for (const auto& [key, value] : values_) {
      if (!used_.count(key)) throw ConfigError("preset " + preset_ + ": unknown parameter '" + key + "'");
    }
  }

 private:
  std::string preset_;
  const ParamMap& values_;
  std::set<std::string> used_;
};

double logistic(double s) { return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s)); }

double softplus(double s) { return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

TimeVaryingProblem scheduled_target(Params& p) {
  const double omega = p.get("omega", 0.02 * std::numbers::pi);
  const double eps = p.get("eps", 7.5);
  const double phi = p.get("phi", 1.75);
  const double nu = p.get("nu", 0.5);
  if (!(eps >= 0.0 && nu >= 0.0)) throw ConfigError("preset scheduled_target: eps and nu must be >= 0");

  TimeVaryingProblem pr;
  pr.name = "scheduled_target";
  SmoothCost& f = pr.smooth;
  f.dim = 1;
  f.value = [=](const Vector& x, double t) {
    const double r = x[0] - std::cos(omega * t);
    return 0.5 * r * r + eps * softplus(phi * x[0]);
  };
  f.grad = [=](const Vector& x, double t) {
    return Vector::Constant(1, x[0] - std::cos(omega * t) + eps * phi * logistic(phi * x[0]));
  };
  f.hessian = [=](const Vector& x, double) {
    const double s = logistic(phi * x[0]);
    return Matrix::Constant(1, 1, 1.0 + eps * phi * phi * s * (1.0 - s));
  };
  f.dt_grad = [=](const Vector&, double t) { return Vector::Constant(1, omega * std::sin(omega * t)); };
  f.dtt_grad = [=](const Vector&, double t) {
    return Vector::Constant(1, omega * omega * std::cos(omega * t));
  };
  pr.nonsmooth = NonsmoothCost::l1(nu);

  RegularityConstants& c = pr.constants;
  c.mu = 1.0;
  c.L = 1.0 + eps * phi * phi / 4.0;
  c.C0 = omega;
  c.C1 = eps * phi * phi * phi * logistic_third_derivative_peak();
  c.C2 = 0.0;
  c.C3 = omega * omega;
  c.D0 = 0.0;
  return pr;
}

TimeVaryingProblem quadratic_drift(Params& p, double c0_scale, double l_declared) {
  const double q2 = p.get("q2", 3.0);
  if (!(q2 >= 1.0)) throw ConfigError("preset quadratic_drift: q2 must be >= 1");
  TimeVaryingProblem pr;
  pr.name = "quadratic_drift";
  Matrix Q = Matrix::Zero(2, 2);
  Q(0, 0) = 1.0;
  Q(1, 1) = q2;
  auto b = [](double t) { return Vector{{std::sin(t), std::cos(2.0 * t)}}; };
  SmoothCost& f = pr.smooth;
  f.dim = 2;
  f.value = [=](const Vector& x, double t) { return 0.5 * x.dot(Q * x) - b(t).dot(x); };
  f.grad = [=](const Vector& x, double t) { return Vector(Q * x - b(t)); };
  f.hessian = [=](const Vector&, double) { return Q; };
  f.dt_grad = [](const Vector&, double t) { return Vector{{-std::cos(t), 2.0 * std::sin(2.0 * t)}}; };
  f.dtt_grad = [](const Vector&, double t) { return Vector{{std::sin(t), 4.0 * std::cos(2.0 * t)}}; };
  f.quadratic = [=](double t) {
    QuadraticModel q;
    q.hessian = Q;
    q.gradient = -b(t);
    q.anchor = Vector::Zero(2);
    return q;
  };
  pr.nonsmooth = NonsmoothCost::zero();
  RegularityConstants& c = pr.constants;
  c.mu = 1.0;
  c.L = l_declared > 0.0 ? l_declared : q2;
  c.C0 = c0_scale * std::sqrt(5.0);
  c.C3 = std::sqrt(17.0);
  return pr;
}

TimeVaryingProblem constrained_qp(Params& p) {
  const double omega = p.get("omega", 0.5);
  const double radius = p.get("radius", 2.0);
  TimeVaryingProblem pr;
  pr.name = "constrained_qp";
  auto b = [=](double t) { return Vector{{radius * std::cos(omega * t), radius * std::sin(omega * t)}}; };
  SmoothCost& f = pr.smooth;
  f.dim = 2;
  f.value = [=](const Vector& x, double t) { return 0.5 * (x - b(t)).squaredNorm(); };
  f.grad = [=](const Vector& x, double t) { return Vector(x - b(t)); };
  f.hessian = [](const Vector&, double) { return Matrix(Matrix::Identity(2, 2)); };
  f.dt_grad = [=](const Vector&, double t) {
    return Vector{{radius * omega * std::sin(omega * t), -radius * omega * std::cos(omega * t)}};
  };
  f.dtt_grad = [=](const Vector&, double t) { return Vector(omega * omega * b(t)); };
  f.quadratic = [=](double t) {
    QuadraticModel q;
    q.hessian = Matrix::Identity(2, 2);
    q.gradient = -b(t);
    q.anchor = Vector::Zero(2);
    q.offset = 0.5 * b(t).squaredNorm();
    return q;
  };
  pr.nonsmooth = NonsmoothCost::box(Vector(Vector::Constant(2, -1.0)), Vector(Vector::Constant(2, 1.0)));
  RegularityConstants& c = pr.constants;
  c.mu = 1.0;
  c.L = 1.0;
  c.C0 = std::abs(radius * omega);
  c.C3 = std::abs(radius) * omega * omega;
  return pr;
}

/// f = 1/2 (x - r(t))' Q (x - r(t)) with r drifting in time.
SmoothCost drifting_quadratic(const Matrix& Q, std::function<Vector(double)> r,
                              std::function<Vector(double)> dr, std::function<Vector(double)> ddr) {
  SmoothCost f;
  f.dim = static_cast<int>(Q.rows());
  f.value = [=](const Vector& x, double t) {
    const Vector d = x - r(t);
    return 0.5 * d.dot(Q * d);
  };
  f.grad = [=](const Vector& x, double t) { return Vector(Q * (x - r(t))); };
  f.hessian = [=](const Vector&, double) { return Q; };
  f.dt_grad = [=](const Vector&, double t) { return Vector(-Q * dr(t)); };
  f.dtt_grad = [=](const Vector&, double t) { return Vector(-Q * ddr(t)); };
  f.quadratic = [=](double t) {
    QuadraticModel q;
    q.hessian = Q;
    q.gradient = Vector::Zero(Q.rows());
    q.anchor = r(t);
    return q;
  };
  return f;
}

ConstrainedProblem tv_qp_eq(Params& p) {
  const double w = p.get("omega", 0.5);
  ConstrainedProblem cp;
  cp.name = "tv_qp_eq";
  const Matrix Q = Vector{{1.0, 2.0, 3.0}}.asDiagonal();
  cp.f = drifting_quadratic(
      Q, [=](double t) { return Vector{{std::cos(w * t), std::sin(w * t), 0.5 * std::cos(2 * w * t)}}; },
      [=](double t) {
        return Vector{{-w * std::sin(w * t), w * std::cos(w * t), -w * std::sin(2 * w * t)}};
      },
      [=](double t) {
        return Vector{{-w * w * std::cos(w * t), -w * w * std::sin(w * t), -2 * w * w * std::cos(2 * w * t)}};
      });
  cp.h = NonsmoothCost::zero();
  cp.m = 0;
  cp.A = Matrix{{1.0, 1.0, 1.0}, {1.0, -1.0, 0.0}};
  cp.B = Matrix(2, 0);
  cp.c = Vector{{1.0, 0.0}};
  cp.constants.mu = 1.0;
  cp.constants.L = 3.0;
  // |Q r'|^2 = w^2 (sin^2 + 4 cos^2 + 9 sin^2(2wt)) <= 13 w^2.
  cp.constants.C0 = std::abs(w) * std::sqrt(13.0);
  cp.constants.C3 = w * w * std::sqrt(4.0 + 36.0);
  return cp;
}

ConstrainedProblem tv_sharing(Params& p) {
  const double w = p.get("omega", 0.5);
  const double amp = p.get("radius", 2.0);
  const double nu = p.get("nu", 0.5);
  ConstrainedProblem cp;
  cp.name = "tv_sharing";
  cp.f = drifting_quadratic(
      Matrix::Identity(2, 2),
      [=](double t) { return Vector{{amp * std::cos(w * t), amp * std::sin(w * t)}}; },
      [=](double t) { return Vector{{-amp * w * std::sin(w * t), amp * w * std::cos(w * t)}}; },
      [=](double t) { return Vector{{-amp * w * w * std::cos(w * t), -amp * w * w * std::sin(w * t)}}; });
  cp.h = NonsmoothCost::l1(nu);
  cp.m = 2;
  cp.A = Matrix{{1.0, 0.5}, {0.0, 1.0}};
  cp.B = -Matrix::Identity(2, 2);
  cp.c = Vector::Zero(2);
  cp.constants.mu = 1.0;
  cp.constants.L = 1.0;
  cp.constants.C0 = std::abs(amp * w);
  cp.constants.C3 = std::abs(amp) * w * w;
  return cp;
}

}  // namespace

double logistic_third_derivative_peak() { return std::sqrt(3.0) / 18.0; }

const std::vector<PresetInfo>& presets() {
  static const std::vector<PresetInfo> list = {
      {"scheduled_target", false,
       "scalar tracking of cos(omega t) with logistic penalty and nu |x| (omega, eps, phi, nu)"},
      {"quadratic_drift", false, "2-D quadratic with drifting linear term, g = 0 (q2)"},
      {"constrained_qp", false, "2-D circular target projected onto the box [-1, 1]^2 (omega, radius)"},
      {"broken_drift", false, "quadratic_drift with understated L and C0, for validation failures"},
      {"tv_qp_eq", true, "3-D drifting quadratic with two linear equality constraints (omega)"},
      {"tv_sharing", true, "2-D drifting target shared through y = A x with h = nu ||y||_1 (omega, radius, nu)"},
  };
  return list;
}

namespace {

// Older configuration files name the scheduled-target preset paper_sec7.
std::string canonical(const std::string& name) {
  return name == "paper_sec7" ? "scheduled_target" : name;
}

}  // namespace

bool has_preset(const std::string& raw) {
  const std::string name = canonical(raw);
  for (const auto& p : presets()) {
    if (p.name == name) return true;
  }
  return false;
}

bool is_constrained_preset(const std::string& raw) {
  const std::string name = canonical(raw);
  for (const auto& p : presets()) {
    if (p.name == name) return p.constrained;
  }
  return false;
}

TimeVaryingProblem make_problem(const std::string& raw, const ParamMap& params) {
  const std::string name = canonical(raw);
  if (!has_preset(name)) throw ConfigError("unknown preset '" + name + "'");
  if (is_constrained_preset(name)) throw ConfigError("preset " + name + " is a constrained problem");
  Params p(name, params);
  TimeVaryingProblem pr;
  if (name == "scheduled_target") pr = scheduled_target(p);
  else if (name == "quadratic_drift") pr = quadratic_drift(p, 1.0, 0.0);
  else if (name == "constrained_qp") pr = constrained_qp(p);
  else {
    pr = quadratic_drift(p, 0.25, 2.0);
    pr.name = "broken_drift";
  }
  p.apply_constants(pr.constants, pr.sampling_period);
  p.finish();
  pr.validate();
  return pr;
}

ConstrainedProblem make_constrained_problem(const std::string& raw, const ParamMap& params) {
  const std::string name = canonical(raw);
  if (!has_preset(name)) throw ConfigError("unknown preset '" + name + "'");
  if (!is_constrained_preset(name)) throw ConfigError("preset " + name + " is not a constrained problem");
  Params p(name, params);
  ConstrainedProblem cp = name == "tv_qp_eq" ? tv_qp_eq(p) : tv_sharing(p);
  p.apply_constants(cp.constants, cp.sampling_period);
  cp.D0_bar = p.get("D0_bar", cp.D0_bar);
  p.finish();
  cp.validate();
  return cp;
}

}  // namespace tvopt
