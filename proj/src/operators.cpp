#include "tvopt/operators.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace tvopt {

namespace {

constexpr std::array<std::pair<Method, const char*>, 8> kNames = {{
    {Method::gradient, "gradient"},
    {Method::ppa, "ppa"},
    {Method::fbs, "fbs"},
    {Method::prs, "prs"},
    {Method::dual_ascent, "dual_ascent"},
    {Method::mm, "mm"},
    {Method::dual_fbs, "dual_fbs"},
    {Method::admm, "admm"},
}};

std::string num(double v) {
  std::ostringstream os;
  os.precision(9);
  os << v;
  return os.str();
}

void require_smooth_only(const CompositeProblem& p, const char* method) {
  if (p.g.kind != NonsmoothKind::zero) {
    throw ConfigError(std::string(method) + " requires a problem without non-smooth part");
  }
}

}  // namespace

std::string to_string(Method m) {
  for (const auto& [k, name] : kNames) {
    if (k == m) return name;
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (const auto& [k, n] : kNames) {
    if (name == n) return k;
  }
  throw ConfigError("unknown solver '" + name +
                    "' (expected gradient, ppa, fbs, prs, dual_ascent, mm, dual_fbs or admm)");
}

bool is_dual(Method m) {
  return m == Method::dual_ascent || m == Method::mm || m == Method::dual_fbs || m == Method::admm;
}

Method primal_counterpart(Method m) {
  switch (m) {
    case Method::dual_ascent: return Method::gradient;
    case Method::mm: return Method::ppa;
    case Method::dual_fbs: return Method::fbs;
    case Method::admm: return Method::prs;
    default: return m;
  }
}

double default_rho(Method m, double mu, double L) {
  switch (primal_counterpart(m)) {
    case Method::gradient:
    case Method::fbs: return 2.0 / (L + mu);
    case Method::prs: return 1.0 / std::sqrt(L * mu);
    default: return 1.0;
  }
}

SolverSpec make_spec(Method m, double rho, double mu, double L) {
  if (!(mu > 0.0) || !(L >= mu) || !std::isfinite(L)) {
    throw ConfigError("solver constants need 0 < mu <= L < inf, got mu=" + num(mu) + " L=" + num(L));
  }
  SolverSpec s;
  s.method = m;
  s.rho = rho;
  const std::string name = to_string(m);
  switch (primal_counterpart(m)) {
    case Method::gradient:
    case Method::fbs:
      if (!(rho > 0.0 && rho < 2.0 / L)) {
        throw ConfigError(name + ": step size rho=" + num(rho) + " violates 0 < rho < 2/L = " +
                          num(2.0 / L));
      }
      s.rates = {std::max(std::abs(1.0 - rho * L), std::abs(1.0 - rho * mu)), 1.0, 1.0};
      break;
    case Method::ppa:
      if (!(rho > 0.0 && std::isfinite(rho))) {
        throw ConfigError(name + ": penalty rho=" + num(rho) + " violates rho > 0");
      }
      s.rates = {1.0 / (1.0 + rho * mu), 1.0, 1.0};
      break;
    case Method::prs:
      if (!(rho > 0.0 && std::isfinite(rho))) {
        throw ConfigError(name + ": penalty rho=" + num(rho) + " violates rho > 0");
      }
      s.rates = {std::max(std::abs(1.0 - rho * L) / (1.0 + rho * L),
                          std::abs(1.0 - rho * mu) / (1.0 + rho * mu)),
                 1.0 / (1.0 + rho * mu), 1.0 / (1.0 + rho * L)};
      break;
    default:
      break;
  }
  return s;
}

Vector gradient_step(const CompositeProblem& p, const Vector& x, double rho) {
  require_smooth_only(p, "gradient method");
  return x - rho * p.f.grad(x);
}

Vector ppa_step(const CompositeProblem& p, const Vector& x, double rho) {
  if (p.g.kind == NonsmoothKind::zero) return prox_smooth(p.f, rho, x);
  const double inv = 1.0 / rho;
  auto grad = [&](const Vector& y) { return Vector(p.f.grad(y) + inv * (y - x)); };
  CompositeOptions opts;
  opts.initial_step = rho;
  return minimize_composite(grad, p.g.prox, x, opts).x;
}

Vector fbs_step(const CompositeProblem& p, const Vector& x, double rho) {
  return p.g.prox(rho, x - rho * p.f.grad(x));
}

SolverState prs_step(const CompositeProblem& p, const SolverState& s, double rho) {
  SolverState out;
  const Vector x = prox_smooth(p.f, rho, s.z);
  const Vector y = p.g.prox(rho, 2.0 * x - s.z);
  out.z = s.z + 2.0 * (y - x);
  out.x = x;
  out.iterations = s.iterations + 1;
  return out;
}

SolverState warm_start(const CompositeProblem& p, const SolverSpec& spec, const Vector& x) {
  SolverState s;
  s.x = x;
  s.z = spec.method == Method::prs ? Vector(x + spec.rho * p.f.grad(x)) : x;
  return s;
}

Vector fixed_point_map(const CompositeProblem& p, const SolverSpec& spec, const Vector& z) {
  switch (spec.method) {
    case Method::gradient: return gradient_step(p, z, spec.rho);
    case Method::ppa: return ppa_step(p, z, spec.rho);
    case Method::fbs: return fbs_step(p, z, spec.rho);
    case Method::prs: return prs_step(p, {z, z, 0}, spec.rho).z;
    default: throw ConfigError(to_string(spec.method) + " is a dual solver; use the dual module");
  }
}

Vector readout(const CompositeProblem& p, const SolverSpec& spec, const Vector& z) {
  return spec.method == Method::prs ? prox_smooth(p.f, spec.rho, z) : z;
}

SolverState run_solver(const CompositeProblem& p, const SolverSpec& spec, SolverState init, int N) {
  if (N < 0) throw ConfigError("solver step count must be >= 0");
  if (is_dual(spec.method)) {
    throw ConfigError(to_string(spec.method) + " is a dual solver; use the dual module");
  }
  if (N == 0) return init;
  for (int i = 0; i < N; ++i) init.z = fixed_point_map(p, spec, init.z);
  init.x = readout(p, spec, init.z);
  init.iterations += N;
  return init;
}

}  // namespace tvopt
