#pragma once

#include <string>

#include "tvopt/bounds.hpp"
#include "tvopt/problem.hpp"

namespace tvopt {

/// Primal solvers and their dual counterparts (gradient <-> dual ascent,
/// ppa <-> method of multipliers, fbs <-> dual fbs, prs <-> admm).
enum class Method { gradient, ppa, fbs, prs, dual_ascent, mm, dual_fbs, admm };

std::string to_string(Method m);
/// Accepts the names printed by to_string. Throws ConfigError otherwise.
Method parse_method(const std::string& name);
bool is_dual(Method m);
/// The primal solver a dual method is derived from.
Method primal_counterpart(Method m);

struct SolverSpec {
  Method method = Method::fbs;
  double rho = 0.0;
  RateTriple rates;
};

/// Step size giving the smallest lambda: 2/(L+mu) for gradient-type
/// methods, 1/sqrt(L mu) for splitting-type, 1 for proximal point.
double default_rho(Method m, double mu, double L);

/// Rates of the method for a cost in S_{mu,L}. For dual methods pass the
/// dual constants. Throws ConfigError naming the violated step-size bound.
SolverSpec make_spec(Method m, double rho, double mu, double L);

/// z is the fixed-point iterate and x its primal readout; z == x except for prs.
struct SolverState {
  Vector z;
  Vector x;
  int iterations = 0;
};

Vector gradient_step(const CompositeProblem& p, const Vector& x, double rho);
/// prox of rho (f + g); closed form or Newton when g = 0, proximal gradient otherwise.
Vector ppa_step(const CompositeProblem& p, const Vector& x, double rho);
Vector fbs_step(const CompositeProblem& p, const Vector& x, double rho);
/// z+ = refl_g refl_f z = z + 2 (y - x), x = prox_f(z), y = prox_g(2x - z).
/// The returned x is the readout of the input z.
SolverState prs_step(const CompositeProblem& p, const SolverState& s, double rho);

/// State whose readout is x. For prs this inverts the readout: z = x + rho grad f(x).
SolverState warm_start(const CompositeProblem& p, const SolverSpec& spec, const Vector& x);

/// One application of the solver's fixed-point map to z.
Vector fixed_point_map(const CompositeProblem& p, const SolverSpec& spec, const Vector& z);
/// Primal readout of a fixed-point iterate.
Vector readout(const CompositeProblem& p, const SolverSpec& spec, const Vector& z);

/// Exactly N Banach-Picard steps, then x = readout(z). N = 0 returns init unchanged.
SolverState run_solver(const CompositeProblem& p, const SolverSpec& spec, SolverState init, int N);

}  // namespace tvopt
