#pragma once

#include <map>
#include <string>
#include <vector>

#include "tvopt/dual.hpp"
#include "tvopt/problem.hpp"

namespace tvopt {

/// Named numeric parameters of a preset. Every preset also accepts ts and
/// overrides of its declared constants (mu, L, C0, C1, C2, C3, D0; D0_bar for
/// constrained presets). Unknown keys are rejected.
using ParamMap = std::map<std::string, double>;

struct PresetInfo {
  std::string name;
  bool constrained = false;
  std::string description;
};

const std::vector<PresetInfo>& presets();
bool has_preset(const std::string& name);
bool is_constrained_preset(const std::string& name);

/// Throws ConfigError for unknown names, unknown parameters, or a
/// constrained preset requested as an unconstrained one (and vice versa).
TimeVaryingProblem make_problem(const std::string& name, const ParamMap& params = {});
ConstrainedProblem make_constrained_problem(const std::string& name, const ParamMap& params = {});

/// Largest |d^3/dx^3 log(1 + exp(phi x))| / phi^3, attained where the
/// logistic slope equals 1/2 -+ sqrt(3)/6.
double logistic_third_derivative_peak();

}  // namespace tvopt
