#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "tvopt/dual.hpp"
#include "tvopt/presets.hpp"
#include "tvopt/runner.hpp"

namespace tvopt {

struct MethodConfig {
  std::string id;
  Strategy strategy = Strategy::one_step_back;
  int np = 0;
  int nc = 0;
  Method correction = Method::fbs;
  Method prediction = Method::fbs;
  // NaN selects default_rho of the method.
  double rho_correction = std::numeric_limits<double>::quiet_NaN();
  double rho_prediction = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentConfig {
  std::string preset;
  ParamMap params;  // [problem] section; ts is kept separately
  double ts = 0.1;
  int horizon = 1000;
  unsigned seed = 0;
  std::string out = "out";
  bool timing = false;
  int jobs = 0;  // 0: hardware concurrency
  std::vector<double> x0;  // initial primal (or dual, for constrained presets) point; empty means 0
  std::vector<MethodConfig> methods;

  /// Throws ConfigError on missing presets, K <= 0, Ts outside (0, 1) or no methods.
  void validate() const;
};

/// INI text with sections [experiment], [problem] and one [method ID] per
/// method. Errors name the source, the line (syntax) or the section and key.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// Scientific notation with ten significant digits.
std::string format_sci(double v);

struct SummaryRow {
  std::string method;
  ErrorStats stats;
  std::string failure;
};

struct RunOutcome {
  std::vector<std::string> files;
  std::vector<SummaryRow> summary;
};

/// Runs every method, then writes <id>_trace.csv per method, summary.csv
/// and plot.gp into config.out.
RunOutcome cmd_run(const ExperimentConfig& config, std::ostream& log);

/// Prints the asymptotic bounds of each method and checks every trace
/// point against its one-step bound. Returns the number of flagged points.
int cmd_bounds(const ExperimentConfig& config, std::ostream& log);

/// Constant validation plus solver contraction checks (or dual derivative
/// checks for constrained presets). Returns the number of failed checks.
int cmd_validate(const std::string& preset, const ParamMap& params, unsigned seed, std::ostream& log);

void cmd_list_presets(std::ostream& log);

/// Largest relative mismatch between the analytic dual derivatives and
/// central differences of the dual value (gradient) and gradient (hessian,
/// time derivative) over random (w, t) probes.
struct DualFdReport {
  int probes = 0;
  double grad = 0.0;
  double hessian = 0.0;
  double dt_grad = 0.0;
};
DualFdReport dual_fd_check(const DualProblem& dp, int count, unsigned seed);

}  // namespace tvopt
