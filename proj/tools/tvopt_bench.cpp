#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tvopt/bench.hpp"

namespace {

tvopt::ParamMap parse_sets(const std::vector<std::string>& sets) {
  tvopt::ParamMap out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw tvopt::ConfigError("--set expects key=value, got '" + s + "'");
    const std::string value = s.substr(eq + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) throw tvopt::ConfigError("--set " + s + ": value is not a number");
    out[s.substr(0, eq)] = v;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prediction-correction tracking benchmarks for time-varying convex problems"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> out;
  std::optional<unsigned> seed;
  std::optional<double> ts;
  std::optional<int> horizon;
  std::optional<int> jobs;
  app.add_option("--out", out, "output directory (overrides [experiment] out)");
  app.add_option("--seed", seed, "random seed for probe-based checks");
  app.add_option("--ts", ts, "sampling period Ts in (0, 1)");
  app.add_option("--horizon", horizon, "number of sampled instants K");
  app.add_option("--jobs", jobs, "parallel workers (0: all cores)");

  std::string config_path;
  auto* run = app.add_subcommand("run", "run every configured method and write traces, summary and plot script");
  run->add_option("config", config_path, "experiment INI file")->required();
  auto* bounds = app.add_subcommand("bounds", "print theoretical bounds and flag trace points above them");
  bounds->add_option("config", config_path, "experiment INI file")->required();

  std::string preset;
  std::vector<std::string> sets;
  auto* validate = app.add_subcommand("validate", "check declared constants and solver rates of a preset");
  validate->add_option("preset", preset, "preset name")->required();
  validate->add_option("--set", sets, "override a preset parameter or constant, key=value");
  auto* list = app.add_subcommand("list-presets", "list registered problem presets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      tvopt::cmd_list_presets(std::cout);
      return 0;
    }
    if (*validate) {
      tvopt::ParamMap params = parse_sets(sets);
      if (ts) params["ts"] = *ts;
      const int failures = tvopt::cmd_validate(preset, params, seed.value_or(0), std::cout);
      std::cout << (failures == 0 ? "validate: pass\n" : "validate: " + std::to_string(failures) + " failed checks\n");
      return failures == 0 ? 0 : 1;
    }
    tvopt::ExperimentConfig config = tvopt::load_config(config_path);
    if (out) config.out = *out;
    if (seed) config.seed = *seed;
    if (ts) config.ts = *ts;
    if (horizon) config.horizon = *horizon;
    if (jobs) config.jobs = *jobs;
    if (*run) {
      const tvopt::RunOutcome r = tvopt::cmd_run(config, std::cout);
      bool failed = false;
      for (const auto& row : r.summary) failed = failed || !row.failure.empty();
      for (const auto& f : r.files) std::cout << "wrote " << f << '\n';
      return failed ? 2 : 0;
    }
    const int flags = tvopt::cmd_bounds(config, std::cout);
    std::cout << "bounds: " << flags << " flagged trace points\n";
    return flags == 0 ? 0 : 1;
  } catch (const tvopt::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
