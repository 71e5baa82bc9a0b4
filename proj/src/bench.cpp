#include "tvopt/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace tvopt {

namespace pt = boost::property_tree;

std::string format_sci(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

namespace {

class FieldReader {
 public:
  FieldReader(std::string source, std::string section) : source_(std::move(source)), section_(std::move(section)) {}

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(source_ + ": [" + section_ + "] " + key + ": " + msg);
  }

  double number(const std::string& key, const std::string& text) const {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) fail(key, "expected a number, got '" + text + "'");
    return v;
  }

  int integer(const std::string& key, const std::string& text) const {
    const double v = number(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e9) fail(key, "expected an integer, got '" + text + "'");
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, const std::string& text) const {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    fail(key, "expected true or false, got '" + text + "'");
  }

  std::vector<double> list(const std::string& key, const std::string& text) const {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto b = item.find_first_not_of(" \t");
      const auto e = item.find_last_not_of(" \t");
      if (b == std::string::npos) fail(key, "empty list entry");
      out.push_back(number(key, item.substr(b, e - b + 1)));
    }
    return out;
  }

  template <class F>
  auto wrap(const std::string& key, F&& f) const {
    try {
      return f();
    } catch (const ConfigError& e) {
      const std::string what = e.what();
      if (what.rfind(source_, 0) == 0) throw;
      fail(key, what);
    }
  }

 private:
  std::string source_;
  std::string section_;
};

bool valid_id(const std::string& id) {
  if (id.empty()) return false;
  return std::all_of(id.begin(), id.end(), [](char ch) {
    return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '+';
  });
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), count));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < count; i = next++) body(i);
  };
  if (jobs <= 1) {
    worker();
    return;
  }
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

ParamMap problem_params(const ExperimentConfig& c) {
  ParamMap p = c.params;
  p["ts"] = c.ts;
  return p;
}

Vector initial_point(const ExperimentConfig& c, int dim) {
  if (c.x0.empty()) return Vector::Zero(dim);
  if (c.x0.size() == 1) return Vector::Constant(dim, c.x0[0]);
  if (static_cast<int>(c.x0.size()) != dim) {
    throw ConfigError("[experiment] x0: expected " + std::to_string(dim) + " entries, got " +
                      std::to_string(c.x0.size()));
  }
  return Eigen::Map<const Vector>(c.x0.data(), dim);
}

double pick_rho(double rho, Method m, double mu, double L) {
  return std::isnan(rho) ? default_rho(m, mu, L) : rho;
}

SolverSpec spec_for(const MethodConfig& m, bool correction, double mu, double L) {
  const Method method = correction ? m.correction : m.prediction;
  const double rho = correction ? m.rho_correction : m.rho_prediction;
  try {
    return make_spec(method, pick_rho(rho, method, mu, L), mu, L);
  } catch (const ConfigError& e) {
    throw ConfigError("[method " + m.id + "] " + (correction ? "correction" : "prediction") + ": " + e.what());
  }
}

RunConfig primal_config(const TimeVaryingProblem& p, const MethodConfig& m, const ExperimentConfig& e) {
  if (is_dual(m.correction) || is_dual(m.prediction)) {
    throw ConfigError("[method " + m.id + "] dual solvers need a constrained preset");
  }
  RunConfig rc;
  rc.np = m.np;
  rc.nc = m.nc;
  rc.strategy = m.strategy;
  rc.correction = spec_for(m, true, p.constants.mu, p.constants.L);
  rc.prediction = spec_for(m, false, p.constants.mu, p.constants.L);
  rc.horizon = e.horizon;
  rc.x0 = initial_point(e, p.dim());
  rc.timing = e.timing;
  return rc;
}

DualRunConfig dual_config(const DualProblem& dp, const MethodConfig& m, const ExperimentConfig& e) {
  if (!is_dual(m.correction) || !is_dual(m.prediction)) {
    throw ConfigError("[method " + m.id + "] constrained presets need dual solvers (dual_ascent, mm, dual_fbs, admm)");
  }
  DualRunConfig rc;
  rc.np = m.np;
  rc.nc = m.nc;
  rc.strategy = m.strategy;
  rc.correction = spec_for(m, true, dp.constants.mu_bar, dp.constants.L_bar);
  rc.prediction = spec_for(m, false, dp.constants.mu_bar, dp.constants.L_bar);
  rc.horizon = e.horizon;
  rc.w0 = initial_point(e, dp.primal.p());
  rc.timing = e.timing;
  return rc;
}

std::string join_header(const std::string& stem, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s += "," + stem + "_" + std::to_string(i);
  return s;
}

void write_vector(std::ostream& os, const Vector& v) {
  for (int i = 0; i < v.size(); ++i) os << ',' << format_sci(v[i]);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  return os;
}

void write_primal_trace(const std::filesystem::path& path, const RunTrace& trace, int dim) {
  std::ofstream os = open_out(path);
  os << "k,t" << join_header("x", dim) << ",err,bound,pred_err,ms\n";
  for (const TraceRow& r : trace.rows) {
    os << r.k << ',' << format_sci(r.t);
    write_vector(os, r.x);
    os << ',' << format_sci(r.err) << ',' << format_sci(r.bound) << ',' << format_sci(r.pred_err) << ','
       << format_sci(r.ms) << '\n';
  }
}

void write_dual_trace(const std::filesystem::path& path, const DualTrace& trace, int p, int n) {
  std::ofstream os = open_out(path);
  os << "k,t" << join_header("w", p) << join_header("x", n) << ",err,err_x,err_By,bound,ms\n";
  for (const DualTraceRow& r : trace.rows) {
    os << r.k << ',' << format_sci(r.t);
    write_vector(os, r.w);
    write_vector(os, r.x);
    os << ',' << format_sci(r.err_w) << ',' << format_sci(r.err_x) << ',' << format_sci(r.err_By) << ','
       << format_sci(r.bound_w) << ',' << format_sci(r.ms) << '\n';
  }
}

void write_summary(const std::filesystem::path& path, const ExperimentConfig& c,
                   const std::vector<SummaryRow>& rows) {
  std::ofstream os = open_out(path);
  os << "method,strategy,correction,prediction,np,nc,rows,min,mean,std,max,mean_ms,status\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const MethodConfig& m = c.methods[i];
    const ErrorStats& s = rows[i].stats;
    os << m.id << ',' << to_string(m.strategy) << ',' << to_string(m.correction) << ','
       << to_string(m.prediction) << ',' << m.np << ',' << m.nc << ',' << s.count << ',' << format_sci(s.min)
       << ',' << format_sci(s.mean) << ',' << format_sci(s.stddev) << ',' << format_sci(s.max) << ','
       << format_sci(s.mean_ms) << ',' << (rows[i].failure.empty() ? "ok" : "failed") << '\n';
  }
}

void write_plot(const std::filesystem::path& path, const ExperimentConfig& c) {
  std::ofstream os = open_out(path);
  os << "# Tracking error against k, read from the trace CSVs of this directory.\n"
        "set datafile separator ','\n"
        "set logscale y\n"
        "set format y '10^{%L}'\n"
        "set xlabel 'k'\n"
        "set ylabel 'tracking error'\n"
        "set key top right\n"
        "set terminal pngcairo size 900,600\n"
        "set output 'tracking_error.png'\n"
        "plot ";
  for (std::size_t i = 0; i < c.methods.size(); ++i) {
    const std::string& id = c.methods[i].id;
    os << (i ? ", \\\n     " : "") << '\'' << id << "_trace.csv' using 'k':'err' with lines title '" << id << '\'';
  }
  os << '\n';
}

struct PrimalRuns {
  TimeVaryingProblem problem;
  std::vector<RunConfig> configs;
  std::vector<RunTrace> traces;
};

PrimalRuns run_primal(const ExperimentConfig& c) {
  PrimalRuns r;
  r.problem = make_problem(c.preset, problem_params(c));
  for (const auto& m : c.methods) r.configs.push_back(primal_config(r.problem, m, c));
  r.traces = run_sweep(r.problem, r.configs, c.jobs);
  return r;
}

struct DualRuns {
  DualProblem dual;
  std::vector<DualRunConfig> configs;
  std::vector<DualTrace> traces;
};

DualRuns run_dual(const ExperimentConfig& c) {
  DualRuns r;
  r.dual = build_dual(make_constrained_problem(c.preset, problem_params(c)));
  for (const auto& m : c.methods) r.configs.push_back(dual_config(r.dual, m, c));
  const std::vector<DualOptimum> oracle =
      dual_optimal_trajectory(r.dual, c.horizon, 1e-12, r.configs.front().w0);
  r.traces.resize(r.configs.size());
  parallel_for(r.configs.size(), c.jobs, [&](std::size_t i) {
    try {
      r.traces[i] = run_dual_prediction_correction(r.dual, r.configs[i], &oracle);
    } catch (const std::exception& e) {
      r.traces[i].failure = e.what();
    }
  });
  return r;
}

/// Bounds that apply to one primal method; the triple covers both phases.
std::vector<std::pair<std::string, BoundReport>> primal_bounds(const TimeVaryingProblem& p, const RunConfig& rc) {
  const RegularityConstants& c = p.constants;
  const double Ts = p.sampling_period;
  const RateTriple r = rc.np > 0 ? effective_triple(rc.correction.rates, rc.prediction.rates) : rc.correction.rates;
  std::vector<std::pair<std::string, BoundReport>> out;
  if (rc.np == 0) {
    out.emplace_back("correction_only", bound_correction_only(rc.nc, r, c.C0, c.D0, c.mu, Ts));
    return out;
  }
  if (rc.nc == 0 && rc.strategy == Strategy::one_step_back) {
    out.emplace_back("prediction_only", bound_prediction_only(rc.np, r, c.C0, c.D0, c.mu, Ts));
    return out;
  }
  switch (rc.strategy) {
    case Strategy::one_step_back: {
      BoundReport b;
      b.method = "osb";
      b.condition = zeta(rc.nc, r) * zeta(rc.np, r);
      b.satisfied = b.condition < 1.0;
      const double sigma = optimizer_drift_bound(c, Ts);
      if (b.satisfied) b.radius = iterated_bound_limit(r, rc.np, rc.nc, sigma, sigma);
      else b.violated = "zeta_C zeta_P < 1";
      out.emplace_back("one_step_back", b);
      break;
    }
    case Strategy::taylor:
    case Strategy::taylor_fd: {
      const bool fd = rc.strategy == Strategy::taylor_fd;
      if (!fd) out.emplace_back("taylor_linear", bound_taylor(rc.np, rc.nc, r, c, Ts));
      out.emplace_back("taylor_quadratic", bound_taylor_quadratic(rc.np, rc.nc, r, c, Ts, std::nan(""), fd));
      break;
    }
    case Strategy::extrapolation:
      out.emplace_back("extrapolation", bound_extrapolation(rc.np, rc.nc, r, c, Ts));
      break;
  }
  return out;
}

std::string list_rows(const std::vector<int>& rows) {
  std::string s;
  for (std::size_t i = 0; i < rows.size() && i < 8; ++i) s += (i ? " " : "") + std::to_string(rows[i]);
  if (rows.size() > 8) s += " ...";
  return s;
}

void print_bound(std::ostream& log, std::ostream& csv, const std::string& id, const std::string& name,
                 const BoundReport& b, double observed, int flags) {
  log << "  " << name << ": condition " << format_sci(b.condition) << (b.satisfied ? " < 1" : " NOT < 1")
      << ", radius " << format_sci(b.radius);
  if (!std::isnan(b.Ts_bar)) log << ", Ts_bar " << format_sci(b.Ts_bar) << ", R_bar " << format_sci(b.R_bar);
  if (!std::isnan(b.radius_x)) log << ", radius_x " << format_sci(b.radius_x) << ", radius_By " << format_sci(b.radius_By);
  if (!b.violated.empty()) log << " (violated: " << b.violated << ")";
  log << '\n';
  csv << id << ',' << name << ',' << format_sci(b.condition) << ',' << (b.satisfied ? 1 : 0) << ','
      << format_sci(b.radius) << ',' << format_sci(observed) << ',' << flags << '\n';
}

int check_contractions(const TimeVaryingProblem& p, unsigned seed, std::ostream& log) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  const int n = p.dim();
  int failures = 0;
  std::vector<Method> methods = {Method::ppa, Method::fbs, Method::prs};
  if (p.nonsmooth.kind == NonsmoothKind::zero) methods.insert(methods.begin(), Method::gradient);
  for (const Method m : methods) {
    const SolverSpec spec = make_spec(m, default_rho(m, p.constants.mu, p.constants.L), p.constants.mu, p.constants.L);
    double worst = 0.0;
    for (int k : {0, 50, 500}) {
      const SampledProblem s = sample(p, k);
      for (int trial = 0; trial < 10; ++trial) {
        Vector a(n), b(n);
        for (int i = 0; i < n; ++i) {
          a[i] = unif(rng);
          b[i] = unif(rng);
        }
        const double d = (a - b).norm();
        if (d == 0.0) continue;
        const double ratio = (fixed_point_map(s, spec, a) - fixed_point_map(s, spec, b)).norm() / d;
        worst = std::max(worst, ratio);
      }
    }
    const bool ok = worst <= spec.rates.lambda + 1e-10;
    failures += ok ? 0 : 1;
    log << "  " << to_string(m) << ": observed contraction " << format_sci(worst) << ", declared lambda "
        << format_sci(spec.rates.lambda) << (ok ? "  ok" : "  FAIL") << '\n';
  }
  return failures;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (preset.empty()) throw ConfigError("[experiment] preset: missing");
  if (!has_preset(preset)) throw ConfigError("[experiment] preset: unknown preset '" + preset + "'");
  if (!(ts > 0.0 && ts < 1.0)) throw ConfigError("[experiment] ts: sampling period must lie in (0, 1)");
  if (horizon < 0) throw ConfigError("[experiment] horizon: must be >= 0");
  if (horizon == 0) {
    throw ConfigError("[experiment] horizon: K = 0 gives empty traces and no rows to summarize");
  }
  if (methods.empty()) throw ConfigError("no [method ID] sections");
  for (const auto& m : methods) {
    if (m.np < 0 || m.nc < 0) throw ConfigError("[method " + m.id + "] np and nc must be >= 0");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig c;
  bool have_experiment = false;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ConfigError(source + ": key '" + section + "' outside any section");
    if (section == "experiment") {
      have_experiment = true;
      const FieldReader r(source, section);
      for (const auto& [key, node] : body) {
        const std::string v = node.data();
        if (key == "preset") c.preset = v;
        else if (key == "ts") c.ts = r.number(key, v);
        else if (key == "horizon") c.horizon = r.integer(key, v);
        else if (key == "seed") c.seed = static_cast<unsigned>(r.integer(key, v));
        else if (key == "out") c.out = v;
        else if (key == "timing") c.timing = r.boolean(key, v);
        else if (key == "jobs") c.jobs = r.integer(key, v);
        else if (key == "x0") c.x0 = r.list(key, v);
        else r.fail(key, "unknown key");
      }
    } else if (section == "problem") {
      const FieldReader r(source, section);
      for (const auto& [key, node] : body) {
        if (key == "ts") r.fail(key, "set ts in [experiment]");
        c.params[key] = r.number(key, node.data());
      }
    } else if (section.rfind("method ", 0) == 0) {
      MethodConfig m;
      m.id = section.substr(7);
      const FieldReader r(source, section);
      if (!valid_id(m.id)) r.fail("", "method id must use letters, digits, '_', '-' or '+'");
      bool prediction_set = false;
      for (const auto& [key, node] : body) {
        const std::string v = node.data();
        if (key == "strategy") m.strategy = r.wrap(key, [&] { return parse_strategy(v); });
        else if (key == "np") m.np = r.integer(key, v);
        else if (key == "nc") m.nc = r.integer(key, v);
        else if (key == "correction") m.correction = r.wrap(key, [&] { return parse_method(v); });
        else if (key == "prediction") {
          m.prediction = r.wrap(key, [&] { return parse_method(v); });
          prediction_set = true;
        } else if (key == "rho_correction") m.rho_correction = r.number(key, v);
        else if (key == "rho_prediction") m.rho_prediction = r.number(key, v);
        else r.fail(key, "unknown key");
        if ((key == "np" || key == "nc") && (key == "np" ? m.np : m.nc) < 0) r.fail(key, "must be >= 0");
      }
      if (!prediction_set) m.prediction = m.correction;
      for (const auto& other : c.methods) {
        if (other.id == m.id) r.fail("", "duplicate method id");
      }
      c.methods.push_back(m);
    } else {
      throw ConfigError(source + ": unknown section [" + section + "]");
    }
  }
  if (!have_experiment) throw ConfigError(source + ": missing [experiment] section");
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

RunOutcome cmd_run(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);
  RunOutcome out;
  auto add = [&](const std::filesystem::path& p) { out.files.push_back(p.string()); };

  if (is_constrained_preset(config.preset)) {
    const DualRuns runs = run_dual(config);
    for (std::size_t i = 0; i < runs.traces.size(); ++i) {
      const auto path = dir / (config.methods[i].id + "_trace.csv");
      write_dual_trace(path, runs.traces[i], runs.dual.primal.p(), runs.dual.primal.n());
      add(path);
      out.summary.push_back({config.methods[i].id, dual_asymptotic_stats(runs.traces[i]), runs.traces[i].failure});
    }
  } else {
    const PrimalRuns runs = run_primal(config);
    for (std::size_t i = 0; i < runs.traces.size(); ++i) {
      const auto path = dir / (config.methods[i].id + "_trace.csv");
      write_primal_trace(path, runs.traces[i], runs.problem.dim());
      add(path);
      out.summary.push_back({config.methods[i].id, asymptotic_stats(runs.traces[i]), runs.traces[i].failure});
    }
  }
  write_summary(dir / "summary.csv", config, out.summary);
  add(dir / "summary.csv");
  write_plot(dir / "plot.gp", config);
  add(dir / "plot.gp");

  for (const auto& row : out.summary) {
    log << row.method << ": mean " << format_sci(row.stats.mean) << " +- " << format_sci(row.stats.stddev)
        << " (min " << format_sci(row.stats.min) << ", max " << format_sci(row.stats.max) << ")";
    if (config.timing) log << ", " << format_sci(row.stats.mean_ms) << " ms/step";
    if (!row.failure.empty()) log << "  FAILED: " << row.failure;
    log << '\n';
  }
  return out;
}

int cmd_bounds(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  const std::filesystem::path dir(config.out);
  std::filesystem::create_directories(dir);
  std::ofstream csv = open_out(dir / "bounds.csv");
  csv << "method,bound,condition,satisfied,radius,observed_max,flags\n";
  int flags = 0;

  if (is_constrained_preset(config.preset)) {
    const DualRuns runs = run_dual(config);
    const DualProblem& dp = runs.dual;
    for (std::size_t i = 0; i < runs.configs.size(); ++i) {
      const DualRunConfig& rc = runs.configs[i];
      const std::string& id = config.methods[i].id;
      const RateTriple r = rc.np > 0 ? effective_triple(rc.correction.rates, rc.prediction.rates) : rc.correction.rates;
      const double Ts = dp.primal.sampling_period;
      BoundReport b;
      std::string name = "dual_taylor";
      if (rc.np == 0) {
        name = "dual_correction_only";
        b = bound_correction_only(rc.nc, r, dp.constants.C0_bar, dp.constants.D0_bar, dp.constants.mu_bar, Ts);
      } else if (rc.strategy == Strategy::one_step_back) {
        name = "dual_one_step_back";
        b.condition = zeta(rc.nc, r) * zeta(rc.np, r);
        b.satisfied = b.condition < 1.0;
        const double sigma = (dp.constants.C0_bar * Ts + dp.constants.D0_bar) / dp.constants.mu_bar;
        if (b.satisfied) b.radius = iterated_bound_limit(r, rc.np, rc.nc, sigma, sigma);
        else b.violated = "zeta_C zeta_P < 1";
      } else {
        b = bound_dual(rc.np, rc.nc, r, dp.constants, Ts, rc.correction.rho, dp.normA, dp.normB,
                       dp.primal.constants.mu);
      }
      if (name != "dual_taylor") {
        const RecoveryFactors rf = primal_recovery_factors(dp.normA, dp.normB, dp.primal.constants.mu, rc.correction.rho);
        b.radius_x = rf.fx * b.radius;
        b.radius_By = dp.normB == 0.0 ? 0.0 : rf.fBy * b.radius;
      }
      const DualCheckReport check = check_dual_trace(dp, runs.traces[i], rc);
      const int f = static_cast<int>(check.recursion_violations.size() + check.recovery_violations.size());
      flags += f;
      log << id << ":\n";
      print_bound(log, csv, id, name, b, dual_asymptotic_stats(runs.traces[i]).max, f);
      log << "  trace: " << check.checked << " rows checked, " << check.recursion_violations.size()
          << " above the one-step dual bound, " << check.recovery_violations.size()
          << " above the primal recovery factors";
      if (f) log << " (rows " << list_rows(check.recursion_violations) << " / " << list_rows(check.recovery_violations) << ")";
      log << '\n';
      if (!runs.traces[i].ok()) log << "  run failed: " << runs.traces[i].failure << '\n';
    }
    return flags;
  }

  const PrimalRuns runs = run_primal(config);
  for (std::size_t i = 0; i < runs.configs.size(); ++i) {
    const RunConfig& rc = runs.configs[i];
    const std::string& id = config.methods[i].id;
    const RecursionReport check = check_recursion_bound(runs.traces[i], runs.problem.constants, rc,
                                                        runs.problem.sampling_period);
    const int f = static_cast<int>(check.violations.size());
    flags += f;
    const double observed = asymptotic_stats(runs.traces[i]).max;
    log << id << ":\n";
    for (const auto& [name, b] : primal_bounds(runs.problem, rc)) print_bound(log, csv, id, name, b, observed, f);
    const RegularityConstants& c = runs.problem.constants;
    if (c.D0 == 0.0 && c.C2 == 0.0 && c.mu == 1.0 && rc.nc > 0) {
      log << "  regime table (NC = " << rc.nc << ", correction triple): exact C1=0 | exact C1>0 | poor C1=0 | poor C1>0\n";
      for (const RegimeRow& row : regime_table(c, rc.correction.rates, rc.nc, runs.problem.sampling_period)) {
        log << "    " << row.method << ": " << format_sci(row.exact_c1_zero) << " | " << format_sci(row.exact_c1_pos)
            << " | " << format_sci(row.poor_c1_zero) << " | " << format_sci(row.poor_c1_pos) << '\n';
      }
    }
    log << "  trace: " << check.checked << " steps checked, " << f << " above the one-step bound";
    if (f) log << " (rows " << list_rows(check.violations) << ", max excess " << format_sci(check.max_excess) << ")";
    log << '\n';
    if (!runs.traces[i].ok()) log << "  run failed: " << runs.traces[i].failure << '\n';
  }
  return flags;
}

DualFdReport dual_fd_check(const DualProblem& dp, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> wdist(-2.0, 2.0), tdist(0.0, 20.0);
  const int p = dp.primal.p();
  DualFdReport rep;
  auto rel = [](const auto& a, const auto& b) { return (a - b).norm() / std::max(1.0, b.norm()); };
  for (int i = 0; i < count; ++i) {
    Vector w(p);
    for (int j = 0; j < p; ++j) w[j] = wdist(rng);
    const double t = tdist(rng);
    const DualDerivatives d = dual_derivatives(dp, w, t);
    Vector g(p);
    Matrix H(p, p);
    const double h = 1e-5;
    for (int j = 0; j < p; ++j) {
      Vector e = Vector::Zero(p);
      e[j] = h;
      const DualDerivatives up = dual_derivatives(dp, w + e, t);
      const DualDerivatives dn = dual_derivatives(dp, w - e, t);
      g[j] = (up.value - dn.value) / (2.0 * h);
      H.col(j) = (up.grad - dn.grad) / (2.0 * h);
    }
    const Vector dt = (dual_derivatives(dp, w, t + h).grad - dual_derivatives(dp, w, t - h).grad) / (2.0 * h);
    rep.grad = std::max(rep.grad, rel(d.grad, g));
    rep.hessian = std::max(rep.hessian, rel(d.hessian, H));
    rep.dt_grad = std::max(rep.dt_grad, rel(d.dt_grad, dt));
    ++rep.probes;
  }
  return rep;
}

int cmd_validate(const std::string& preset, const ParamMap& params, unsigned seed, std::ostream& log) {
  int failures = 0;
  if (is_constrained_preset(preset)) {
    const DualProblem dp = build_dual(make_constrained_problem(preset, params));
    log << preset << ": dual constants mu_bar " << format_sci(dp.constants.mu_bar) << ", L_bar "
        << format_sci(dp.constants.L_bar) << ", C0_bar " << format_sci(dp.constants.C0_bar) << '\n';
    const DualFdReport fd = dual_fd_check(dp, 20, seed);
    for (const auto& [name, err] : {std::pair{"gradient", fd.grad}, {"hessian", fd.hessian}, {"dt_gradient", fd.dt_grad}}) {
      const bool ok = err <= 1e-5;
      failures += ok ? 0 : 1;
      log << "  dual " << name << " vs central differences: max relative error " << format_sci(err)
          << (ok ? "  ok" : "  FAIL") << '\n';
    }
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> wdist(-2.0, 2.0), tdist(0.0, 20.0);
    double lo = kInfinity, hi = 0.0;
    for (int i = 0; i < 20; ++i) {
      Vector w(dp.primal.p());
      for (int j = 0; j < w.size(); ++j) w[j] = wdist(rng);
      const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(dual_derivatives(dp, w, tdist(rng)).hessian).eigenvalues();
      lo = std::min(lo, ev.minCoeff());
      hi = std::max(hi, ev.maxCoeff());
    }
    const bool ok = lo >= dp.constants.mu_bar * (1 - 1e-9) && hi <= dp.constants.L_bar * (1 + 1e-9);
    failures += ok ? 0 : 1;
    log << "  dual hessian spectrum [" << format_sci(lo) << ", " << format_sci(hi) << "] within [mu_bar, L_bar]"
        << (ok ? "  ok" : "  FAIL") << '\n';
    return failures;
  }

  const TimeVaryingProblem p = make_problem(preset, params);
  const double t_max = 1000 * p.sampling_period;
  const std::vector<Probe> grid = p.dim() == 1 ? grid_probes_1d(-4.0, 4.0, 81, t_max, 41)
                                                : random_probes(p.dim(), -3.0, 3.0, t_max, 400, seed);
  const ConstantReport rep = validate_constants(p, grid);
  const RegularityConstants& c = p.constants;
  log << preset << ": " << rep.probes << " probes\n"
      << "  mu declared " << format_sci(c.mu) << ", observed min eigenvalue " << format_sci(rep.min_eigenvalue) << '\n'
      << "  L  declared " << format_sci(c.L) << ", observed max eigenvalue " << format_sci(rep.max_eigenvalue) << '\n'
      << "  C0 declared " << format_sci(c.C0) << ", observed " << format_sci(rep.max_dt_grad) << '\n'
      << "  C1 declared " << format_sci(c.C1) << ", observed " << format_sci(rep.max_third_x) << '\n'
      << "  C2 declared " << format_sci(c.C2) << ", observed " << format_sci(rep.max_dt_hessian) << '\n'
      << "  C3 declared " << format_sci(c.C3) << ", observed " << format_sci(rep.max_dtt_grad) << '\n'
      << "  oracle consistency: gradient " << format_sci(rep.max_grad_fd_error) << ", hessian "
      << format_sci(rep.max_hess_fd_error) << '\n';
  for (const auto& v : rep.violations) log << "  FAIL " << v << '\n';
  failures += static_cast<int>(rep.violations.size());
  failures += check_contractions(p, seed, log);
  return failures;
}

void cmd_list_presets(std::ostream& log) {
  for (const auto& p : presets()) {
    log << p.name << (p.constrained ? "  [constrained]  " : "  ") << p.description << '\n';
  }
}

}  // namespace tvopt
