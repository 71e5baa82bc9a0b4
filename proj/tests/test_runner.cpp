#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "tvopt/presets.hpp"
#include "tvopt/runner.hpp"

using namespace tvopt;
using testing::vec1;

namespace {

RunConfig fbs_config(const TimeVaryingProblem& p, Strategy s, int np, int nc, int K) {
  RunConfig cfg;
  const double mu = p.constants.mu, L = p.constants.L;
  cfg.correction = make_spec(Method::fbs, default_rho(Method::fbs, mu, L), mu, L);
  cfg.prediction = cfg.correction;
  cfg.strategy = s;
  cfg.np = np;
  cfg.nc = nc;
  cfg.horizon = K;
  cfg.x0 = Vector::Zero(p.dim());
  return cfg;
}

}  // namespace

TEST_CASE("optimal trajectory against closed forms and a grid oracle") {
  const double omega = 0.02 * std::numbers::pi;
  const TimeVaryingProblem cosine = testing::scalar_drift(
      1.0, [=](double t) { return std::cos(omega * t); }, [=](double t) { return -omega * std::sin(omega * t); },
      [=](double t) { return -omega * omega * std::cos(omega * t); }, NonsmoothCost::zero(), omega, omega * omega,
      0.1);
  const auto xs = optimal_trajectory(cosine, 50, 1e-13, vec1(0.0));
  for (int k = 0; k < 50; ++k) CHECK(std::abs(xs[k][0] - std::cos(omega * 0.1 * k)) <= 1e-11);

  TimeVaryingProblem zero_opt = testing::scalar_drift(
      1.0, [](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
      NonsmoothCost::l1(0.5), 0.0, 0.0, 0.1);
  for (const Vector& x : optimal_trajectory(zero_opt, 5, 1e-12, vec1(1.0))) CHECK(x[0] == 0.0);

  const TimeVaryingProblem sched = make_problem("scheduled_target");
  const double eps = 7.5, phi = 1.75;
  const double brute = testing::brute_force_l1(
      [&](double x) { return 0.5 * (x - 1) * (x - 1) + eps * std::log1p(std::exp(phi * x)); },
      [&](double x) { return (x - 1) + eps * phi / (1 + std::exp(-phi * x)); }, 0.5);
  CHECK(std::abs(optimal_trajectory(sched, 1, 1e-14, vec1(0.0))[0][0] - brute) <= 1e-8);
}

TEST_CASE("zero horizon steps and the identity cases") {
  const TimeVaryingProblem drift = testing::linear_drift(0.1);
  RunConfig cfg = fbs_config(drift, Strategy::one_step_back, 0, 0, 6);
  cfg.x0 = vec1(0.25);
  const RunTrace tr = run_prediction_correction(drift, cfg);
  REQUIRE(tr.ok());
  REQUIRE(tr.rows.size() == 6);
  for (const TraceRow& r : tr.rows) CHECK(r.x[0] == 0.25);

  // Exact correction each step: the error is the drift Ts at every step k >= 1.
  cfg.nc = 200;
  const RunTrace exact = run_prediction_correction(drift, cfg);
  for (std::size_t k = 1; k < exact.rows.size(); ++k) CHECK(exact.rows[k].err <= 1e-12);
  for (std::size_t k = 2; k < exact.rows.size(); ++k) {
    CHECK(exact.rows[k].pred_err == doctest::Approx(0.1).epsilon(1e-9));
  }
}

TEST_CASE("static problems converge geometrically") {
  TimeVaryingProblem stat = testing::scalar_drift(
      2.0, [](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
      NonsmoothCost::l1(0.2), 0.0, 0.0, 0.1);
  stat.constants.L = 3.0;  // declare a looser L so the rate is below one but not zero
  RunConfig cfg = fbs_config(stat, Strategy::one_step_back, 0, 5, 200);
  cfg.x0 = vec1(3.0);
  const RunTrace tr = run_prediction_correction(stat, cfg);
  REQUIRE(tr.ok());
  CHECK(tr.rows.back().err < 1e-10);
  CHECK(tr.rows[10].err <= tr.rows[5].err);
  CHECK(check_recursion_bound(tr, stat.constants, cfg, 0.1).ok());
}

TEST_CASE("recursion bound holds on valid runs and catches a falsified drift constant") {
  const TimeVaryingProblem sched = make_problem("scheduled_target");
  for (Strategy s : {Strategy::one_step_back, Strategy::taylor, Strategy::extrapolation, Strategy::taylor_fd}) {
    const RunConfig cfg = fbs_config(sched, s, 5, 5, 200);
    const RunTrace tr = run_prediction_correction(sched, cfg);
    REQUIRE(tr.ok());
    CHECK(check_recursion_bound(tr, sched.constants, cfg, 0.1).ok());
  }
  const RunConfig c_only = fbs_config(sched, Strategy::one_step_back, 0, 3, 100);
  const RunTrace tr = run_prediction_correction(sched, c_only);
  // With NP = 0 the bound is zeta(NC) (e + sigma).
  const double lam = c_only.correction.rates.lambda;
  for (std::size_t k = 1; k < tr.rows.size(); ++k) {
    const double expect = std::pow(lam, 3) * (tr.rows[k - 1].err + sched.constants.C0 * 0.1);
    CHECK(tr.rows[k].bound == doctest::Approx(expect).epsilon(1e-12));
  }

  const TimeVaryingProblem drift = testing::linear_drift(0.1);
  RunConfig cfg = fbs_config(drift, Strategy::one_step_back, 0, 1, 50);
  cfg.correction = make_spec(Method::fbs, 0.5, 1.0, 1.0);  // lambda = 1/2, so the error settles at Ts
  const RunTrace dr = run_prediction_correction(drift, cfg);
  RegularityConstants lie = drift.constants;
  lie.C0 = 0.0;
  CHECK_FALSE(check_recursion_bound(dr, lie, cfg, 0.1).ok());
}

TEST_CASE("asymptotic statistics window and sweep order") {
  CHECK(asymptotic_window(1000) == 800);
  CHECK(asymptotic_window(7) == 6);
  RunTrace tr;
  for (int k = 0; k < 5; ++k) {
    TraceRow r;
    r.k = k;
    r.err = k;
    tr.rows.push_back(r);
  }
  const ErrorStats st = asymptotic_stats(tr);
  CHECK(st.count == 4);
  CHECK(st.mean == doctest::Approx(2.5));
  CHECK(st.min == 1.0);
  CHECK(st.max == 4.0);

  const TimeVaryingProblem sched = make_problem("scheduled_target");
  std::vector<RunConfig> cfgs{fbs_config(sched, Strategy::taylor, 5, 5, 100),
                              fbs_config(sched, Strategy::one_step_back, 0, 5, 100)};
  const auto par = run_sweep(sched, cfgs, 2);
  const auto ser = run_sweep(sched, cfgs, 1);
  for (std::size_t i = 0; i < cfgs.size(); ++i)
    for (std::size_t k = 0; k < par[i].rows.size(); ++k) CHECK(par[i].rows[k].err == ser[i].rows[k].err);
}

TEST_CASE("more correction steps do not hurt on the scheduled-target problem") {
  const TimeVaryingProblem sched = make_problem("scheduled_target");
  double prev = kInfinity;
  for (int nc : {0, 5, 20}) {
    const RunTrace tr = run_prediction_correction(sched, fbs_config(sched, Strategy::taylor, 5, nc, 300));
    const double m = asymptotic_stats(tr).mean;
    CHECK(m <= prev * (1 + 1e-6));
    prev = m;
  }
}

TEST_CASE("invalid run configurations") {
  const TimeVaryingProblem drift = testing::linear_drift(0.1);
  RunConfig cfg = fbs_config(drift, Strategy::one_step_back, 0, 1, 10);
  cfg.x0 = Vector::Zero(2);
  CHECK_THROWS_AS(run_prediction_correction(drift, cfg), ConfigError);
  cfg.x0 = vec1(0.0);
  cfg.np = -1;
  CHECK_THROWS_AS(run_prediction_correction(drift, cfg), ConfigError);
}
