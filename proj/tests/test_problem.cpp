#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "tvopt/presets.hpp"
#include "tvopt/runner.hpp"

using namespace tvopt;
using testing::vec1;

TEST_CASE("sample freezes the oracles at t_k = k Ts") {
  const TimeVaryingProblem sched = make_problem("scheduled_target");
  const SampledProblem s0 = sample(sched, 0);
  CHECK(s0.t == 0.0);
  // grad at 0 is (0 - cos 0) + eps phi / 2
  CHECK(s0.f.grad(vec1(0.0))[0] == doctest::Approx(-1.0 + 7.5 * 1.75 / 2.0).epsilon(1e-14));

  const TimeVaryingProblem drift = testing::linear_drift(0.1);
  const SampledProblem s3 = sample(drift, 3);
  CHECK(s3.t == doctest::Approx(0.3));
  CHECK(s3.f.grad(vec1(2.0))[0] == doctest::Approx(2.0 - 0.3).epsilon(1e-15));

  TimeVaryingProblem stat = testing::scalar_drift(
      2.0, [](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; },
      NonsmoothCost::zero(), 0.0, 0.0, 0.1);
  for (int k : {0, 5, 17}) CHECK(sample(stat, k).f.grad(vec1(0.7))[0] == 2.0 * 0.7 - 1.0);

  CHECK_THROWS_AS(sample(drift, -1), ConfigError);
}

TEST_CASE("validate_constants accepts the scheduled-target preset and flags a falsified C0") {
  const TimeVaryingProblem sched = make_problem("scheduled_target");
  const ConstantReport ok = validate_constants(sched, grid_probes_1d(-2.0, 2.0, 41, 100.0, 21));
  CHECK(ok.ok());
  CHECK(ok.max_eigenvalue <= sched.constants.L * (1 + 1e-12));
  CHECK(ok.min_eigenvalue >= sched.constants.mu);

  TimeVaryingProblem drift = testing::linear_drift(0.1);
  drift.constants.C0 = 0.0;
  const ConstantReport bad = validate_constants(drift, grid_probes_1d(-1.0, 1.0, 5, 1.0, 3));
  CHECK_FALSE(bad.ok());
  CHECK(bad.max_dt_grad == doctest::Approx(1.0));

  TimeVaryingProblem stat;
  stat.smooth.dim = 2;
  const Vector b{{0.3, -1.0}};
  stat.smooth.value = [=](const Vector& x, double) { return 0.5 * (x - b).squaredNorm(); };
  stat.smooth.grad = [=](const Vector& x, double) { return Vector(x - b); };
  stat.nonsmooth = NonsmoothCost::zero();
  stat.constants = {1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK(validate_constants(stat, random_probes(2, -2, 2, 5, 30, 7)).ok());
}

TEST_CASE("finite_diff_dt_grad is a backward difference") {
  const TimeVaryingProblem drift = testing::linear_drift(0.1);
  CHECK(finite_diff_dt_grad(sample(drift, 4).f, sample(drift, 3).f, vec1(0.4), 0.1)[0] ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(finite_diff_dt_grad(sample(drift, 4).f, sample(drift, 3).f, vec1(0.4), 0.0), ConfigError);

  // Scheduled target at x = 0, t_k = 1: exact time derivative omega sin(omega t_k).
  const double omega = 0.02 * std::numbers::pi;
  ParamMap params{{"ts", 0.1}};
  const TimeVaryingProblem sched = make_problem("scheduled_target", params);
  const FrozenSmooth fk = freeze(sched.smooth, 1.0), fkm1 = freeze(sched.smooth, 0.9);
  const double fd = finite_diff_dt_grad(fk, fkm1, vec1(0.0), 0.1)[0];
  CHECK(std::abs(fd - omega * std::sin(omega * 1.0)) <= omega * omega * 0.1 / 2.0);
}

TEST_CASE("l1 prox is soft thresholding and matches a grid minimization") {
  const NonsmoothCost g = NonsmoothCost::l1(0.5);
  const FrozenNonsmooth gf = freeze(g, 0.0);
  for (double v : {-2.0, -0.3, 0.0, 0.49, 1.7}) {
    for (double rho : {0.2, 1.0}) {
      const double p = gf.prox(rho, vec1(v))[0];
      CHECK(p == doctest::Approx(soft_threshold(vec1(v), rho * 0.5)[0]).epsilon(1e-15));
      const double brute = testing::brute_force_l1([&](double x) { return (x - v) * (x - v) / (2 * rho); },
                                                   [&](double x) { return (x - v) / rho; }, 0.5, -3.0, 3.0);
      CHECK(std::abs(p - brute) <= 1e-8);
    }
  }
}

TEST_CASE("indicator proxes project exactly") {
  const FrozenNonsmooth box = freeze(NonsmoothCost::box(Vector(Vector::Constant(2, -1.0)), Vector(Vector::Constant(2, 1.0))), 0.0);
  const Vector p = box.prox(1.0, Vector{{2.0, -0.5}});
  CHECK(p[0] == 1.0);
  CHECK(p[1] == -0.5);
  CHECK(std::isinf(box.value(Vector{{2.0, 0.0}})));
  CHECK(box.value(p) == 0.0);

  const FrozenNonsmooth half = freeze(NonsmoothCost::halfspace(Vector{{1.0, 1.0}}, 1.0), 0.0);
  const Vector q = half.prox(3.0, Vector{{2.0, 2.0}});
  CHECK(q[0] == doctest::Approx(0.5));
  CHECK(q[1] == doctest::Approx(0.5));
}

TEST_CASE("oracle properties on random probes: derivative consistency and strong convexity") {
  const TimeVaryingProblem qd = make_problem("quadratic_drift");
  const auto probes = random_probes(2, -3.0, 3.0, 10.0, 50, 3);
  for (std::size_t i = 0; i + 1 < probes.size(); ++i) {
    const Probe& a = probes[i];
    const Vector g = qd.smooth.grad(a.x, a.t);
    Vector fd(2);
    for (int j = 0; j < 2; ++j) {
      Vector e = Vector::Zero(2);
      e[j] = 1e-6;
      fd[j] = (qd.smooth.value(a.x + e, a.t) - qd.smooth.value(a.x - e, a.t)) / 2e-6;
    }
    CHECK((fd - g).norm() <= 1e-5 * std::max(1.0, g.norm()));
    const Vector y = probes[i + 1].x;
    const double mono = (qd.smooth.grad(a.x, a.t) - qd.smooth.grad(y, a.t)).dot(a.x - y);
    CHECK(mono >= qd.constants.mu * (a.x - y).squaredNorm() - 1e-12);
  }
}

TEST_CASE("consecutive optima move at most (C0 Ts + D0) / mu") {
  const TimeVaryingProblem sched = make_problem("scheduled_target");
  const auto xs = optimal_trajectory(sched, 400, 1e-12, vec1(0.0));
  const double bound = (sched.constants.C0 * sched.sampling_period + sched.constants.D0) / sched.constants.mu;
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) CHECK((xs[k + 1] - xs[k]).norm() <= bound + 1e-10);
}

TEST_CASE("constants validation rejects malformed declarations") {
  RegularityConstants c;
  c.mu = 2.0;
  c.L = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.L = 3.0;
  c.C0 = -1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  TimeVaryingProblem p = testing::linear_drift(1.5);
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("preset registry") {
  CHECK(has_preset("scheduled_target"));
  CHECK(make_problem("paper_sec7").name == "scheduled_target");
  CHECK(is_constrained_preset("tv_qp_eq"));
  CHECK_THROWS_AS(make_problem("nope"), ConfigError);
  CHECK_THROWS_AS(make_problem("scheduled_target", {{"bogus", 1.0}}), ConfigError);
  CHECK_THROWS_AS(make_problem("tv_sharing"), ConfigError);
  const TimeVaryingProblem p = make_problem("scheduled_target", {{"ts", 0.25}});
  CHECK(p.sampling_period == 0.25);
  CHECK(p.constants.L == doctest::Approx(1.0 + 7.5 * 1.75 * 1.75 / 4.0));
  // Peak of |s (1 - s)(1 - 2 s)| over s in (0, 1), scanned independently.
  double peak = 0.0;
  for (int i = 1; i < 200000; ++i) {
    const double s = i / 200000.0;
    peak = std::max(peak, std::abs(s * (1 - s) * (1 - 2 * s)));
  }
  CHECK(logistic_third_derivative_peak() == doctest::Approx(peak).epsilon(1e-8));
}
