#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "tvopt/operators.hpp"
#include "tvopt/presets.hpp"

using namespace tvopt;
using testing::vec1;

namespace {

CompositeProblem scalar_quadratic(double a, double b, FrozenNonsmooth g) {
  QuadraticModel q{Matrix::Constant(1, 1, a), vec1(-a * b), vec1(0.0), 0.5 * a * b * b};
  return CompositeProblem{frozen_quadratic(q), std::move(g)};  // 1/2 a (x - b)^2
}

FrozenNonsmooth no_g() { return freeze(NonsmoothCost::zero(), 0.0); }

}  // namespace

TEST_CASE("make_spec rates") {
  SolverSpec s = make_spec(Method::gradient, 2.0 / 4.0, 1.0, 3.0);
  CHECK(s.rates.lambda == doctest::Approx(0.5));
  CHECK(s.rates.chi == 1.0);
  CHECK(s.rates.beta == 1.0);
  CHECK(make_spec(Method::ppa, 1.0, 1.0, 50.0).rates.lambda == doctest::Approx(0.5));
  s = make_spec(Method::prs, 0.5, 1.0, 4.0);
  CHECK(s.rates.lambda == doctest::Approx(1.0 / 3.0));
  CHECK(s.rates.chi == doctest::Approx(2.0 / 3.0));
  CHECK(s.rates.beta == doctest::Approx(1.0 / 3.0));
  CHECK(default_rho(Method::prs, 1.0, 4.0) == doctest::Approx(0.5));
  CHECK(default_rho(Method::fbs, 1.0, 3.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(make_spec(Method::fbs, 0.7, 1.0, 3.0), ConfigError);  // rho >= 2/L
  CHECK_THROWS_AS(make_spec(Method::ppa, -1.0, 1.0, 3.0), ConfigError);
  CHECK(parse_method("prs") == Method::prs);
  CHECK_THROWS_AS(parse_method("newton"), ConfigError);
  CHECK(primal_counterpart(Method::admm) == Method::prs);
  CHECK(primal_counterpart(Method::mm) == Method::ppa);
}

TEST_CASE("gradient and ppa steps") {
  CHECK(gradient_step(scalar_quadratic(1.0, 1.0, no_g()), vec1(0.0), 1.0)[0] == doctest::Approx(1.0));
  CHECK(gradient_step(scalar_quadratic(1.0, 1.0, no_g()), vec1(1.0), 0.3)[0] == 1.0);
  CHECK(gradient_step(scalar_quadratic(3.0, 0.0, no_g()), vec1(2.0), 0.5)[0] == doctest::Approx(-1.0));
  CHECK(ppa_step(scalar_quadratic(1.0, 0.0, no_g()), vec1(2.0), 1.0)[0] == doctest::Approx(1.0));
  CHECK(ppa_step(scalar_quadratic(1.0, 0.7, no_g()), vec1(0.7), 1.0)[0] == doctest::Approx(0.7));

  // Smooth cost without a quadratic model goes through the inner Newton solve.
  const SampledProblem s = sample(make_problem("scheduled_target"), 0);
  const CompositeProblem smooth_only{s.f, no_g()};
  const double newton = ppa_step(smooth_only, vec1(0.0), 1.0)[0];
  const double eps = 7.5, phi = 1.75;
  auto dphi = [&](double x) {
    return (x - 1.0) + eps * phi / (1.0 + std::exp(-phi * x)) + x;  // grad of f + x^2/2
  };
  auto phi_fn = [&](double x) { return 0.5 * (x - 1) * (x - 1) + eps * std::log1p(std::exp(phi * x)) + 0.5 * x * x; };
  CHECK(std::abs(newton - testing::brute_force_l1(phi_fn, dphi, 0.0, -4.0, 4.0)) <= 1e-6);

  // With g = l1 the prox of f + g runs an inner proximal gradient.
  const CompositeProblem both{scalar_quadratic(2.0, 1.5, freeze(NonsmoothCost::l1(0.5), 0.0))};
  const double v = ppa_step(both, vec1(0.2), 0.5)[0];
  const double brute = testing::brute_force_l1([](double x) { return (x - 1.5) * (x - 1.5) + (x - 0.2) * (x - 0.2); },
                                               [](double x) { return 2 * (x - 1.5) + 2 * (x - 0.2); }, 0.5);
  CHECK(std::abs(v - brute) <= 1e-8);
}

TEST_CASE("fbs step") {
  const FrozenNonsmooth l1 = freeze(NonsmoothCost::l1(1.0), 0.0);
  CHECK(fbs_step(scalar_quadratic(1.0, 0.0, l1), vec1(2.0), 0.5)[0] == doctest::Approx(0.5));
  const CompositeProblem q = scalar_quadratic(2.0, -0.3, no_g());
  for (double x : {-1.0, 0.4, 3.0}) CHECK(fbs_step(q, vec1(x), 0.3)[0] == gradient_step(q, vec1(x), 0.3)[0]);

  // Two-stage evaluation from the raw oracles.
  const TimeVaryingProblem sched = make_problem("scheduled_target");
  const SampledProblem s = sample(sched, 0);
  const double rho = 2.0 / (sched.constants.L + sched.constants.mu);
  const double eps = 7.5, phi = 1.75;
  const double grad = (1.0 - 1.0) + eps * phi / (1.0 + std::exp(-phi));
  const double u = 1.0 - rho * grad;
  const double expect = std::copysign(std::max(std::abs(u) - rho * 0.5, 0.0), u);
  CHECK(fbs_step(s, vec1(1.0), rho)[0] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("prs step applies the composition of both reflections") {
  // f = g = x^2/2, rho = 1: prox halves its input.
  QuadraticModel half{Matrix::Identity(1, 1), vec1(0.0), vec1(0.0), 0.0};
  const FrozenNonsmooth g = freeze(
      NonsmoothCost::custom([](const Vector& x, double) { return 0.5 * x.squaredNorm(); },
                            [](double r, const Vector& v, double) { return Vector(v / (1.0 + r)); },
                            [](const Vector& x, double) { return x; }, false),
      0.0);
  const CompositeProblem p{frozen_quadratic(half), g};
  const SolverState next = prs_step(p, SolverState{vec1(2.0), vec1(0.0), 0}, 1.0);
  CHECK(next.x[0] == doctest::Approx(1.0));
  // refl_f(2) = 2 prox_f(2) - 2 = 0, refl_g(0) = 0.
  CHECK(next.z[0] == doctest::Approx(0.0));

  // Generic check of z+ = refl_g(refl_f(z)) on an l1 instance.
  const CompositeProblem q = scalar_quadratic(3.0, 0.8, freeze(NonsmoothCost::l1(0.4), 0.0));
  const double z = 1.7, rho = 0.6;
  const double xf = (z + rho * 3.0 * 0.8) / (1.0 + 3.0 * rho);
  const double rf = 2 * xf - z;
  const double pg = std::copysign(std::max(std::abs(rf) - rho * 0.4, 0.0), rf);
  const double rg = 2 * pg - rf;
  CHECK(prs_step(q, SolverState{vec1(z), vec1(0.0), 0}, rho).z[0] == doctest::Approx(rg).epsilon(1e-14));
}

TEST_CASE("run_solver") {
  const CompositeProblem q = scalar_quadratic(1.0, 1.0, no_g());
  const SolverSpec gd = make_spec(Method::gradient, 1.0, 1.0, 1.0);
  const SolverState init{vec1(0.3), vec1(0.3), 4};
  const SolverState same = run_solver(q, gd, init, 0);
  CHECK(same.x[0] == 0.3);
  CHECK(same.z[0] == 0.3);
  CHECK(same.iterations == 4);
  CHECK(run_solver(q, gd, SolverState{vec1(0.0), vec1(0.0), 0}, 1).x[0] == doctest::Approx(1.0));

  // prs warm start inverts the readout.
  const CompositeProblem l = scalar_quadratic(2.0, 0.5, freeze(NonsmoothCost::l1(0.3), 0.0));
  const SolverSpec prs = make_spec(Method::prs, 0.5, 2.0, 2.0);
  const SolverState w = warm_start(l, prs, vec1(-0.4));
  CHECK(readout(l, prs, w.z)[0] == doctest::Approx(-0.4).epsilon(1e-14));
}

TEST_CASE("measured contraction never exceeds the rate") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0), eig(0.5, 6.0);
  int pairs = 0;
  for (int inst = 0; inst < 10; ++inst) {
    const int n = 1 + inst % 4;
    Matrix Q = Matrix::Random(n, n);
    Eigen::HouseholderQR<Matrix> qr(Q);
    const Matrix U = qr.householderQ();
    Vector d(n);
    for (int i = 0; i < n; ++i) d[i] = eig(gen);
    d[0] = 0.5;
    d[n - 1] = 6.0;
    if (n == 1) d[0] = 3.0;
    const Matrix H = U * d.asDiagonal() * U.transpose();
    const double mu = d.minCoeff(), L = d.maxCoeff();
    Vector b(n);
    for (int i = 0; i < n; ++i) b[i] = u(gen);
    QuadraticModel qm{H, -H * b, Vector::Zero(n), 0.0};
    const CompositeProblem p{frozen_quadratic(qm), freeze(NonsmoothCost::l1(0.3), 0.0)};
    const CompositeProblem p0{frozen_quadratic(qm), no_g()};
    for (Method m : {Method::gradient, Method::ppa, Method::fbs, Method::prs}) {
      const SolverSpec spec = make_spec(m, default_rho(m, mu, L), mu, L);
      const CompositeProblem& prob = m == Method::gradient ? p0 : p;
      for (int j = 0; j < 3; ++j) {
        Vector a(n), c(n);
        for (int i = 0; i < n; ++i) {
          a[i] = u(gen);
          c[i] = u(gen);
        }
        const double ratio =
            (fixed_point_map(prob, spec, a) - fixed_point_map(prob, spec, c)).norm() / (a - c).norm();
        CHECK(ratio <= spec.rates.lambda + 1e-10);
        ++pairs;
      }
    }
  }
  CHECK(pairs >= 100);
}
