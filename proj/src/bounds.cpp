#include "tvopt/bounds.hpp"

#include <algorithm>
#include <cmath>

namespace tvopt {

namespace {

void require_nonneg_horizon(int ell) {
  if (ell < 0) throw ConfigError("solver horizon must be >= 0");
}

BoundReport with_condition(std::string method, double condition, const char* name) {
  BoundReport b;
  b.method = std::move(method);
  b.condition = condition;
  b.satisfied = condition < 1.0;
  if (!b.satisfied) b.violated = name;
  return b;
}

double sigma_of(double C0, double D0, double mu, double Ts) { return (C0 * Ts + D0) / mu; }

}  // namespace

double zeta(int ell, const RateTriple& r) {
  require_nonneg_horizon(ell);
  if (ell == 0) return 1.0;
  return (r.chi / r.beta) * std::pow(r.lambda, ell);
}

double xi(int ell, const RateTriple& r) {
  require_nonneg_horizon(ell);
  if (ell == 0) return 0.0;
  return 1.0 + (r.chi / r.beta) * std::pow(r.lambda, ell);
}

RateTriple effective_triple(const RateTriple& a, const RateTriple& b) {
  return {std::max(a.lambda, b.lambda), std::max(a.chi, b.chi), std::min(a.beta, b.beta)};
}

BoundReport bound_correction_only(int NC, const RateTriple& r, double C0, double D0, double mu,
                                  double Ts) {
  const double zc = zeta(NC, r);
  BoundReport b = with_condition("correction_only", zc, "zeta(NC) < 1");
  // Evaluated in the same order as the Taylor and extrapolation radii so the
  // N_P = 0 reductions agree bit for bit.
  if (b.satisfied) b.radius = zc * sigma_of(C0, D0, mu, Ts) / (1.0 - zc);
  return b;
}

BoundReport bound_prediction_only(int NP, const RateTriple& r, double C0, double D0, double mu,
                                  double Ts) {
  const double zp = zeta(NP, r);
  BoundReport b = with_condition("prediction_only", zp, "zeta(NP) < 1");
  if (b.satisfied) b.radius = sigma_of(C0, D0, mu, Ts) / (1.0 - zp);
  return b;
}

BoundReport bound_taylor(int NP, int NC, const RateTriple& r, const RegularityConstants& c, double Ts) {
  const double zc = zeta(NC, r), zp = zeta(NP, r), xp = xi(NP, r);
  const double kappa = c.kappa();
  BoundReport b = with_condition("taylor", zc * (zp + 2.0 * kappa * xp),
                                 "zeta(NC) [zeta(NP) + 2 kappa xi(NP)] < 1");
  if (b.satisfied) {
    b.radius = zc * sigma_of(c.C0, c.D0, c.mu, Ts) * (zp + 2.0 * (1.0 + kappa) * xp) /
               (1.0 - b.condition);
  }
  return b;
}

TaylorConstants taylor_constants(const RegularityConstants& c, double Ts, bool finite_difference) {
  const double mu = c.mu, mu2 = mu * mu, mu3 = mu2 * mu;
  TaylorConstants k;
  k.C4 = Ts * (c.C0 * c.C1 / mu2 + c.C2 / mu) + c.C1 * c.D0 / mu2;
  k.C5 = c.C0 * c.C0 * c.C1 / mu3 + 2.0 * c.C0 * c.C2 / mu2 + c.C3 / mu;
  if (finite_difference) k.C5 += c.C3 / mu;
  k.C6 = Ts * (c.C0 * c.C1 / mu + c.C2) / mu2 + (1.0 + c.C1 * c.D0 / (2.0 * mu2)) / mu;
  return k;
}

BoundReport bound_taylor_quadratic(int NP, int NC, const RateTriple& r, const RegularityConstants& c,
                                   double Ts, double gamma, bool finite_difference) {
  const double zc = zeta(NC, r), zp = zeta(NP, r), xp = xi(NP, r);
  const double mu = c.mu, mu2 = mu * mu;
  const TaylorConstants k = taylor_constants(c, Ts, finite_difference);

  BoundReport b;
  b.method = "taylor_quadratic";
  b.C4 = k.C4;
  b.C5 = k.C5;
  b.C6 = k.C6;
  const double floor = zc * zp;
  b.gamma = std::isnan(gamma) ? 0.5 * (floor + 1.0) : gamma;
  b.condition = floor / b.gamma;
  if (!(b.gamma > 0.0 && b.gamma < 1.0)) {
    b.satisfied = false;
    b.violated = "0 < gamma < 1";
    return b;
  }
  if (!(b.gamma > floor)) {
    b.satisfied = false;
    b.violated = "gamma > zeta(NC) zeta(NP)";
    return b;
  }

  // Ts < Ts_bar is equivalent to zeta_C (zeta_P + xi_P C4) < gamma.
  const double drift = c.C0 * c.C1 / mu2 + c.C2 / mu;
  const double slack = b.gamma - zc * (zp + xp * c.C1 * c.D0 / mu2);
  if (slack <= 0.0) {
    b.Ts_bar = 0.0;
  } else if (zc * xp * drift == 0.0) {
    b.Ts_bar = kInfinity;
  } else {
    b.Ts_bar = slack / (zc * xp) / drift;
  }
  if (c.C1 == 0.0 || xp == 0.0 || zc == 0.0) {
    b.R_bar = kInfinity;
  } else if (std::isinf(b.Ts_bar)) {
    // No drift term: R_bar = (gamma - eta1) / eta2 with eta1 independent of Ts.
    b.R_bar = slack * 2.0 * mu / (zc * xp * c.C1);
  } else {
    b.R_bar = 2.0 * mu / c.C1 * drift * (b.Ts_bar - Ts);
  }
  if (!(Ts < b.Ts_bar)) {
    b.satisfied = false;
    b.violated = "Ts < Ts_bar";
    return b;
  }
  b.radius = zc / (1.0 - b.gamma) *
             (zp * sigma_of(c.C0, c.D0, mu, Ts) + xp * (k.C5 * Ts * Ts / 2.0 + k.C6 * c.D0));
  return b;
}

BoundReport bound_extrapolation(int NP, int NC, const RateTriple& r, const RegularityConstants& c,
                                double Ts) {
  const double zc = zeta(NC, r), zp = zeta(NP, r), xp = xi(NP, r);
  BoundReport b = with_condition("extrapolation", zc * zp, "zeta(NC) zeta(NP) < 1");
  if (c.C2 != 0.0) {
    b.satisfied = false;
    b.violated = "C2 = 0";
    return b;
  }
  if (b.satisfied) {
    b.radius = zc * ((zp * c.C0 * Ts + c.C3 * xp * Ts * Ts + c.D0 * (zp + xp)) / c.mu) /
               (1.0 - b.condition);
  }
  return b;
}

RecoveryFactors primal_recovery_factors(double normA, double normB, double mu, double rho) {
  if (!(rho > 0.0)) throw ConfigError("penalty rho must be > 0");
  if (!(mu > 0.0)) throw ConfigError("constant mu must be > 0");
  return {normA / mu, normB * (1.0 / rho + normA * normA / mu)};
}

BoundReport bound_dual(int NP, int NC, const RateTriple& r, const DualConstants& d, double Ts,
                       double rho, double normA, double normB, double mu) {
  RegularityConstants bar;
  bar.mu = d.mu_bar;
  bar.L = d.L_bar;
  bar.C0 = d.C0_bar;
  bar.D0 = d.D0_bar;
  BoundReport b = bound_taylor(NP, NC, r, bar, Ts);
  b.method = "dual_taylor";
  const RecoveryFactors f = primal_recovery_factors(normA, normB, mu, rho);
  if (b.satisfied) {
    b.radius_x = f.fx * b.radius;
    b.radius_By = normB == 0.0 ? 0.0 : f.fBy * b.radius;
  } else {
    b.radius_x = kInfinity;
    b.radius_By = normB == 0.0 ? 0.0 : kInfinity;
  }
  return b;
}

double iterated_bound(int k, const RateTriple& r, int NP, int NC, const std::vector<double>& sigma,
                      const std::vector<double>& tau, double e0) {
  if (k < 0) throw ConfigError("iteration index must be >= 0");
  if (static_cast<int>(sigma.size()) < k || static_cast<int>(tau.size()) < k) {
    throw ConfigError("sigma and tau need at least k entries");
  }
  const double zc = zeta(NC, r), zp = zeta(NP, r), xp = xi(NP, r);
  double e = e0;
  for (int j = 0; j < k; ++j) e = zc * (zp * e + zp * sigma[j] + xp * tau[j]);
  return e;
}

double iterated_bound(int k, const RateTriple& r, int NP, int NC, double sigma, double tau, double e0) {
  if (k < 0) throw ConfigError("iteration index must be >= 0");
  return iterated_bound(k, r, NP, NC, std::vector<double>(k, sigma), std::vector<double>(k, tau), e0);
}

double iterated_bound_limit(const RateTriple& r, int NP, int NC, double sigma, double tau) {
  const double zc = zeta(NC, r), zp = zeta(NP, r), xp = xi(NP, r);
  const double a = zc * zp;
  if (!(a < 1.0)) return kInfinity;
  return zc * (zp * sigma + xp * tau) / (1.0 - a);
}

std::vector<RegimeRow> regime_table(const RegularityConstants& c, const RateTriple& r, int NC, double Ts) {
  if (c.D0 != 0.0 || c.C2 != 0.0 || c.mu != 1.0) {
    throw ConfigError("regime table requires D0 = 0, C2 = 0 and mu = 1");
  }
  const double zc = zeta(NC, r);
  const double q = zc < 1.0 ? zc / (1.0 - zc) : kInfinity;
  const double C7 = c.C0 * c.C0 * c.C1 + c.C3;
  const double c0t = c.C0 * Ts, t2 = Ts * Ts;
  return {
      {"correction_only", q * c0t, q * c0t, q * c0t, q * c0t},
      {"prediction_only", c0t, c0t, kInfinity, kInfinity},
      {"taylor", zc * c.C3 * t2 / 2.0, zc * C7 * t2 / 2.0, q * (c0t + c.C3 * t2), q * (c0t + C7 * t2)},
      {"extrapolation", zc * c.C3 * t2, zc * c.C3 * t2, q * (c0t + 2.0 * c.C3 * t2),
       q * (c0t + 2.0 * c.C3 * t2)},
  };
}

}  // namespace tvopt
