#pragma once

#include <limits>
#include <string>
#include <vector>

#include "tvopt/problem.hpp"

namespace tvopt {

/// Contraction triple of an operator solver: the fixed-point map is
/// lambda-contractive, the readout chi-Lipschitz and beta-strongly monotone.
struct RateTriple {
  double lambda = 0.0;
  double chi = 1.0;
  double beta = 1.0;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// zeta(0) = 1, zeta(l) = (chi/beta) lambda^l.
double zeta(int ell, const RateTriple& r);
/// xi(0) = 0, xi(l) = 1 + (chi/beta) lambda^l.
double xi(int ell, const RateTriple& r);

/// Triple valid for two solvers run one after the other: (max lambda, max chi, min beta).
RateTriple effective_triple(const RateTriple& a, const RateTriple& b);

/// Asymptotic radius of one method. radius is +infinity whenever a
/// condition fails, with the failing condition named in `violated`.
struct BoundReport {
  std::string method;
  double condition = 0.0;  // left-hand side of the convergence condition, must be < 1
  bool satisfied = true;
  std::string violated;
  double radius = kInfinity;
  // Quadratic Taylor bound only.
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double Ts_bar = std::numeric_limits<double>::quiet_NaN();
  double R_bar = std::numeric_limits<double>::quiet_NaN();
  double C4 = std::numeric_limits<double>::quiet_NaN();
  double C5 = std::numeric_limits<double>::quiet_NaN();
  double C6 = std::numeric_limits<double>::quiet_NaN();
  // Dual bound only: radii of x and of B y implied by the dual radius.
  double radius_x = std::numeric_limits<double>::quiet_NaN();
  double radius_By = std::numeric_limits<double>::quiet_NaN();
};

BoundReport bound_correction_only(int NC, const RateTriple& r, double C0, double D0, double mu,
                                  double Ts);
BoundReport bound_prediction_only(int NP, const RateTriple& r, double C0, double D0, double mu,
                                  double Ts);
/// Linear-in-error Taylor bound.
BoundReport bound_taylor(int NP, int NC, const RateTriple& r, const RegularityConstants& c, double Ts);

struct TaylorConstants {
  double C4 = 0.0;
  double C5 = 0.0;
  double C6 = 0.0;
};
/// C5 is replaced by C5 + C3/mu when the time derivative is finite-differenced.
TaylorConstants taylor_constants(const RegularityConstants& c, double Ts, bool finite_difference = false);

/// Quadratic-in-error Taylor bound. gamma NaN selects the midpoint of
/// (zeta_C zeta_P, 1). Ts >= Ts_bar is flagged and yields +infinity.
BoundReport bound_taylor_quadratic(int NP, int NC, const RateTriple& r, const RegularityConstants& c,
                                   double Ts, double gamma = std::numeric_limits<double>::quiet_NaN(),
                                   bool finite_difference = false);
/// Two-point extrapolation bound; requires C2 = 0.
BoundReport bound_extrapolation(int NP, int NC, const RateTriple& r, const RegularityConstants& c,
                                double Ts);

struct DualConstants {
  double mu_bar = 0.0;
  double L_bar = 0.0;
  double C0_bar = 0.0;
  double D0_bar = 0.0;
  double kappa_bar() const { return L_bar / mu_bar; }
};

/// Recovery factors: ||x - x*|| <= fx ||w - w*||, ||B(y - y*)|| <= fBy ||w - w*||.
struct RecoveryFactors {
  double fx = 0.0;
  double fBy = 0.0;
};
RecoveryFactors primal_recovery_factors(double normA, double normB, double mu, double rho);

/// Dual Taylor bound with the dual constants, plus the implied primal radii.
BoundReport bound_dual(int NP, int NC, const RateTriple& r, const DualConstants& d, double Ts,
                       double rho, double normA, double normB, double mu);

/// e_k <= (zC zP)^k e0 + sum_{j<k} (zC zP)^{k-j-1} zC (zP sigma_j + xP tau_j).
double iterated_bound(int k, const RateTriple& r, int NP, int NC, const std::vector<double>& sigma,
                      const std::vector<double>& tau, double e0);
double iterated_bound(int k, const RateTriple& r, int NP, int NC, double sigma, double tau, double e0);
/// k -> infinity limit of the constant-input iterated bound.
double iterated_bound_limit(const RateTriple& r, int NP, int NC, double sigma, double tau);

/// Closed-form radii for limiting regimes, normalized to D0 = 0, C2 = 0, mu = 1.
/// Each row is one method; columns are (exact, C1 = 0), (exact, C1 > 0),
/// (poor, C1 = 0), (poor, C1 > 0). Exact means N_P -> infinity, poor means zeta(N_P) ~ 1.
struct RegimeRow {
  std::string method;
  double exact_c1_zero = 0.0;
  double exact_c1_pos = 0.0;
  double poor_c1_zero = 0.0;
  double poor_c1_pos = 0.0;
};
/// Throws ConfigError unless D0 = 0, C2 = 0 and mu = 1.
std::vector<RegimeRow> regime_table(const RegularityConstants& c, const RateTriple& r, int NC, double Ts);

}  // namespace tvopt
