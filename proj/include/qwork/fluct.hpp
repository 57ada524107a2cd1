#pragma once

// Fluctuation-theorem checks on reconstructed work statistics: the
// Tasaki-Crooks line, the Jarzynski average by continuation of the fitted
// characteristic function, and Monte Carlo error propagation.

#include <cstdint>
#include <vector>

#include "qwork/spectral.hpp"

namespace qwork {

struct CrooksPoint {
  double w = 0.0;         // kHz
  double ln_ratio = 0.0;  // ln(P_F(W) / P_B(-W))
  double sigma = 0.0;
};

// Largest |W_F + W_B| accepted when pairing forward and backward atoms.
inline constexpr double kPairingToleranceKhz = 0.2;

// One point per forward atom, paired with the backward atom nearest -W.
// Throws std::invalid_argument for unpairable atoms and std::domain_error
// when either member of a pair has (statistically) zero probability.
std::vector<CrooksPoint> crooks_points(const ReconstructedDistribution& forward,
                                       const ReconstructedDistribution& backward);

struct CrooksFit {
  double beta_est = 0.0;       // 1/kHz, the slope
  double delta_f_est = 0.0;    // kHz, the zero crossing; NaN when degenerate
  double intercept = 0.0;      // -beta delta F
  double sigma_beta = 0.0;
  double sigma_delta_f = 0.0;  // NaN when degenerate
  double sigma_intercept = 0.0;
  double cov_intercept_slope = 0.0;
  bool degenerate_temperature = false;  // slope indistinguishable from zero
  std::vector<CrooksPoint> points;
};

// Straight-line fit ln_ratio = intercept + beta W, inverse-variance weighted
// when every sigma is positive, otherwise ordinary least squares with the
// residual variance. Throws for fewer than two points or no spread in W.
CrooksFit crooks_fit(const std::vector<CrooksPoint>& points);

struct Estimate {
  double value = 0.0;
  double sigma = 0.0;
};

// sum_k prob_k exp(-beta omega_k) with the decay envelope dropped.
// Throws std::domain_error for non-finite beta or vanishing sum of amplitudes.
double jarzynski_continuation(const FitModel& m, double beta);

// Sample mean and standard deviation of the continuation over Gaussian draws
// of the omegas and amplitudes (from the fit covariance) and of beta.
// Throws std::invalid_argument for trials < 100 or a covariance that is not
// positive semidefinite.
Estimate monte_carlo(const FitModel& m, double beta, double sigma_beta, int trials, std::uint64_t seed);

struct JarzynskiReport {
  double beta = 0.0;
  double sigma_beta = 0.0;
  Estimate lhs_continuation;  // <exp(-beta W)> from the forward fit
  Estimate rhs_crooks;        // exp(-beta delta F) from the Crooks line
  Estimate rhs_theory;        // Z_tau / Z_0
  bool lhs_vs_crooks = false;
  bool lhs_vs_theory = false;
  bool crooks_vs_theory = false;

  bool all_consistent() const { return lhs_vs_crooks && lhs_vs_theory && crooks_vs_theory; }
};

// Two estimates agree when |x - y| <= 2 sqrt(sx^2 + sy^2) + kAgreementFloor.
inline constexpr double kAgreementFloor = 1e-6;
bool agree(const Estimate& a, const Estimate& b);

// Throws std::domain_error for infinite beta.
JarzynskiReport jarzynski_report(const FitModel& forward_fit, const CrooksFit& crooks, const QuenchProtocol& p,
                                 const InverseTemperature& beta, double sigma_beta, int trials, std::uint64_t seed);

}  // namespace qwork
