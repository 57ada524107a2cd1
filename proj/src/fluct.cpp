#include "qwork/fluct.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace qwork {

std::vector<CrooksPoint> crooks_points(const ReconstructedDistribution& forward,
                                       const ReconstructedDistribution& backward) {
  std::vector<CrooksPoint> out;
  std::array<bool, kTones> used{};
  for (const auto& f : forward.atoms) {
    int best = -1;
    double mismatch = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kTones; ++j) {
      const double d = std::abs(f.w + backward.atoms[j].w);
      if (!used[j] && d < mismatch) {
        mismatch = d;
        best = j;
      }
    }
    if (best < 0 || mismatch > kPairingToleranceKhz) {
      std::ostringstream msg;
      msg << "crooks_points: no backward atom near W = " << -f.w << " kHz";
      throw std::invalid_argument(msg.str());
    }
    used[best] = true;
    const auto& b = backward.atoms[best];
    auto is_zero = [](const ReconstructedAtom& a) { return a.prob <= std::max(1e-9, 3.0 * a.sigma_prob); };
    if (is_zero(f) || is_zero(b)) {
      std::ostringstream msg;
      msg << "crooks_points: zero probability in the pair at W = " << f.w << " kHz";
      throw std::domain_error(msg.str());
    }
    const double rel_f = f.sigma_prob / f.prob;
    const double rel_b = b.sigma_prob / b.prob;
    out.push_back({0.5 * (f.w - b.w), std::log(f.prob / b.prob), std::sqrt(rel_f * rel_f + rel_b * rel_b)});
  }
  std::sort(out.begin(), out.end(), [](const CrooksPoint& a, const CrooksPoint& b) { return a.w < b.w; });
  return out;
}

CrooksFit crooks_fit(const std::vector<CrooksPoint>& points) {
  const std::size_t n = points.size();
  if (n < 2) throw std::invalid_argument("crooks_fit: need at least two points");
  const bool weighted = std::all_of(points.begin(), points.end(), [](const CrooksPoint& p) { return p.sigma > 0.0; });

  // Centre W for conditioning; the weighted mean is subtracted and restored.
  double sw = 0.0, swx = 0.0;
  for (const auto& p : points) {
    const double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
    sw += w;
    swx += w * p.w;
  }
  const double xbar = swx / sw;
  double sxx = 0.0, sxy = 0.0, sy = 0.0;
  for (const auto& p : points) {
    const double w = weighted ? 1.0 / (p.sigma * p.sigma) : 1.0;
    const double dx = p.w - xbar;
    sxx += w * dx * dx;
    sxy += w * dx * p.ln_ratio;
    sy += w * p.ln_ratio;
  }
  double span = 0.0;
  for (const auto& p : points) span = std::max(span, std::abs(p.w - xbar));
  if (!(span > 1e-9)) throw std::invalid_argument("crooks_fit: degenerate spread in W");

  const double slope = sxy / sxx;
  const double ybar = sy / sw;  // fitted value at xbar
  const double intercept = ybar - slope * xbar;

  // Covariance of (ybar, slope) is diagonal in the centred parametrization.
  double var_ybar = 1.0 / sw;
  double var_slope = 1.0 / sxx;
  if (!weighted) {
    double rss = 0.0;
    for (const auto& p : points) {
      const double r = p.ln_ratio - (intercept + slope * p.w);
      rss += r * r;
    }
    const double s2 = n > 2 ? rss / static_cast<double>(n - 2) : 0.0;
    var_ybar *= s2;
    var_slope *= s2;
  }

  CrooksFit fit;
  fit.points = points;
  fit.beta_est = slope;
  fit.intercept = intercept;
  fit.sigma_beta = std::sqrt(var_slope);
  fit.cov_intercept_slope = -xbar * var_slope;
  const double var_intercept = var_ybar + xbar * xbar * var_slope;
  fit.sigma_intercept = std::sqrt(var_intercept);
  fit.degenerate_temperature = std::abs(slope) <= std::max(1e-9, 2.0 * fit.sigma_beta);
  if (fit.degenerate_temperature) {
    fit.delta_f_est = std::numeric_limits<double>::quiet_NaN();
    fit.sigma_delta_f = std::numeric_limits<double>::quiet_NaN();
  } else {
    fit.delta_f_est = -intercept / slope;
    const double da = -1.0 / slope;
    const double db = intercept / (slope * slope);
    const double var = da * da * var_intercept + db * db * var_slope + 2.0 * da * db * fit.cov_intercept_slope;
    fit.sigma_delta_f = std::sqrt(std::max(0.0, var));
  }
  return fit;
}

namespace {

double continuation(const std::array<double, kTones>& omega, const std::array<cplx, kTones>& alpha, double beta) {
  cplx s = 0.0;
  for (const auto& a : alpha) s += a;
  const double d = std::norm(s);
  if (!(std::sqrt(d) > 1e-12)) throw std::domain_error("jarzynski_continuation: amplitudes sum to zero");
  double acc = 0.0;
  for (int k = 0; k < kTones; ++k) acc += (alpha[k] * std::conj(s)).real() / d * std::exp(-beta * omega[k]);
  return acc;
}

}  // namespace

double jarzynski_continuation(const FitModel& m, double beta) {
  if (!std::isfinite(beta)) throw std::domain_error("jarzynski_continuation: beta must be finite");
  std::array<double, kTones> omega{};
  std::array<cplx, kTones> alpha{};
  for (int k = 0; k < kTones; ++k) {
    omega[k] = m.tones[k].omega;
    alpha[k] = m.tones[k].alpha;
  }
  return continuation(omega, alpha, beta);
}

Estimate monte_carlo(const FitModel& m, double beta, double sigma_beta, int trials, std::uint64_t seed) {
  if (trials < 100) throw std::invalid_argument("monte_carlo: need at least 100 trials");
  if (!std::isfinite(beta) || !(sigma_beta >= 0.0)) throw std::domain_error("monte_carlo: invalid beta");
  constexpr int kDim = kFitParams - 1;  // omegas and amplitude components
  Eigen::MatrixXd c(kDim, kDim);
  double scale = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      c(i, j) = 0.5 * (m.covariance[1 + i][1 + j] + m.covariance[1 + j][1 + i]);
      scale = std::max(scale, std::abs(c(i, j)));
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, scale))
    throw std::invalid_argument("monte_carlo: covariance is not positive semidefinite");
  const Eigen::MatrixXd factor =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  // All normal deviates are drawn up front, trial by trial, so the result
  // depends only on the seed.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> draws(static_cast<std::size_t>(trials) * (kDim + 1));
  for (auto& d : draws) d = normal(rng);

  Eigen::VectorXd mean(kDim);
  for (int k = 0; k < kTones; ++k) {
    mean(k) = m.tones[k].omega;
    mean(kTones + 2 * k) = m.tones[k].alpha.real();
    mean(kTones + 2 * k + 1) = m.tones[k].alpha.imag();
  }

  double sum = 0.0, sum_sq = 0.0;
  const double point = jarzynski_continuation(m, beta);
  for (int t = 0; t < trials; ++t) {
    const double* z = draws.data() + static_cast<std::size_t>(t) * (kDim + 1);
    const Eigen::VectorXd x = mean + factor * Eigen::Map<const Eigen::VectorXd>(z, kDim);
    std::array<double, kTones> omega{};
    std::array<cplx, kTones> alpha{};
    for (int k = 0; k < kTones; ++k) {
      omega[k] = x(k);
      alpha[k] = {x(kTones + 2 * k), x(kTones + 2 * k + 1)};
    }
    // accumulate deviations from the point estimate for a stable variance
    const double v = continuation(omega, alpha, beta + sigma_beta * z[kDim]) - point;
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(trials);
  const double mean_dev = sum / n;
  const double var = std::max(0.0, (sum_sq - n * mean_dev * mean_dev) / (n - 1.0));
  return {point + mean_dev, std::sqrt(var)};
}

bool agree(const Estimate& a, const Estimate& b) {
  return std::abs(a.value - b.value) <= 2.0 * std::hypot(a.sigma, b.sigma) + kAgreementFloor;
}

JarzynskiReport jarzynski_report(const FitModel& forward_fit, const CrooksFit& crooks, const QuenchProtocol& p,
                                 const InverseTemperature& beta, double sigma_beta, int trials, std::uint64_t seed) {
  if (beta.is_infinite()) throw std::domain_error("jarzynski_report: infinite beta");
  const double b = beta.value();
  JarzynskiReport r;
  r.beta = b;
  r.sigma_beta = sigma_beta;

  const Estimate mc = monte_carlo(forward_fit, b, sigma_beta, trials, seed);
  r.lhs_continuation = {jarzynski_continuation(forward_fit, b), mc.sigma};

  const double crooks_value = std::exp(crooks.intercept);
  r.rhs_crooks = {crooks_value, crooks_value * crooks.sigma_intercept};

  const double nu_i = p.initial_half_gap(), nu_f = p.final_half_gap();
  const double ratio = std::exp(-delta_f_theory(beta, p).beta_delta_f);
  const double dratio = ratio * (nu_f * std::tanh(b * nu_f) - nu_i * std::tanh(b * nu_i));
  r.rhs_theory = {ratio, std::abs(dratio) * sigma_beta};

  r.lhs_vs_crooks = agree(r.lhs_continuation, r.rhs_crooks);
  r.lhs_vs_theory = agree(r.lhs_continuation, r.rhs_theory);
  r.crooks_vs_theory = agree(r.rhs_crooks, r.rhs_theory);
  return r;
}

}  // namespace qwork
