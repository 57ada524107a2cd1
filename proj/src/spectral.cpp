#include "qwork/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qwork {

namespace {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

CMat design(const std::vector<double>& u, const std::array<double, kTones>& omegas, double gamma) {
  CMat phi(static_cast<Eigen::Index>(u.size()), kTones);
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double env = std::exp(-gamma * u[j]);
    for (int k = 0; k < kTones; ++k) phi(static_cast<Eigen::Index>(j), k) = std::polar(env, kTwoPi * omegas[k] * u[j]);
  }
  return phi;
}

CVec to_vector(const std::vector<cplx>& v) {
  CVec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

double min_separation(const std::array<double, kTones>& w) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kTones; ++i)
    for (int j = i + 1; j < kTones; ++j) m = std::min(m, std::abs(w[i] - w[j]));
  return m;
}

// Moore-Penrose inverse of a symmetric PSD matrix.
RMat pseudo_inverse_psd(const RMat& a) {
  Eigen::SelfAdjointEigenSolver<RMat> es(a);
  const RVec& ev = es.eigenvalues();
  const double cutoff = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  RVec inv(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) inv(i) = ev(i) > cutoff ? 1.0 / ev(i) : 0.0;
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

struct Projection {
  Eigen::ColPivHouseholderQR<CMat> qr;
  CVec alpha;
  CVec residual;  // model - data
  double cost = 0.0;
};

Projection project(const CMat& phi, const CVec& y) {
  Projection p{Eigen::ColPivHouseholderQR<CMat>(phi), {}, {}, 0.0};
  if (p.qr.rank() < kTones) throw std::invalid_argument("fit_model: rank-deficient design");
  p.alpha = p.qr.solve(y);
  p.residual = phi * p.alpha - y;
  p.cost = p.residual.squaredNorm();
  return p;
}

}  // namespace

std::vector<SpectrumBin> periodogram(const MagnetizationSeries& series) {
  series.validate();
  const std::size_t n = series.samples.size();
  if (n < 8) throw std::invalid_argument("periodogram: need at least 8 samples");
  const double h = series.spacing();
  const double rate = 1.0 / h;

  std::vector<cplx> twiddle(n);
  for (std::size_t k = 0; k < n; ++k) twiddle[k] = std::polar(1.0, -kTwoPi * static_cast<double>(k) / n);

  std::vector<SpectrumBin> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += series.samples[j] * twiddle[(j * k) % n];
    double f = static_cast<double>(k) * rate / n;
    if (f > 0.5 * rate + 1e-12 * rate) f -= rate;
    out[k] = {f, std::norm(acc) / static_cast<double>(n)};
  }
  std::sort(out.begin(), out.end(), [](const SpectrumBin& a, const SpectrumBin& b) { return a.freq < b.freq; });
  return out;
}

std::vector<double> pick_peaks(const std::vector<SpectrumBin>& spectrum, int k) {
  const int n = static_cast<int>(spectrum.size());
  if (k < 1 || 4 * k > n) throw std::invalid_argument("pick_peaks: need k <= n/4");
  double pmax = 0.0;
  for (const auto& b : spectrum) pmax = std::max(pmax, b.power);
  const double floor = 1e-10 * pmax;
  auto at = [&](int i) { return spectrum[static_cast<std::size_t>(((i % n) + n) % n)].power; };

  std::vector<int> maxima;
  for (int i = 0; i < n; ++i) {
    const double p = at(i);
    if (p > floor && p > at(i - 1) && p >= at(i + 1)) maxima.push_back(i);
  }
  std::sort(maxima.begin(), maxima.end(), [&](int a, int b) { return at(a) > at(b); });

  std::vector<int> chosen;
  for (int i : maxima) {
    bool ok = true;
    for (int c : chosen) {
      const int d = std::abs(i - c);
      if (std::min(d, n - d) < 2) ok = false;
    }
    if (ok) chosen.push_back(i);
    if (static_cast<int>(chosen.size()) == k) break;
  }
  if (static_cast<int>(chosen.size()) < k)
    throw std::runtime_error("pick_peaks: found " + std::to_string(chosen.size()) + " local maxima, need " +
                             std::to_string(k));

  const double df = spectrum[1].freq - spectrum[0].freq;
  std::vector<double> freqs;
  for (int i : chosen) {
    const double l = at(i - 1), c = at(i), r = at(i + 1);
    double delta = 0.0;
    if (l > 0.0 && r > 0.0) {
      const double ll = std::log(l), lc = std::log(c), lr = std::log(r);
      const double denom = ll - 2.0 * lc + lr;
      if (denom < 0.0) delta = 0.5 * (ll - lr) / denom;
    }
    freqs.push_back(spectrum[static_cast<std::size_t>(i)].freq + std::clamp(delta, -0.5, 0.5) * df);
  }
  std::sort(freqs.begin(), freqs.end());
  return freqs;
}

std::array<double, kTones> seed_omegas(const MagnetizationSeries& series) {
  series.validate();
  const std::size_t n = series.samples.size();
  if (n < 8) throw std::invalid_argument("seed_omegas: need at least 8 samples");
  const double h = series.spacing();
  const double rate = 1.0 / h;
  const std::size_t padded = std::max<std::size_t>(8192, 16 * n);
  const double df = rate / static_cast<double>(padded);
  const double native_bin = rate / static_cast<double>(n);

  std::vector<double> x(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double hann = 0.5 - 0.5 * std::cos(kTwoPi * (j + 0.5) / static_cast<double>(n));
    x[j] = series.samples[j].real() * hann;
  }
  const std::size_t half = padded / 2;
  std::vector<double> power(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    cplx acc = 0.0;
    const cplx step = std::polar(1.0, -kTwoPi * static_cast<double>(k) / static_cast<double>(padded));
    cplx w = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += x[j] * w;
      w *= step;
    }
    power[k] = std::norm(acc);
  }

  std::vector<std::size_t> maxima;
  for (std::size_t k = 1; k < half; ++k)
    if (power[k] > power[k - 1] && power[k] >= power[k + 1] && k * df > 0.5 * native_bin) maxima.push_back(k);
  std::sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return power[a] > power[b]; });

  std::vector<double> picked;
  for (std::size_t k : maxima) {
    const double f = static_cast<double>(k) * df;
    if (!picked.empty() && std::abs(f - picked.front()) < 2.0 * native_bin) continue;
    picked.push_back(f);
    if (picked.size() == 2) break;
  }
  if (picked.size() < 2) throw std::runtime_error("seed_omegas: fewer than two resolvable peaks");
  const double lo = std::min(picked[0], picked[1]);
  const double hi = std::max(picked[0], picked[1]);
  return {-hi, -lo, lo, hi};
}

cplx FitModel::evaluate(double u) const {
  cplx s = 0.0;
  for (const auto& t : tones) s += t.alpha * std::polar(1.0, kTwoPi * t.omega * u);
  return s * std::exp(-gamma * u);
}

void FitModel::validate() const {
  for (int k = 1; k < kTones; ++k)
    if (!(tones[k].omega > tones[k - 1].omega)) throw std::invalid_argument("FitModel: omegas not strictly ascending");
  RMat c(kFitParams, kFitParams);
  double scale = 0.0;
  for (int i = 0; i < kFitParams; ++i)
    for (int j = 0; j < kFitParams; ++j) {
      c(i, j) = covariance[i][j];
      scale = std::max(scale, std::abs(covariance[i][j]));
    }
  if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, scale))
    throw std::invalid_argument("FitModel: covariance not symmetric");
  Eigen::SelfAdjointEigenSolver<RMat> es(c);
  if (es.eigenvalues().minCoeff() < -1e-9 * std::max(1.0, scale))
    throw std::invalid_argument("FitModel: covariance not positive semidefinite");
}

std::array<cplx, kTones> solve_amplitudes(const MagnetizationSeries& series, const std::array<double, kTones>& omegas,
                                          double gamma) {
  const auto p = project(design(series.u_grid, omegas, gamma), to_vector(series.samples));
  return {p.alpha(0), p.alpha(1), p.alpha(2), p.alpha(3)};
}

FitModel fit_model(const MagnetizationSeries& series, const std::array<double, kTones>& init_omegas,
                   double init_gamma, const FitOptions& opts) {
  series.validate();
  const auto& u = series.u_grid;
  const Eigen::Index n = static_cast<Eigen::Index>(u.size());
  if (2 * n <= kFitParams) throw std::invalid_argument("fit_model: too few samples for the " + std::to_string(kFitParams) + "-parameter fit");
  if (min_separation(init_omegas) < 1e-9) throw std::invalid_argument("fit_model: initial omegas are not distinct");
  if (!std::isfinite(init_gamma)) throw std::invalid_argument("fit_model: non-finite initial gamma");

  const CVec y = to_vector(series.samples);
  constexpr int kNl = 1 + kTones;
  std::array<double, kTones> omegas = init_omegas;
  double gamma = init_gamma;
  const double min_sep = 1e-3 / std::max(series.spacing() * static_cast<double>(n), 1e-300);

  Projection cur = project(design(u, omegas, gamma), y);
  double lambda = 1e-3;
  bool converged = cur.cost == 0.0;
  int iter = 0;

  auto snapshot = [&](const Projection& p, int iters) {
    FitModel m;
    m.gamma = gamma;
    for (int k = 0; k < kTones; ++k) m.tones[k] = {omegas[k], p.alpha(k)};
    m.residual_rms = std::sqrt(p.cost / static_cast<double>(n));
    m.iterations = iters;
    m.samples = static_cast<int>(n);
    return m;
  };

  while (!converged && iter < opts.max_iterations) {
    ++iter;
    const CMat phi = design(u, omegas, gamma);
    // Kaufman Jacobian: derivative of the model at fixed alpha, projected
    // onto the orthogonal complement of the design's range.
    CMat d(n, kNl);
    const CVec model = phi * cur.alpha;
    for (Eigen::Index j = 0; j < n; ++j) {
      d(j, 0) = -u[j] * model(j);
      for (int k = 0; k < kTones; ++k) d(j, 1 + k) = cplx(0.0, kTwoPi * u[j]) * phi(j, k) * cur.alpha(k);
    }
    d -= phi * cur.qr.solve(d);

    RMat jr(2 * n, kNl);
    jr.topRows(n) = d.real();
    jr.bottomRows(n) = d.imag();
    RVec r(2 * n);
    r.head(n) = cur.residual.real();
    r.tail(n) = cur.residual.imag();

    const RMat a = jr.transpose() * jr;
    const RVec g = jr.transpose() * r;
    const double dmax = a.diagonal().maxCoeff();
    RMat damped = a;
    for (int i = 0; i < kNl; ++i) damped(i, i) += lambda * std::max(a(i, i), 1e-12 * std::max(dmax, 1e-300));
    const RVec step = damped.ldlt().solve(-g);

    std::array<double, kTones> trial_omegas = omegas;
    for (int k = 0; k < kTones; ++k) trial_omegas[k] += step(1 + k);
    const double trial_gamma = gamma + step(0);

    bool accepted = false;
    if (step.allFinite() && min_separation(trial_omegas) > min_sep) {
      try {
        Projection trial = project(design(u, trial_omegas, trial_gamma), y);
        if (trial.cost < cur.cost) {
          const double rel = (cur.cost - trial.cost) / cur.cost;
          omegas = trial_omegas;
          gamma = trial_gamma;
          cur = std::move(trial);
          lambda = std::max(lambda / 10.0, 1e-12);
          accepted = true;
          if (rel < opts.rel_tolerance || cur.cost == 0.0) converged = true;
        }
      } catch (const std::invalid_argument&) {
        // rank-deficient trial point: treat as a rejected step
      }
    }
    if (!accepted) {
      lambda *= 10.0;
      if (lambda > 1e16) converged = true;  // no descent direction left at working precision
    }
  }

  if (!converged) throw FitError("fit_model: no convergence within " + std::to_string(opts.max_iterations) +
                                     " iterations (rms " + std::to_string(std::sqrt(cur.cost / n)) + ")",
                                 snapshot(cur, iter));

  FitModel m = snapshot(cur, iter);

  // Full Jacobian over all real parameters for the covariance.
  const CMat phi = design(u, omegas, gamma);
  const CVec model = phi * cur.alpha;
  CMat full(n, kFitParams);
  for (Eigen::Index j = 0; j < n; ++j) {
    full(j, 0) = -u[j] * model(j);
    for (int k = 0; k < kTones; ++k) {
      full(j, 1 + k) = cplx(0.0, kTwoPi * u[j]) * phi(j, k) * cur.alpha(k);
      full(j, 1 + kTones + 2 * k) = phi(j, k);
      full(j, 2 + kTones + 2 * k) = cplx(0.0, 1.0) * phi(j, k);
    }
  }
  RMat jr(2 * n, kFitParams);
  jr.topRows(n) = full.real();
  jr.bottomRows(n) = full.imag();
  const double s2 = cur.cost / static_cast<double>(2 * n - kFitParams);
  const RMat cov = s2 * pseudo_inverse_psd(jr.transpose() * jr);

  // Sort tones ascending and permute the covariance accordingly.
  std::array<int, kTones> order{};
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return omegas[a] < omegas[b]; });
  std::array<int, kFitParams> idx{};
  idx[0] = 0;
  for (int k = 0; k < kTones; ++k) {
    m.tones[k] = {omegas[order[k]], cur.alpha(order[k])};
    idx[1 + k] = 1 + order[k];
    idx[1 + kTones + 2 * k] = 1 + kTones + 2 * order[k];
    idx[2 + kTones + 2 * k] = 2 + kTones + 2 * order[k];
  }
  for (int i = 0; i < kFitParams; ++i)
    for (int j = 0; j < kFitParams; ++j) m.covariance[i][j] = 0.5 * (cov(idx[i], idx[j]) + cov(idx[j], idx[i]));
  return m;
}

ReconstructedDistribution distribution_from_fit(const FitModel& m) {
  cplx s = 0.0;
  for (const auto& t : m.tones) s += t.alpha;
  const double d = std::norm(s);
  if (std::sqrt(d) < 1e-12) throw std::domain_error("distribution_from_fit: amplitudes sum to zero");
  const double x = s.real(), y = s.imag();

  ReconstructedDistribution out;
  for (int k = 0; k < kTones; ++k) {
    const double ak = m.tones[k].alpha.real(), bk = m.tones[k].alpha.imag();
    const double num = ak * x + bk * y;
    // gradient of num / d with respect to (Re a_j, Im a_j)
    std::array<double, 2 * kTones> grad{};
    for (int j = 0; j < kTones; ++j) {
      const double delta = j == k ? 1.0 : 0.0;
      grad[2 * j] = (delta * x + ak) / d - num * 2.0 * x / (d * d);
      grad[2 * j + 1] = (delta * y + bk) / d - num * 2.0 * y / (d * d);
    }
    double var = 0.0;
    for (int i = 0; i < 2 * kTones; ++i)
      for (int j = 0; j < 2 * kTones; ++j) var += grad[i] * grad[j] * m.covariance[1 + kTones + i][1 + kTones + j];
    out.atoms[k] = {m.tones[k].omega, num / d, std::sqrt(std::max(0.0, m.covariance[1 + k][1 + k])),
                    std::sqrt(std::max(0.0, var))};
  }
  return out;
}

TransitionTable ConditionalEstimate::table() const {
  TransitionTable t;
  t.p0 = p0;
  for (int n = 0; n < 2; ++n) {
    if (!rows[n]) throw std::domain_error(std::string("conditionals: zero marginal for the ") +
                                          (n == 0 ? "ground" : "excited") + " initial state");
    t.pcond[n] = *rows[n];
  }
  return t;
}

namespace {

ConditionalEstimate conditionals_from_assignment(const ReconstructedDistribution& d,
                                                 const std::array<std::pair<int, int>, kTones>& label) {
  std::array<std::array<double, 2>, 2> joint{};
  for (int k = 0; k < kTones; ++k) joint[label[k].first][label[k].second] += d.atoms[k].prob;
  ConditionalEstimate est;
  const double m0 = joint[0][0] + joint[0][1];
  const double m1 = joint[1][0] + joint[1][1];
  const double total = m0 + m1;
  if (!(total > 0.0)) throw std::domain_error("conditionals: distribution has no weight");
  est.renormalization_residual = std::abs(total - 1.0);
  est.p0 = {m0 / total, m1 / total};
  constexpr double kZeroMarginal = 1e-9;
  for (int n = 0; n < 2; ++n) {
    const double mn = joint[n][0] + joint[n][1];
    if (mn > kZeroMarginal) est.rows[n] = std::array<double, 2>{joint[n][0] / mn, joint[n][1] / mn};
  }
  return est;
}

}  // namespace

ConditionalEstimate conditionals_from_distribution(const ReconstructedDistribution& d, const Spectrum& initial,
                                                   const Spectrum& final) {
  std::array<std::pair<int, int>, kTones> transitions = {{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  std::array<int, kTones> perm{0, 1, 2, 3};
  std::array<int, kTones> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int k = 0; k < kTones; ++k) {
      const auto [n, m] = transitions[perm[k]];
      c += std::abs(d.atoms[k].w - (final.energies[m] - initial.energies[n]));
    }
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::array<std::pair<int, int>, kTones> label{};
  for (int k = 0; k < kTones; ++k) label[k] = transitions[best[k]];
  return conditionals_from_assignment(d, label);
}

ConditionalEstimate conditionals_from_distribution(const ReconstructedDistribution& d) {
  for (int k = 1; k < kTones; ++k)
    if (d.atoms[k].w < d.atoms[k - 1].w) throw std::invalid_argument("conditionals: atoms not ascending in W");
  return conditionals_from_assignment(d, {{{1, 0}, {1, 1}, {0, 0}, {0, 1}}});
}

}  // namespace qwork
