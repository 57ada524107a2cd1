#pragma once

// Work-distribution reconstruction from a sampled characteristic function:
// periodogram, peak picking, damped four-tone fit, amplitude inversion.
//
// Model convention: M(u) = exp(-gamma u) sum_k alpha_k exp(+i 2 pi omega_k u),
// omega in kHz, u in ms, so a work atom at W contributes a tone at omega = W.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qwork/interferometer.hpp"
#include "qwork/quench.hpp"
#include "qwork/tpm.hpp"

namespace qwork {

inline constexpr int kTones = 4;
inline constexpr int kFitParams = 1 + kTones + 2 * kTones;  // gamma, omegas, Re/Im alphas

struct SpectrumBin {
  double freq = 0.0;   // kHz
  double power = 0.0;  // |X_k|^2 / n, so that sum(power) = sum |x|^2
};

// DFT of a uniform series over frequencies in (-rate/2, rate/2], ascending.
// Throws for a non-uniform grid or n < 8.
std::vector<SpectrumBin> periodogram(const MagnetizationSeries& series);

// k strongest local maxima (circular neighbourhood), refined by a parabola
// through the log-power of three bins, at least two bins apart, ascending.
// Throws when fewer than k maxima exist or k > n/4.
std::vector<double> pick_peaks(const std::vector<SpectrumBin>& spectrum, int k = kTones);

// Symmetric seed frequencies: the two strongest positive-frequency peaks of
// the zero-padded spectrum of Re(series), mirrored to +-. The real part is
// temperature independent, so all four tones are visible even when two of
// them carry no weight in the complex series.
std::array<double, kTones> seed_omegas(const MagnetizationSeries& series);

struct Tone {
  double omega = 0.0;  // kHz
  cplx alpha;
};

// Parameter order in the covariance: gamma, omega_1..4, Re a_1, Im a_1, ..., Re a_4, Im a_4.
using Covariance = std::array<std::array<double, kFitParams>, kFitParams>;

struct FitModel {
  double gamma = 0.0;  // 1/ms
  std::array<Tone, kTones> tones{};
  Covariance covariance{};
  double residual_rms = 0.0;  // sqrt(mean |sample - model|^2)
  int iterations = 0;
  int samples = 0;

  cplx evaluate(double u) const;
  // Throws if omegas are not ascending or the covariance is not symmetric PSD.
  void validate() const;
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, FitModel best) : std::runtime_error(what), best_(std::move(best)) {}
  const FitModel& best_so_far() const { return best_; }

 private:
  FitModel best_;
};

struct FitOptions {
  int max_iterations = 200;
  double rel_tolerance = 1e-12;
};

// Variable projection: exact linear solve for the amplitudes at fixed
// (omega, gamma), Levenberg-Marquardt on (omega, gamma).
FitModel fit_model(const MagnetizationSeries& series, const std::array<double, kTones>& init_omegas,
                   double init_gamma, const FitOptions& opts = {});

// Closed-form amplitude solve only (used for initial gamma scans and tests).
std::array<cplx, kTones> solve_amplitudes(const MagnetizationSeries& series, const std::array<double, kTones>& omegas,
                                          double gamma);

struct ReconstructedAtom {
  double w = 0.0;  // kHz
  double prob = 0.0;
  double sigma_w = 0.0;
  double sigma_prob = 0.0;
};

struct ReconstructedDistribution {
  std::array<ReconstructedAtom, kTones> atoms{};
};

// prob_k = Re(alpha_k e^{-i arg S}) / |S| with S = sum alpha; first-order
// uncertainty propagation from the fit covariance. Throws when S ~ 0.
ReconstructedDistribution distribution_from_fit(const FitModel& m);

struct ConditionalEstimate {
  std::array<double, 2> p0{};
  // Empty when the corresponding initial population is zero.
  std::array<std::optional<std::array<double, 2>>, 2> rows{};
  double renormalization_residual = 0.0;

  // Throws std::domain_error naming the missing row when a marginal is zero.
  TransitionTable table() const;
};

// Atoms are assigned to transitions (n, m) by nearest W = E_final[m] - E_initial[n].
ConditionalEstimate conditionals_from_distribution(const ReconstructedDistribution& d, const Spectrum& initial,
                                                   const Spectrum& final);
// Forward labelling with nu1 > nu2: ascending atoms are (1->0), (1->1), (0->0), (0->1).
ConditionalEstimate conditionals_from_distribution(const ReconstructedDistribution& d);

}  // namespace qwork
