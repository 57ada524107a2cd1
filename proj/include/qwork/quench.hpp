#pragma once

// Driven two-level quench: Hamiltonians, propagators, spectra, thermal states.
//
// Unit ledger used throughout the library: energies are E/h in kHz, times in
// ms, so a constant Hamiltonian H accumulates the phase exp(-i 2 pi H t).
// Inverse temperatures are (k_B T / h)^-1 in 1/kHz.

#include <array>
#include <limits>

#include "qwork/qcore.hpp"

namespace qwork {

enum class Direction { Forward, Backward };

const char* direction_label(Direction d);  // "F" / "B"

struct QuenchProtocol {
  double nu1 = 2.5;  // kHz, initial amplitude of the forward ramp
  double nu2 = 1.0;  // kHz, final amplitude of the forward ramp
  double tau = 0.1;  // ms
  Direction direction = Direction::Forward;

  // Throws std::invalid_argument unless nu1, nu2, tau are positive and finite.
  void validate() const;

  // Half-gap of H(0) and H(tau) respectively.
  double initial_half_gap() const { return direction == Direction::Forward ? nu1 : nu2; }
  double final_half_gap() const { return direction == Direction::Forward ? nu2 : nu1; }

  QuenchProtocol reversed() const;
  // Same protocol with the drive amplitude multiplied by `s` (rf miscalibration).
  QuenchProtocol scaled(double s) const;
};

QuenchProtocol make_protocol(double nu1, double nu2, double tau, Direction d);

// Inverse temperature in 1/kHz with exact representations of beta = 0
// (maximally mixed) and beta = infinity (ground state).
class InverseTemperature {
 public:
  static InverseTemperature finite(double beta);
  static InverseTemperature zero() { return finite(0.0); }
  static InverseTemperature infinite();
  // kT/h in kHz; 0 maps to infinite beta and +inf to beta = 0.
  static InverseTemperature from_kT(double kT_khz);

  bool is_infinite() const { return infinite_; }
  bool is_zero() const { return !infinite_ && beta_ == 0.0; }
  // Throws std::domain_error when infinite.
  double value() const;
  // kT/h in kHz (+inf for beta = 0, 0 for infinite beta).
  double kT() const;

 private:
  InverseTemperature(double b, bool inf) : beta_(b), infinite_(inf) {}
  double beta_ = 0.0;
  bool infinite_ = false;
};

struct Spectrum {
  std::array<double, 2> energies;          // ascending: ground, excited
  std::array<PureState<2>, 2> eigenstates;  // matching order
};

// Quench Hamiltonian at time t in [0, tau], in kHz.
Mat2 hamiltonian(const QuenchProtocol& p, double t);

// Throws std::invalid_argument for non-Hermitian input.
Spectrum eigensystem(const Mat2& h);

// Ordered product of midpoint-rule slices exp(-i 2 pi H(t_mid) dt).
Mat2 propagator(const QuenchProtocol& p, int steps);

struct PropagatorResult {
  Mat2 unitary;
  int steps = 0;
  double last_change = 0.0;  // max-entry change at the final doubling
};

// Doubles the slice count from 64 until successive refinements agree to 1e-12.
PropagatorResult propagator_converged(const QuenchProtocol& p, double tol = 1e-12, int max_steps = 1 << 24);
Mat2 propagator(const QuenchProtocol& p);

// exp(-beta H(0)) / Z built in the eigenbasis of H(0).
Density2 gibbs(const QuenchProtocol& p, const InverseTemperature& beta);

// Excited-state population of a two-level system with half-gap `nu`.
double excited_population(const InverseTemperature& beta, double nu);

// kT/h = 2 nu / ln((1 - p1) / p1); +inf at p1 = 1/2.
// Throws for p1 outside (0, 1/2].
double temperature_from_population(double p1, double nu);

}  // namespace qwork
