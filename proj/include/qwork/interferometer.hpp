#pragma once

// Ancilla-assisted reconstruction of the work characteristic function:
// the ideal circuit, its compilation into rf pulses and J-coupling
// evolutions, and a noisy ensemble simulator of that pulse sequence.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qwork/quench.hpp"
#include "qwork/tpm.hpp"

namespace qwork {

// Heteronuclear scalar coupling J in kHz.
inline constexpr double kJCouplingKhz = 0.2151;
inline constexpr int kEnsembleMembers = 256;

struct NoiseModel {
  double gamma_f = 0.0;        // 1/ms, envelope decay for the forward process
  double gamma_b = 0.0;        // 1/ms, envelope decay for the backward process
  double rf_sigma = 0.0;       // relative sd of the rf amplitude across the ensemble
  double c_dephasing = 0.0;    // system phase damping per coupling interval, in [0, 1]
  double readout_sigma = 0.0;  // sd of additive white noise per quadrature of each sample

  void validate() const;
  double gamma(Direction d) const { return d == Direction::Forward ? gamma_f : gamma_b; }
  bool is_noiseless() const {
    return gamma_f == 0.0 && gamma_b == 0.0 && rf_sigma == 0.0 && c_dephasing == 0.0 && readout_sigma == 0.0;
  }
};

// Ancilla projector |b><b| tensored with a system operator.
std::pair<Mat4, Mat4> conditional_gates(const QuenchProtocol& p, double u);

// H_A G2 (1 x U) G1 H_A for a given quench propagator.
Mat4 abstract_unitary(const QuenchProtocol& p, const Mat2& u_quench, double u);

// chi(u) = <Z_A> + i <Y_A> after the final ancilla Hadamard, which equals
// twice the ancilla coherence before it.
cplx ancilla_readout(const Mat4& rho);

cplx run_abstract(const QuenchProtocol& p, const InverseTemperature& beta, const Mat2& u_quench, double u);
cplx run_abstract(const QuenchProtocol& p, const InverseTemperature& beta, double u);

enum class Qubit { Ancilla, System };
enum class Axis { X, Y };

struct GateElement {
  enum class Kind { RfPulse, Coupling, Quench };

  Kind kind = Kind::RfPulse;
  std::string label;
  Qubit target = Qubit::System;  // pulses
  Axis axis = Axis::X;           // pulses
  double angle = 0.0;            // pulses, radians
  double duration = 0.0;         // couplings, ms
  Mat4 unitary;                  // nominal 4x4 action

  // Action with the rf amplitude scaled by `rf_scale`; quench elements
  // return the nominal embedding (the ensemble supplies scaled ones).
  Mat4 realized(double rf_scale) const;
};

struct GateSequence {
  QuenchProtocol protocol;
  double u = 0.0;          // ms
  double s_angle = 0.0;    // 2 pi nu1 u, the pulse-program angle
  Mat2 quench;             // nominal quench propagator
  std::vector<GateElement> elements;

  Mat4 total() const;
};

// x / y rotation exp(-i angle/2 sigma_axis).
Mat2 rf_rotation(Axis axis, double angle);
// exp(-i 2 pi J t Z x Z)
Mat4 coupling_evolution(double duration_ms);

// Pulse realizations (time order) of the basis changes used around the
// quench: (X + Z)/sqrt2 and (Y + Z)/sqrt2, each up to a global phase.
struct PulseSpec {
  Axis axis;
  double angle;
};
std::vector<PulseSpec> hadamard_xz_pulses();
std::vector<PulseSpec> hadamard_yz_pulses();
Mat2 realize_pulses(const std::vector<PulseSpec>& pulses, double rf_scale);

GateSequence compile_pulse_sequence(const QuenchProtocol& p, const Mat2& u_quench, double u);
GateSequence compile_pulse_sequence(const QuenchProtocol& p, double u);

// Per-member rf scale factors and the matching quench propagators.
class PulseEnsemble {
 public:
  PulseEnsemble(const QuenchProtocol& p, const Mat2& nominal_quench, double rf_sigma, std::uint64_t seed,
                int members = kEnsembleMembers);

  std::size_t size() const { return scales_.size(); }
  std::span<const double> scales() const { return scales_; }
  const Mat2& quench(std::size_t member) const { return quench_[member]; }

 private:
  std::vector<double> scales_;
  std::vector<Mat2> quench_;
};

// Slice count used for rf-scaled ensemble propagators.
inline constexpr int kEnsembleSlices = 8192;

cplx run_pulse_sequence(const GateSequence& seq, const InverseTemperature& beta, const NoiseModel& noise,
                        const PulseEnsemble& ensemble);
cplx run_pulse_sequence(const GateSequence& seq, const InverseTemperature& beta, const NoiseModel& noise,
                        std::uint64_t rng_seed);

struct SeriesMeta {
  QuenchProtocol protocol;
  InverseTemperature beta = InverseTemperature::zero();
  NoiseModel noise;
  std::uint64_t seed = 0;
  double rate_khz = 0.0;
  double s_angle_per_ms = 0.0;  // s = s_angle_per_ms * u
};

struct MagnetizationSeries {
  std::vector<double> u_grid;  // ms, uniform, ascending
  std::vector<cplx> samples;   // normalized so the ideal series is chi(u)
  SeriesMeta meta;

  // Throws unless the grid is strictly ascending and uniform.
  void validate() const;
  double spacing() const;
};

inline constexpr int kDefaultSamples = 360;
inline constexpr double kDefaultRateKhz = 17.9;

MagnetizationSeries sample_series(const QuenchProtocol& p, const InverseTemperature& beta, const NoiseModel& noise,
                                  int n = kDefaultSamples, double rate_khz = kDefaultRateKhz,
                                  std::uint64_t seed = 0);
// Variant reusing a precomputed nominal propagator.
MagnetizationSeries sample_series(const QuenchProtocol& p, const Mat2& u_quench, const InverseTemperature& beta,
                                  const NoiseModel& noise, int n, double rate_khz, std::uint64_t seed);

// Four-term ancilla magnetization in closed form (half of chi), with
// envelope exp(-gamma u).
cplx magnetization_closed_form(const TransitionTable& t, const QuenchProtocol& p, double u, double gamma);

// System-side operation between the two couplings as realized by the
// ensemble: frame change in, quench, frame change out, with rf-scaled pulses
// and drive, expressed in the frame of the ideal quench propagator.
std::vector<Mat2> realized_process(const QuenchProtocol& p, const Mat2& nominal_quench, const NoiseModel& noise,
                                   std::uint64_t seed);
Channel mixture_channel(std::vector<Mat2> unitaries);

// Seed derivation for independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qwork
