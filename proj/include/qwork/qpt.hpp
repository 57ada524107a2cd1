#pragma once

// Single-qubit process tomography in the chi representation and distance
// diagnostics between channels.

#include <array>

#include "qwork/tpm.hpp"

namespace qwork {

// Operator basis (i 1, X, Y, Z).
const std::array<Mat2, 4>& process_basis();

// E(rho) = sum_kl xi(k, l) s_k rho s_l^dagger over process_basis().
struct ProcessMatrix {
  Mat4 xi;

  // Throws std::invalid_argument unless the map is trace preserving and
  // Hermiticity preserving within tol.
  void validate(double tol = 1e-9) const;
  double imag_norm() const;  // max |Im xi(k, l)|
};

// Throws std::invalid_argument for an invalid process matrix or an output
// whose trace deviates from the input's beyond 1e-9.
Mat2 apply_process(const ProcessMatrix& xi, const Mat2& rho);
Density2 apply_process(const ProcessMatrix& xi, const Density2& rho);

// Linear inversion from the probes |0>, |1>, |+>, |+i>. Throws
// std::invalid_argument when the channel is not trace preserving on the
// probes or its response to further test states is not linear.
ProcessMatrix reconstruct(const Channel& channel);

Channel unitary_channel(const Mat2& u);
Channel process_channel(const ProcessMatrix& xi);
Channel depolarizing_channel(double p);
Channel amplitude_damping_channel(double p);

// Trace distance between E(1/2) and 1/2.
double unitality_deviation(const ProcessMatrix& xi);

// max over pure inputs of the trace distance between the two outputs:
// 2 degree grid on the Bloch sphere, then Nelder-Mead from the best point.
double worst_case_distance(const Channel& e1, const Channel& e2);

struct ChannelMetrics {
  double worst_case_distance = 0.0;
  double unitality_deviation = 0.0;
  double imag_norm = 0.0;
};

ChannelMetrics channel_metrics(const ProcessMatrix& measured, const Channel& ideal);

// max_{m,n} |p^B(n|m) - p^F(m|n)|
double microreversibility_deviation(const TransitionTable& forward, const TransitionTable& backward);

}  // namespace qwork
