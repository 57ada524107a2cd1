#pragma once

// Exact two-point-measurement statistics for the two-level quench.

#include <array>
#include <functional>
#include <vector>

#include "qwork/quench.hpp"

namespace qwork {

// Single-qubit channel as a black box.
using Channel = std::function<Mat2(const Mat2&)>;

struct TransitionTable {
  std::array<double, 2> p0{};                    // initial populations (ground, excited)
  std::array<std::array<double, 2>, 2> pcond{};  // pcond[n][m] = p(m at tau | n at 0)

  // Throws std::invalid_argument if the table is not normalized.
  void validate(double tol = 1e-12) const;
};

struct WorkAtom {
  double w = 0.0;     // kHz
  double prob = 0.0;
  int initial = 0;    // n
  int final = 0;      // m
};

// Four atoms ordered by ascending W.
struct DiscreteWorkDistribution {
  std::array<WorkAtom, 4> atoms{};
};

// pcond[n][m] = |<m(tau)|U|n(0)>|^2 with p0 from the Gibbs state.
// Throws for a non-unitary U.
TransitionTable transition_table(const QuenchProtocol& p, const InverseTemperature& beta, const Mat2& u);

// Same, for an arbitrary (possibly non-unitary) channel:
// pcond[n][m] = <m(tau)| E(|n(0)><n(0)|) |m(tau)>.
TransitionTable transition_table(const QuenchProtocol& p, const InverseTemperature& beta, const Channel& channel);

DiscreteWorkDistribution work_distribution(const TransitionTable& t, const Spectrum& initial, const Spectrum& final);

// Convenience: spectra of H(0) and H(tau) of the protocol.
DiscreteWorkDistribution work_distribution(const TransitionTable& t, const QuenchProtocol& p);

// sum_k prob_k exp(+i 2 pi W_k u), u in ms.
cplx chi_exact(const DiscreteWorkDistribution& d, double u);

// <exp(-beta W)>; throws std::domain_error for infinite beta.
double jarzynski_lhs(const DiscreteWorkDistribution& d, const InverseTemperature& beta);

struct FreeEnergy {
  double delta_f = 0.0;       // kHz
  double beta_delta_f = 0.0;  // ln(Z_0 / Z_tau); +inf for infinite beta when nu1 > nu2
};

// (1/beta) ln(cosh(beta nu_initial) / cosh(beta nu_final)), with the
// beta -> 0 and beta -> infinity limits returned exactly.
FreeEnergy delta_f_theory(const InverseTemperature& beta, double nu_initial, double nu_final);
FreeEnergy delta_f_theory(const InverseTemperature& beta, const QuenchProtocol& p);

// ln cosh(x), stable for large |x|.
double log_cosh(double x);

}  // namespace qwork
