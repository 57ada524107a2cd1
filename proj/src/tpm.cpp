#include "qwork/tpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qwork {

void TransitionTable::validate(double tol) const {
  auto in_unit = [tol](double v) { return v >= -tol && v <= 1.0 + tol; };
  if (!in_unit(p0[0]) || !in_unit(p0[1]) || std::abs(p0[0] + p0[1] - 1.0) > tol)
    throw std::invalid_argument("TransitionTable: initial populations are not normalized");
  for (const auto& row : pcond) {
    if (!in_unit(row[0]) || !in_unit(row[1]) || std::abs(row[0] + row[1] - 1.0) > tol)
      throw std::invalid_argument("TransitionTable: conditional row is not normalized");
  }
}

namespace {

std::array<double, 2> initial_populations(const InverseTemperature& beta, const Spectrum& s0) {
  const double nu = 0.5 * (s0.energies[1] - s0.energies[0]);
  const double p1 = excited_population(beta, nu);
  return {1.0 - p1, p1};
}

}  // namespace

TransitionTable transition_table(const QuenchProtocol& p, const InverseTemperature& beta, const Mat2& u) {
  if (!is_unitary(u, 1e-10)) throw std::invalid_argument("transition_table: propagator is not unitary");
  const Spectrum s0 = eigensystem(hamiltonian(p, 0.0));
  const Spectrum s1 = eigensystem(hamiltonian(p, p.tau));
  TransitionTable t;
  t.p0 = initial_populations(beta, s0);
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) t.pcond[n][m] = std::norm(matrix_element(s1.eigenstates[m], u, s0.eigenstates[n]));
  return t;
}

TransitionTable transition_table(const QuenchProtocol& p, const InverseTemperature& beta, const Channel& channel) {
  const Spectrum s0 = eigensystem(hamiltonian(p, 0.0));
  const Spectrum s1 = eigensystem(hamiltonian(p, p.tau));
  TransitionTable t;
  t.p0 = initial_populations(beta, s0);
  for (int n = 0; n < 2; ++n) {
    const Mat2 out = channel(s0.eigenstates[n].projector());
    for (int m = 0; m < 2; ++m) t.pcond[n][m] = matrix_element(s1.eigenstates[m], out, s1.eigenstates[m]).real();
  }
  return t;
}

DiscreteWorkDistribution work_distribution(const TransitionTable& t, const Spectrum& initial, const Spectrum& final) {
  DiscreteWorkDistribution d;
  std::size_t k = 0;
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m)
      d.atoms[k++] = {final.energies[m] - initial.energies[n], t.p0[n] * t.pcond[n][m], n, m};
  std::stable_sort(d.atoms.begin(), d.atoms.end(), [](const WorkAtom& a, const WorkAtom& b) { return a.w < b.w; });
  return d;
}

DiscreteWorkDistribution work_distribution(const TransitionTable& t, const QuenchProtocol& p) {
  return work_distribution(t, eigensystem(hamiltonian(p, 0.0)), eigensystem(hamiltonian(p, p.tau)));
}

cplx chi_exact(const DiscreteWorkDistribution& d, double u) {
  cplx s = 0.0;
  for (const auto& a : d.atoms) s += a.prob * std::polar(1.0, kTwoPi * a.w * u);
  return s;
}

double jarzynski_lhs(const DiscreteWorkDistribution& d, const InverseTemperature& beta) {
  if (beta.is_infinite()) throw std::domain_error("jarzynski_lhs: infinite beta");
  const double b = beta.value();
  double s = 0.0;
  for (const auto& a : d.atoms) s += a.prob * std::exp(-b * a.w);
  return s;
}

double log_cosh(double x) {
  const double ax = std::abs(x);
  return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
}

FreeEnergy delta_f_theory(const InverseTemperature& beta, double nu_initial, double nu_final) {
  if (beta.is_infinite()) {
    const double df = nu_initial - nu_final;
    const double bdf = df == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), df);
    return {df, bdf};
  }
  const double b = beta.value();
  if (b == 0.0) return {0.0, 0.0};
  const double bdf = log_cosh(b * nu_initial) - log_cosh(b * nu_final);
  return {bdf / b, bdf};
}

FreeEnergy delta_f_theory(const InverseTemperature& beta, const QuenchProtocol& p) {
  return delta_f_theory(beta, p.initial_half_gap(), p.final_half_gap());
}

}  // namespace qwork
