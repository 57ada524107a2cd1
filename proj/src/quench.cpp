#include "qwork/quench.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qwork {

const char* direction_label(Direction d) { return d == Direction::Forward ? "F" : "B"; }

void QuenchProtocol::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(nu1)) throw std::invalid_argument("QuenchProtocol: nu1 must be positive");
  if (!positive(nu2)) throw std::invalid_argument("QuenchProtocol: nu2 must be positive");
  if (!positive(tau)) throw std::invalid_argument("QuenchProtocol: tau must be positive");
}

QuenchProtocol QuenchProtocol::reversed() const {
  QuenchProtocol r = *this;
  r.direction = direction == Direction::Forward ? Direction::Backward : Direction::Forward;
  return r;
}

QuenchProtocol QuenchProtocol::scaled(double s) const {
  QuenchProtocol r = *this;
  r.nu1 *= s;
  r.nu2 *= s;
  return r;
}

QuenchProtocol make_protocol(double nu1, double nu2, double tau, Direction d) {
  QuenchProtocol p{nu1, nu2, tau, d};
  p.validate();
  return p;
}

InverseTemperature InverseTemperature::finite(double beta) {
  if (!std::isfinite(beta) || beta < 0.0)
    throw std::invalid_argument("InverseTemperature: beta must be finite and >= 0");
  return InverseTemperature(beta, false);
}

InverseTemperature InverseTemperature::infinite() { return InverseTemperature(0.0, true); }

InverseTemperature InverseTemperature::from_kT(double kT) {
  if (std::isnan(kT) || kT < 0.0) throw std::invalid_argument("InverseTemperature: kT must be >= 0");
  if (kT == 0.0) return infinite();
  if (std::isinf(kT)) return zero();
  return finite(1.0 / kT);
}

double InverseTemperature::value() const {
  if (infinite_) throw std::domain_error("InverseTemperature: value of infinite beta requested");
  return beta_;
}

double InverseTemperature::kT() const {
  if (infinite_) return 0.0;
  if (beta_ == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / beta_;
}

namespace {

Mat2 forward_hamiltonian(double nu1, double nu2, double tau, double t) {
  const double nu = nu1 * (1.0 - t / tau) + nu2 * t / tau;
  const double angle = kPi * t / (2.0 * tau);
  return from_pauli({0.0, nu * std::sin(angle), nu * std::cos(angle), 0.0});
}

}  // namespace

Mat2 hamiltonian(const QuenchProtocol& p, double t) {
  if (!(t >= 0.0 && t <= p.tau)) throw std::invalid_argument("hamiltonian: t outside [0, tau]");
  if (p.direction == Direction::Forward) return forward_hamiltonian(p.nu1, p.nu2, p.tau, t);
  return forward_hamiltonian(p.nu1, p.nu2, p.tau, p.tau - t) * cplx(-1.0);
}

Spectrum eigensystem(const Mat2& h) {
  if (!is_hermitian(h, 1e-12)) throw std::invalid_argument("eigensystem: matrix is not Hermitian");
  const auto v = pauli_components(h);
  const double r = v.norm();
  if (r == 0.0) {
    return {{v.h0, v.h0}, {PureState<2>::basis(0), PureState<2>::basis(1)}};
  }
  // Eigenvector of n.sigma with eigenvalue +1 for the unit vector n = h / r.
  const double nx = v.hx / r, ny = v.hy / r, nz = v.hz / r;
  std::array<cplx, 2> up;
  std::array<cplx, 2> down;
  if (nz >= 0.0) {
    const double c = std::sqrt(0.5 * (1.0 + nz));
    up = {c, cplx(nx, ny) / (2.0 * c)};
    down = {-cplx(nx, -ny) / (2.0 * c), c};
  } else {
    const double s = std::sqrt(0.5 * (1.0 - nz));
    up = {cplx(nx, -ny) / (2.0 * s), s};
    down = {s, -cplx(nx, ny) / (2.0 * s)};
  }
  // Renormalize against roundoff so PureState accepts the vectors.
  auto normalize = [](std::array<cplx, 2> a) {
    const double n = std::sqrt(std::norm(a[0]) + std::norm(a[1]));
    return std::array<cplx, 2>{a[0] / n, a[1] / n};
  };
  return {{v.h0 - r, v.h0 + r}, {PureState<2>(normalize(down)), PureState<2>(normalize(up))}};
}

Mat2 propagator(const QuenchProtocol& p, int steps) {
  if (steps < 1) throw std::invalid_argument("propagator: steps must be >= 1");
  if (!(p.tau > 0.0)) throw std::invalid_argument("propagator: tau must be positive");
  const double dt = p.tau / steps;
  Mat2 u = Mat2::identity();
  for (int k = 0; k < steps; ++k) {
    const double tm = (k + 0.5) * dt;
    const auto h = pauli_components(hamiltonian(p, tm));
    const double phase = kTwoPi * dt;
    u = pauli_exp(phase * h.hx, phase * h.hy, phase * h.hz) * u;
  }
  return u;
}

PropagatorResult propagator_converged(const QuenchProtocol& p, double tol, int max_steps) {
  int steps = 64;
  Mat2 prev = propagator(p, steps);
  double change = 0.0;
  while (steps < max_steps) {
    steps *= 2;
    Mat2 next = propagator(p, steps);
    change = max_abs_diff(prev, next);
    prev = next;
    if (change < tol) return {prev, steps, change};
  }
  throw std::runtime_error("propagator: refinement did not converge");
}

Mat2 propagator(const QuenchProtocol& p) { return propagator_converged(p).unitary; }

double excited_population(const InverseTemperature& beta, double nu) {
  if (beta.is_infinite()) return 0.0;
  // 1 / (1 + exp(2 beta nu)) without overflow
  const double x = 2.0 * beta.value() * nu;
  if (x > 0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

Density2 gibbs(const QuenchProtocol& p, const InverseTemperature& beta) {
  const Spectrum s = eigensystem(hamiltonian(p, 0.0));
  const double nu = 0.5 * (s.energies[1] - s.energies[0]);
  const double p1 = excited_population(beta, nu);
  const Mat2 rho = s.eigenstates[0].projector() * cplx(1.0 - p1) + s.eigenstates[1].projector() * cplx(p1);
  return Density2(rho);
}

double temperature_from_population(double p1, double nu) {
  if (!(p1 > 0.0 && p1 < 1.0)) throw std::invalid_argument("temperature_from_population: p1 must lie in (0, 1)");
  if (!(nu > 0.0)) throw std::invalid_argument("temperature_from_population: nu must be positive");
  if (p1 > 0.5)
    throw std::domain_error("temperature_from_population: population inversion has no positive temperature");
  if (p1 == 0.5) return std::numeric_limits<double>::infinity();
  return 2.0 * nu / std::log((1.0 - p1) / p1);
}

}  // namespace qwork
