#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "qwork/quench.hpp"
#include "test_support.hpp"

using namespace qwork;
using qtest::Gen;

namespace {

const QuenchProtocol kForward = make_protocol(2.5, 1.0, 0.1, Direction::Forward);
const QuenchProtocol kBackward = make_protocol(2.5, 1.0, 0.1, Direction::Backward);

double overlap_sq(const PureState<2>& a, const PureState<2>& b) { return std::norm(a.inner(b)); }

}  // namespace

TEST_CASE("protocol validation") {
  CHECK_THROWS_AS(make_protocol(0.0, 1.0, 0.1, Direction::Forward), std::invalid_argument);
  CHECK_THROWS_AS(make_protocol(2.5, -1.0, 0.1, Direction::Forward), std::invalid_argument);
  CHECK_THROWS_AS(make_protocol(2.5, 1.0, 0.0, Direction::Forward), std::invalid_argument);
  CHECK_THROWS_AS(make_protocol(2.5, 1.0, std::numeric_limits<double>::infinity(), Direction::Forward),
                  std::invalid_argument);
}

TEST_CASE("hamiltonian endpoints") {
  CHECK(max_abs_diff(hamiltonian(kForward, 0.0), pauli::y() * cplx(2.5)) < 1e-15);
  CHECK(max_abs_diff(hamiltonian(kForward, 0.1), pauli::x() * cplx(1.0)) < 1e-15);
  CHECK(max_abs_diff(hamiltonian(kBackward, 0.0), pauli::x() * cplx(-1.0)) < 1e-15);
  CHECK(max_abs_diff(hamiltonian(kBackward, 0.1), pauli::y() * cplx(-2.5)) < 1e-15);
  CHECK_THROWS_AS(hamiltonian(kForward, -1e-9), std::invalid_argument);
  CHECK_THROWS_AS(hamiltonian(kForward, 0.1 + 1e-9), std::invalid_argument);
}

TEST_CASE("hamiltonian structure along the ramp") {
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.1 * i / 100.0;
    const Mat2 h = hamiltonian(kForward, t);
    CHECK(is_hermitian(h, 1e-15));
    CHECK(std::abs(h.trace()) < 1e-15);
    const double nu = 2.5 * (1 - t / 0.1) + 1.0 * t / 0.1;
    const auto ev = hermitian_eigenvalues(h);
    CHECK(ev[0] == doctest::Approx(-nu).epsilon(1e-13));
    CHECK(ev[1] == doctest::Approx(nu).epsilon(1e-13));
    CHECK(max_abs_diff(hamiltonian(kBackward, t), hamiltonian(kForward, 0.1 - t) * cplx(-1)) < 1e-14);
  }
}

TEST_CASE("eigensystem") {
  const Spectrum sy = eigensystem(pauli::y() * cplx(2.5));
  CHECK(sy.energies[0] == doctest::Approx(-2.5));
  CHECK(sy.energies[1] == doctest::Approx(2.5));

  const Spectrum sz = eigensystem(pauli::z());
  CHECK(sz.energies[0] == doctest::Approx(-1.0));
  CHECK(overlap_sq(sz.eigenstates[0], PureState<2>::basis(1)) == doctest::Approx(1.0));
  CHECK(overlap_sq(sz.eigenstates[1], PureState<2>::basis(0)) == doctest::Approx(1.0));

  Mat2 bad;
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(eigensystem(bad), std::invalid_argument);

  Gen g(21);
  for (int i = 0; i < 200; ++i) {
    Mat2 h = g.hermitian<2>();
    if (i % 4 == 0) h(0, 1) = h(1, 0) = 0.0;  // already diagonal
    const Spectrum s = eigensystem(h);
    const double tr = h.trace().real();
    const double det = (h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0)).real();
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det));
    CHECK(s.energies[0] == doctest::Approx((tr - disc) / 2).epsilon(1e-12));
    CHECK(s.energies[1] == doctest::Approx((tr + disc) / 2).epsilon(1e-12));
    CHECK(std::abs(s.eigenstates[0].inner(s.eigenstates[1])) < 1e-12);
    for (int k = 0; k < 2; ++k) {
      const auto hv = qwork::apply(h, s.eigenstates[k].amplitudes());
      double res = 0.0;
      for (int j = 0; j < 2; ++j) res += std::norm(hv[j] - s.energies[k] * s.eigenstates[k][j]);
      CHECK(std::sqrt(res) < 1e-10);
    }
  }
}

TEST_CASE("propagator of a vanishing drive is the identity") {
  QuenchProtocol zero;
  zero.nu1 = zero.nu2 = 0.0;
  CHECK(max_abs_diff(propagator(zero, 64), Mat2::identity()) == 0.0);
}

TEST_CASE("propagator is unitary at every refinement and converges at second order") {
  double prev_diff = 0.0;
  Mat2 prev = propagator(kForward, 64);
  for (int steps = 128; steps <= 8192; steps *= 2) {
    const Mat2 u = propagator(kForward, steps);
    CHECK(is_unitary(u, 1e-12));
    const double diff = max_abs_diff(u, prev);
    if (prev_diff > 0.0) CHECK(prev_diff / diff > 3.5);
    prev_diff = diff;
    prev = u;
  }
}

TEST_CASE("converged propagator matches an RK4 integration") {
  const PropagatorResult r = propagator_converged(kForward);
  CHECK(r.last_change < 1e-12);
  CHECK(is_unitary(r.unitary, 1e-12));
  CHECK(max_abs_diff(r.unitary, qtest::rk4_propagator(kForward, 100000)) < 1e-8);
}

TEST_CASE("backward propagator is the adjoint of the forward one") {
  CHECK(max_abs_diff(propagator(kBackward), propagator(kForward).adjoint()) < 1e-11);
}

TEST_CASE("sudden limit gives equal transition probabilities") {
  const QuenchProtocol p = make_protocol(2.5, 1.0, 1e-6, Direction::Forward);
  const Mat2 u = propagator(p);
  const Spectrum s0 = eigensystem(hamiltonian(p, 0.0));
  const Spectrum s1 = eigensystem(hamiltonian(p, p.tau));
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m)
      CHECK(std::norm(matrix_element(s1.eigenstates[m], u, s0.eigenstates[n])) == doctest::Approx(0.5).epsilon(1e-4));
}

TEST_CASE("initial gaps of the two directions") {
  const Spectrum f = eigensystem(hamiltonian(kForward, 0.0));
  const Spectrum b = eigensystem(hamiltonian(kBackward, 0.0));
  CHECK(f.energies[1] - f.energies[0] == doctest::Approx(5.0));
  CHECK(b.energies[1] - b.energies[0] == doctest::Approx(2.0));
  CHECK(kForward.initial_half_gap() == 2.5);
  CHECK(kBackward.initial_half_gap() == 1.0);
}

TEST_CASE("inverse temperature representation") {
  CHECK(InverseTemperature::from_kT(0.0).is_infinite());
  CHECK(InverseTemperature::from_kT(std::numeric_limits<double>::infinity()).is_zero());
  CHECK(InverseTemperature::from_kT(2.0).value() == doctest::Approx(0.5));
  CHECK_THROWS_AS(InverseTemperature::infinite().value(), std::domain_error);
  CHECK_THROWS_AS(InverseTemperature::finite(-1.0), std::invalid_argument);
}

TEST_CASE("gibbs states") {
  CHECK(max_abs_diff(gibbs(kForward, InverseTemperature::zero()).matrix(), Mat2::identity() * cplx(0.5)) < 1e-15);

  const Spectrum s0 = eigensystem(hamiltonian(kForward, 0.0));
  const Density2 ground = gibbs(kForward, InverseTemperature::infinite());
  CHECK(max_abs_diff(ground.matrix(), s0.eigenstates[0].projector()) < 1e-14);

  const Density2 warm = gibbs(kForward, InverseTemperature::from_kT(2.0));
  const double excited = matrix_element(s0.eigenstates[1], warm.matrix(), s0.eigenstates[1]).real();
  CHECK(excited == doctest::Approx(1.0 / (1.0 + std::exp(2.5))).epsilon(1e-12));
  CHECK(excited == doctest::Approx(0.076).epsilon(0.01));

  for (double kT : {0.1, 1.0, 1.9, 3.1, 6.0, 100.0}) {
    for (const auto& p : {kForward, kBackward}) {
      const Mat2 rho = gibbs(p, InverseTemperature::from_kT(kT)).matrix();
      const Mat2 h = hamiltonian(p, 0.0);
      CHECK(max_abs_diff(rho * h, h * rho) < 1e-12);
    }
  }
}

TEST_CASE("temperature from excited population") {
  CHECK(temperature_from_population(0.07, 2.5) == doctest::Approx(1.933).epsilon(1e-3));
  CHECK(temperature_from_population(0.25, 1.0) == doctest::Approx(2.0 / std::log(3.0)).epsilon(1e-12));
  CHECK(temperature_from_population(0.16, 2.5) == doctest::Approx(3.015).epsilon(1e-3));
  CHECK(temperature_from_population(0.34, 1.0) == doctest::Approx(3.015).epsilon(1e-3));
  CHECK(std::isinf(temperature_from_population(0.5, 1.0)));
  CHECK_THROWS_AS(temperature_from_population(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(temperature_from_population(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(temperature_from_population(0.6, 1.0), std::domain_error);

  // inverse of the Boltzmann population
  for (double kT : {0.5, 1.9, 3.1, 6.0, 40.0})
    CHECK(temperature_from_population(excited_population(InverseTemperature::from_kT(kT), 2.5), 2.5) ==
          doctest::Approx(kT).epsilon(1e-10));
}
