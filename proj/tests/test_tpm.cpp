#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qwork/tpm.hpp"
#include "test_support.hpp"

using namespace qwork;

namespace {

const QuenchProtocol kF = make_protocol(2.5, 1.0, 0.1, Direction::Forward);
const QuenchProtocol kB = make_protocol(2.5, 1.0, 0.1, Direction::Backward);

const Mat2& u_forward() {
  static const Mat2 u = propagator(kF);
  return u;
}
const Mat2& u_backward() {
  static const Mat2 u = propagator(kB);
  return u;
}

Spectrum initial_spectrum(const QuenchProtocol& p) { return eigensystem(hamiltonian(p, 0.0)); }
Spectrum final_spectrum(const QuenchProtocol& p) { return eigensystem(hamiltonian(p, p.tau)); }

std::vector<InverseTemperature> finite_betas() {
  std::vector<InverseTemperature> b = {InverseTemperature::zero()};
  for (double kT : {0.3, 1.0, 1.9, 3.1, 6.0, 50.0}) b.push_back(InverseTemperature::from_kT(kT));
  return b;
}

}  // namespace

TEST_CASE("adiabatic map gives an identity transition table") {
  const Spectrum s0 = initial_spectrum(kF), s1 = final_spectrum(kF);
  Mat2 u;  // sum_n |n(tau)><n(0)|
  for (int n = 0; n < 2; ++n) {
    Mat2 outer;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) outer(r, c) = s1.eigenstates[n][r] * std::conj(s0.eigenstates[n][c]);
    u += outer;
  }
  const TransitionTable t = transition_table(kF, InverseTemperature::from_kT(1.9), u);
  CHECK(t.pcond[0][0] == doctest::Approx(1.0));
  CHECK(t.pcond[1][1] == doctest::Approx(1.0));
  CHECK(t.pcond[0][1] == doctest::Approx(0.0));
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("transition table rejects a non-unitary propagator") {
  CHECK_THROWS_AS(transition_table(kF, InverseTemperature::zero(), Mat2::identity() * cplx(1.01)),
                  std::invalid_argument);
}

TEST_CASE("sudden limit") {
  const QuenchProtocol p = make_protocol(2.5, 1.0, 1e-6, Direction::Forward);
  const TransitionTable t = transition_table(p, InverseTemperature::zero(), propagator(p));
  for (const auto& row : t.pcond)
    for (double v : row) CHECK(v == doctest::Approx(0.5).epsilon(1e-4));
  const auto d = work_distribution(t, p);
  for (const auto& a : d.atoms) CHECK(a.prob == doctest::Approx(0.25).epsilon(1e-4));

  const auto d0 = work_distribution(transition_table(p, InverseTemperature::infinite(), propagator(p)), p);
  for (double u : {0.0, 0.013, 0.21, 1.7}) {
    const cplx expected = 0.5 * (std::polar(1.0, kTwoPi * 3.5 * u) + std::polar(1.0, kTwoPi * 1.5 * u));
    CHECK(std::abs(chi_exact(d0, u) - expected) < 1e-4);
  }
}

TEST_CASE("ground-state table against the RK4 propagator") {
  const TransitionTable t = transition_table(kF, InverseTemperature::infinite(), u_forward());
  CHECK(t.p0[0] == 1.0);
  CHECK(t.p0[1] == 0.0);
  const Mat2 rk = qtest::rk4_propagator(kF, 100000);
  const TransitionTable oracle = transition_table(kF, InverseTemperature::infinite(), rk);
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) CHECK(std::abs(t.pcond[n][m] - oracle.pcond[n][m]) < 1e-8);
}

TEST_CASE("work atoms and their labels") {
  const InverseTemperature beta = InverseTemperature::from_kT(1.9);
  const TransitionTable t = transition_table(kF, beta, u_forward());
  const auto d = work_distribution(t, kF);
  const std::array<double, 4> w = {-3.5, -1.5, 1.5, 3.5};
  const std::array<std::pair<int, int>, 4> labels = {{{1, 0}, {1, 1}, {0, 0}, {0, 1}}};
  double total = 0.0;
  for (int k = 0; k < 4; ++k) {
    CHECK(d.atoms[k].w == doctest::Approx(w[k]).epsilon(1e-13));
    CHECK(d.atoms[k].initial == labels[k].first);
    CHECK(d.atoms[k].final == labels[k].second);
    CHECK(d.atoms[k].prob == doctest::Approx(t.p0[labels[k].first] * t.pcond[labels[k].first][labels[k].second]));
    total += d.atoms[k].prob;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const auto d0 = work_distribution(transition_table(kF, InverseTemperature::infinite(), u_forward()), kF);
  CHECK(d0.atoms[0].prob == 0.0);
  CHECK(d0.atoms[1].prob == 0.0);
  CHECK(d0.atoms[2].prob > 0.0);
  CHECK(d0.atoms[3].prob > 0.0);
}

TEST_CASE("characteristic function") {
  for (const auto& beta : finite_betas()) {
    const auto d = work_distribution(transition_table(kF, beta, u_forward()), kF);
    CHECK(std::abs(chi_exact(d, 0.0) - 1.0) < 1e-12);
    for (int i = 0; i < 50; ++i) CHECK(std::abs(chi_exact(d, 0.0417 * i)) <= 1.0 + 1e-12);
  }
  const auto d = work_distribution(transition_table(kF, InverseTemperature::zero(), u_forward()), kF);
  for (int i = 0; i < 50; ++i) CHECK(std::abs(chi_exact(d, 0.0417 * i).imag()) < 1e-12);
}

TEST_CASE("Jarzynski equality holds exactly for the unitary oracle") {
  for (const auto& p : {kF, kB}) {
    const Mat2 u = p.direction == Direction::Forward ? u_forward() : u_backward();
    for (const auto& beta : finite_betas()) {
      const auto d = work_distribution(transition_table(p, beta, u), p);
      const double rhs = std::exp(-delta_f_theory(beta, p).beta_delta_f);
      CHECK(std::abs(jarzynski_lhs(d, beta) / rhs - 1.0) < 1e-10);
    }
    const auto d = work_distribution(transition_table(p, InverseTemperature::zero(), u), p);
    CHECK(jarzynski_lhs(d, InverseTemperature::zero()) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(jarzynski_lhs(d, InverseTemperature::infinite()), std::domain_error);
  }
  DiscreteWorkDistribution single;
  single.atoms[0] = {0.7, 1.0, 0, 0};
  for (int k = 1; k < 4; ++k) single.atoms[k] = {1.0 + k, 0.0, 0, 0};
  CHECK(jarzynski_lhs(single, InverseTemperature::finite(0.4)) == doctest::Approx(std::exp(-0.4 * 0.7)));
}

TEST_CASE("free energy difference") {
  CHECK(delta_f_theory(InverseTemperature::zero(), kF).delta_f == 0.0);
  CHECK(delta_f_theory(InverseTemperature::finite(1e-8), kF).delta_f == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(delta_f_theory(InverseTemperature::infinite(), kF).delta_f == doctest::Approx(1.5));
  CHECK(std::isinf(delta_f_theory(InverseTemperature::infinite(), kF).beta_delta_f));
  CHECK(delta_f_theory(InverseTemperature::finite(200.0), kF).delta_f == doctest::Approx(1.5).epsilon(1e-12));
  const double direct = 1.9 * std::log(std::cosh(2.5 / 1.9) / std::cosh(1.0 / 1.9));
  CHECK(delta_f_theory(InverseTemperature::from_kT(1.9), kF).delta_f == doctest::Approx(direct).epsilon(1e-14));
  CHECK(direct == doctest::Approx(1.06).epsilon(0.01));
  CHECK(delta_f_theory(InverseTemperature::from_kT(1.9), kB).delta_f == doctest::Approx(-direct).epsilon(1e-14));
  CHECK(log_cosh(800.0) == doctest::Approx(800.0 - std::log(2.0)));
}

TEST_CASE("micro-reversibility and unital identities of the ideal tables") {
  const TransitionTable f = transition_table(kF, InverseTemperature::zero(), u_forward());
  const TransitionTable b = transition_table(kB, InverseTemperature::zero(), u_backward());
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) CHECK(std::abs(b.pcond[m][n] - f.pcond[n][m]) < 1e-10);
  for (const auto& t : {f, b}) {
    CHECK(std::abs(t.pcond[0][0] - t.pcond[1][1]) < 1e-10);
    CHECK(std::abs(t.pcond[0][1] - t.pcond[1][0]) < 1e-10);
  }
}

TEST_CASE("conditional probabilities do not depend on temperature") {
  const TransitionTable ref = transition_table(kF, InverseTemperature::zero(), u_forward());
  for (const auto& beta : finite_betas()) {
    const TransitionTable t = transition_table(kF, beta, u_forward());
    for (int n = 0; n < 2; ++n)
      for (int m = 0; m < 2; ++m) CHECK(t.pcond[n][m] == ref.pcond[n][m]);
  }
}

TEST_CASE("Crooks relation holds atom by atom") {
  for (const auto& beta : finite_betas()) {
    const auto df = work_distribution(transition_table(kF, beta, u_forward()), kF);
    const auto db = work_distribution(transition_table(kB, beta, u_backward()), kB);
    const double b = beta.value();
    const double dF = delta_f_theory(beta, kF).delta_f;
    for (const auto& a : df.atoms) {
      const auto it = std::find_if(db.atoms.begin(), db.atoms.end(),
                                   [&](const WorkAtom& x) { return std::abs(x.w + a.w) < 1e-9; });
      REQUIRE(it != db.atoms.end());
      CHECK(std::abs(std::log(a.prob / it->prob) - b * (a.w - dF)) < 1e-9);
    }
  }
}

TEST_CASE("channel form agrees with the unitary form") {
  const Mat2 u = u_forward();
  const Channel ch = [u](const Mat2& rho) { return u * rho * u.adjoint(); };
  const InverseTemperature beta = InverseTemperature::from_kT(3.1);
  const TransitionTable a = transition_table(kF, beta, u);
  const TransitionTable b = transition_table(kF, beta, ch);
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) CHECK(std::abs(a.pcond[n][m] - b.pcond[n][m]) < 1e-14);
}

TEST_CASE("table validation") {
  TransitionTable t;
  t.p0 = {0.6, 0.5};
  t.pcond = {{{1.0, 0.0}, {0.0, 1.0}}};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
  t.p0 = {0.5, 0.5};
  t.pcond[0] = {0.7, 0.7};
  CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}
