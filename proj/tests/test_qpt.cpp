#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qwork/interferometer.hpp"
#include "qwork/qpt.hpp"
#include "test_support.hpp"

using namespace qwork;
using qtest::Gen;

namespace {

Channel identity_channel() {
  return [](const Mat2& rho) { return rho; };
}

// Expansion coefficients of an operator in the process basis.
std::array<cplx, 4> coefficients(const Mat2& u) {
  std::array<cplx, 4> c{};
  for (int k = 0; k < 4; ++k) c[k] = (process_basis()[k].adjoint() * u).trace() * 0.5;
  return c;
}

Mat2 pure(const std::array<cplx, 2>& v) {
  Mat2 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = v[i] * std::conj(v[j]);
  return m;
}

double trace_distance(const Mat2& a, const Mat2& b) { return 0.5 * trace_norm_hermitian(a - b); }

// Rotation by angle about the unit axis n.
Mat2 rotation(double angle, double nx, double ny, double nz) {
  const Mat2 h = (pauli::x() * cplx(nx) + pauli::y() * cplx(ny) + pauli::z() * cplx(nz)) * cplx(0.5 * angle);
  return qtest::series_exp_minus_i(h);
}

}  // namespace

TEST_CASE("basis") {
  const auto& b = process_basis();
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      CHECK(std::abs((b[k].adjoint() * b[l]).trace() - (k == l ? cplx(2.0) : cplx(0.0))) < 1e-15);
}

TEST_CASE("unitary channels reconstruct to rank one") {
  Gen g(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat2 u = g.unitary<2>();
    const ProcessMatrix xi = reconstruct(unitary_channel(u));
    const auto c = coefficients(u);
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) CHECK(std::abs(xi.xi(k, l) - c[k] * std::conj(c[l])) < 1e-12);
    CHECK(std::abs(xi.xi.trace() - 1.0) < 1e-12);
    CHECK_NOTHROW(xi.validate());
  }
  const ProcessMatrix id = reconstruct(identity_channel());
  CHECK(std::abs(id.xi(0, 0) - 1.0) < 1e-15);
  CHECK(id.imag_norm() < 1e-15);
}

TEST_CASE("depolarizing channel has a diagonal process matrix") {
  for (double p : {0.0, 0.1, 0.5, 1.0}) {
    const ProcessMatrix xi = reconstruct(depolarizing_channel(p));
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) {
        const double expected = k != l ? 0.0 : (k == 0 ? 1.0 - 0.75 * p : 0.25 * p);
        CHECK(std::abs(xi.xi(k, l) - expected) < 1e-14);
      }
  }
  CHECK_THROWS_AS(depolarizing_channel(1.5), std::invalid_argument);
}

TEST_CASE("process application reproduces the channel on random states") {
  Gen g(3);
  const std::vector<Channel> channels = {unitary_channel(g.unitary<2>()), depolarizing_channel(0.3),
                                         amplitude_damping_channel(0.4),
                                         mixture_channel({g.unitary<2>(), g.unitary<2>(), g.unitary<2>()})};
  for (const auto& ch : channels) {
    const ProcessMatrix xi = reconstruct(ch);
    CHECK_NOTHROW(xi.validate());
    for (int i = 0; i < 30; ++i) {
      const Mat2 rho = g.density<2>();
      CHECK(max_abs_diff(apply_process(xi, rho), ch(rho)) < 1e-12);
      // Linearity beyond density matrices.
      const Mat2 x = g.matrix<2>();
      CHECK(max_abs_diff(apply_process(xi, x), ch(x)) < 1e-11);
    }
    // Complete positivity: the process matrix is positive semidefinite.
    CHECK(is_hermitian(xi.xi, 1e-12));
    for (int i = 0; i < 50; ++i) {
      const auto v = g.unit_vector<4>();
      cplx q = 0.0;
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) q += std::conj(v[k]) * xi.xi(k, l) * v[l];
      CHECK(q.real() > -1e-12);
    }
  }
}

TEST_CASE("reconstruction rejects maps that are not channels") {
  CHECK_THROWS_AS(reconstruct([](const Mat2& rho) { return rho * cplx(2.0); }), std::invalid_argument);
  // Purity-weighted renormalization agrees with the identity on pure probes only.
  CHECK_THROWS_AS(reconstruct([](const Mat2& rho) {
                    const Mat2 sq = rho * rho;
                    return sq * cplx(1.0 / sq.trace().real());
                  }),
                  std::invalid_argument);
  ProcessMatrix bad;
  bad.xi(0, 0) = 2.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(apply_process(bad, pauli::identity()), std::invalid_argument);
}

TEST_CASE("worst-case distance for rotations") {
  Gen g(5);
  for (int trial = 0; trial < 15; ++trial) {
    const double angle = g.uniform(0.0, 3.1);
    double ax = g.normal(), ay = g.normal(), az = g.normal();
    const double norm = std::sqrt(ax * ax + ay * ay + az * az);
    ax /= norm;
    ay /= norm;
    az /= norm;
    const double d = worst_case_distance(unitary_channel(rotation(angle, ax, ay, az)), identity_channel());
    CHECK(d == doctest::Approx(std::sin(0.5 * angle)).epsilon(1e-7));
  }
}

TEST_CASE("worst-case distance bounds brute-force sampling") {
  Gen g(6);
  for (int trial = 0; trial < 6; ++trial) {
    const Channel a = mixture_channel({g.unitary<2>(), g.unitary<2>()});
    const Channel b = amplitude_damping_channel(g.uniform(0.0, 0.5));
    double brute = 0.0;
    for (int i = 0; i < 4000; ++i) {
      const Mat2 rho = pure(g.unit_vector<2>());
      brute = std::max(brute, trace_distance(a(rho), b(rho)));
    }
    const double d = worst_case_distance(a, b);
    CHECK(d >= brute - 1e-12);
    CHECK(d <= brute + 5e-3);
  }
}

TEST_CASE("simple channel distances and unitality") {
  for (double p : {0.0, 0.2, 0.7}) {
    CHECK(worst_case_distance(depolarizing_channel(p), identity_channel()) == doctest::Approx(0.5 * p).epsilon(1e-9));
    CHECK(unitality_deviation(reconstruct(depolarizing_channel(p))) < 1e-14);
    CHECK(unitality_deviation(reconstruct(amplitude_damping_channel(p))) == doctest::Approx(0.5 * p).epsilon(1e-12));
  }
  Gen g(7);
  CHECK(unitality_deviation(reconstruct(mixture_channel({g.unitary<2>(), g.unitary<2>(), g.unitary<2>()}))) < 1e-13);
}

TEST_CASE("channel metrics") {
  Gen g(8);
  const Mat2 u = g.unitary<2>();
  const auto same = channel_metrics(reconstruct(unitary_channel(u)), unitary_channel(u));
  CHECK(same.worst_case_distance < 1e-7);
  CHECK(same.unitality_deviation < 1e-14);

  const auto damped = channel_metrics(reconstruct(amplitude_damping_channel(0.3)), identity_channel());
  CHECK(damped.unitality_deviation == doctest::Approx(0.15));
  CHECK(damped.worst_case_distance > 0.15);
}

TEST_CASE("quench channel tomography") {
  const QuenchProtocol f = make_protocol(2.5, 1.0, 0.1, Direction::Forward);
  const Mat2 u = propagator(f);
  const auto ideal = channel_metrics(reconstruct(unitary_channel(u)), unitary_channel(u));
  CHECK(ideal.worst_case_distance < 1e-7);

  NoiseModel noise;
  noise.rf_sigma = 0.05;
  const Channel noisy = mixture_channel(realized_process(f, u, noise, 4));
  const auto m = channel_metrics(reconstruct(noisy), unitary_channel(u));
  CHECK(m.worst_case_distance > 1e-3);
  CHECK(m.unitality_deviation < 1e-12);
}

TEST_CASE("microreversibility of forward and backward quenches") {
  const QuenchProtocol f = make_protocol(2.5, 1.0, 0.1, Direction::Forward);
  const QuenchProtocol b = make_protocol(2.5, 1.0, 0.1, Direction::Backward);
  const auto beta = InverseTemperature::from_kT(3.1);
  const auto tf = transition_table(f, beta, propagator(f));
  const auto tb = transition_table(b, beta, propagator(b));
  CHECK(microreversibility_deviation(tf, tb) < 1e-10);

  TransitionTable skewed = tb;
  skewed.pcond[0] = {skewed.pcond[0][0] + 0.01, skewed.pcond[0][1] - 0.01};
  CHECK(microreversibility_deviation(tf, skewed) == doctest::Approx(0.01).epsilon(1e-6));
}
