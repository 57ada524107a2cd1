#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <limits>

#include "qwork/qcore.hpp"
#include "test_support.hpp"

using namespace qwork;
using qtest::Gen;

namespace {

Mat2 from_bloch(double x, double y, double z) {
  return (pauli::identity() + pauli::x() * cplx(x) + pauli::y() * cplx(y) + pauli::z() * cplx(z)) * cplx(0.5);
}

}  // namespace

TEST_CASE("pauli_exp special values") {
  CHECK(max_abs_diff(pauli_exp(0, 0, 0), Mat2::identity()) == 0.0);
  CHECK(max_abs_diff(pauli_exp(kPi / 2, 0, 0), pauli::x() * cplx(0, -1)) < 1e-15);
  CHECK(max_abs_diff(pauli_exp(0, 0, kPi), Mat2::identity() * cplx(-1)) < 1e-15);
}

TEST_CASE("pauli_exp matches the power series and stays unitary") {
  Gen g(11);
  for (int i = 0; i < 300; ++i) {
    const double scale = i < 100 ? 1e-6 : (i < 200 ? 1.0 : 20.0);
    const double a = scale * g.normal(), b = scale * g.normal(), c = scale * g.normal();
    const Mat2 u = pauli_exp(a, b, c);
    const Mat2 gen = pauli::x() * cplx(a) + pauli::y() * cplx(b) + pauli::z() * cplx(c);
    CHECK(max_abs_diff(u, qtest::series_exp_minus_i(gen)) < 1e-12);
    CHECK(is_unitary(u, 1e-12));
  }
}

TEST_CASE("pauli_exp rejects non-finite input") {
  CHECK_THROWS_AS(pauli_exp(std::numeric_limits<double>::quiet_NaN(), 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(pauli_exp(0, std::numeric_limits<double>::infinity(), 0), std::invalid_argument);
}

TEST_CASE("tensor products") {
  CHECK(tensor(Mat2::identity(), Mat2::identity()) == Mat4::identity());
  CHECK(max_abs_diff(tensor(pauli::projector(0), Mat2::identity()) + tensor(pauli::projector(1), Mat2::identity()),
                     Mat4::identity()) == 0.0);
  const Mat4 zz = tensor(pauli::z(), pauli::z());
  const std::array<double, 4> diag = {1, -1, -1, 1};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) CHECK(zz(i, j) == cplx(i == j ? diag[i] : 0.0));

  Gen g(3);
  for (int i = 0; i < 50; ++i) {
    const Mat2 a = g.matrix<2>(), b = g.matrix<2>(), c = g.matrix<2>();
    const cplx s = g.complex_normal();
    CHECK(max_abs_diff(tensor(a * s, b), tensor(a, b) * s) < 1e-13);
    CHECK(max_abs_diff(tensor(a, b * s), tensor(a, b) * s) < 1e-13);
    CHECK(max_abs_diff(tensor(a, b + c), tensor(a, b) + tensor(a, c)) < 1e-13);
    CHECK(max_abs_diff(tensor(a + c, b), tensor(a, b) + tensor(c, b)) < 1e-13);
    // mixed-product rule
    const Mat2 d = g.matrix<2>();
    CHECK(max_abs_diff(tensor(a, b) * tensor(c, d), tensor(a * c, b * d)) < 1e-12);
  }
}

TEST_CASE("partial trace over the system") {
  Gen g(5);
  const Mat2 ra = g.density<2>(), rs = g.density<2>();
  const Density2 reduced = partial_trace_system(Density4(tensor(ra, rs)));
  CHECK(max_abs_diff(reduced.matrix(), ra) < 1e-14);

  // (|00> + |11>)/sqrt2
  const double h = 1.0 / std::sqrt(2.0);
  const PureState<4> bell({h, 0.0, 0.0, h});
  CHECK(max_abs_diff(partial_trace_system(Density4::from_pure(bell)).matrix(), Mat2::identity() * cplx(0.5)) < 1e-15);

  for (int i = 0; i < 50; ++i) {
    const Mat4 rho = g.density<4>();
    Mat2 oracle;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int s = 0; s < 2; ++s) oracle(a, b) += rho(2 * a + s, 2 * b + s);
    const Density2 r = partial_trace_system(Density4(rho));
    CHECK(max_abs_diff(r.matrix(), oracle) < 1e-14);
    CHECK(std::abs(r.matrix().trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("trace distance") {
  Gen g(7);
  const Density2 r0 = Density2::from_pure(PureState<2>::basis(0));
  const Density2 r1 = Density2::from_pure(PureState<2>::basis(1));
  CHECK(trace_distance(r0, r0) == doctest::Approx(0.0));
  CHECK(trace_distance(r0, r1) == doctest::Approx(1.0).epsilon(1e-14));

  for (int i = 0; i < 100; ++i) {
    std::array<double, 3> v1{}, v2{};
    for (auto* v : {&v1, &v2}) {
      double n = 0;
      for (auto& x : *v) {
        x = g.normal();
        n += x * x;
      }
      const double len = g.uniform() / std::sqrt(n);
      for (auto& x : *v) x *= len;
    }
    const double bloch = 0.5 * std::sqrt((v1[0] - v2[0]) * (v1[0] - v2[0]) + (v1[1] - v2[1]) * (v1[1] - v2[1]) +
                                         (v1[2] - v2[2]) * (v1[2] - v2[2]));
    const Density2 a(from_bloch(v1[0], v1[1], v1[2])), b(from_bloch(v2[0], v2[1], v2[2]));
    CHECK(trace_distance(a, b) == doctest::Approx(bloch).epsilon(1e-12));
  }

  for (int i = 0; i < 100; ++i) {
    const Density4 a(g.density<4>()), b(g.density<4>()), c(g.density<4>());
    const double ab = trace_distance(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0 + 1e-12);
    CHECK(ab == doctest::Approx(trace_distance(b, a)).epsilon(1e-12));
    CHECK(ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12);
    const Mat4 u = g.unitary<4>();
    CHECK(std::abs(trace_distance(a.evolved(u), b.evolved(u)) - ab) < 1e-12);
  }
}

TEST_CASE("Hermitian eigenvalues agree with a library eigensolver") {
  Gen g(13);
  for (int i = 0; i < 100; ++i) {
    const Mat4 h = g.hermitian<4>();
    Eigen::Matrix4cd e;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) e(r, c) = h(r, c);
    const Eigen::Vector4d ref = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd>(e).eigenvalues();
    const auto ev = hermitian_eigenvalues(h);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(ev[k] - ref(k)) < 1e-12);
  }
  // 2x2 closed form against the characteristic polynomial roots
  for (int i = 0; i < 100; ++i) {
    const Mat2 h = g.hermitian<2>();
    const double tr = h.trace().real();
    const double det = (h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0)).real();
    const double disc = std::sqrt(tr * tr - 4 * det);
    const auto ev = hermitian_eigenvalues(h);
    CHECK(ev[0] == doctest::Approx((tr - disc) / 2).epsilon(1e-12));
    CHECK(ev[1] == doctest::Approx((tr + disc) / 2).epsilon(1e-12));
  }
}

TEST_CASE("state validation") {
  CHECK_THROWS_AS(PureState<2>({1.0, 1.0}), std::invalid_argument);
  CHECK_NOTHROW(PureState<2>({1.0, 0.0}));
  Mat2 not_herm;
  not_herm(0, 0) = 1.0;
  not_herm(0, 1) = 0.1;
  CHECK_THROWS_AS(Density2{not_herm}, std::invalid_argument);
  CHECK_THROWS_AS(Density2{Mat2::identity()}, std::invalid_argument);
  // trace one, eigenvalues 1.5 and -0.5
  CHECK_THROWS_AS(Density2(from_bloch(0, 0, 2.0)), std::invalid_argument);
  CHECK_NOTHROW(Density2(from_bloch(0, 0, 1.0)));
  CHECK(Density2::maximally_mixed().expectation(pauli::z()) == 0.0);
}
