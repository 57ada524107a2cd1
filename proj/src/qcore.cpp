#include "qwork/qcore.hpp"

#include <algorithm>

namespace qwork {

namespace pauli {

Mat2 identity() { return Mat2::identity(); }

Mat2 x() {
  Mat2 m;
  m(0, 1) = 1.0;
  m(1, 0) = 1.0;
  return m;
}

Mat2 y() {
  Mat2 m;
  m(0, 1) = cplx(0.0, -1.0);
  m(1, 0) = cplx(0.0, 1.0);
  return m;
}

Mat2 z() {
  Mat2 m;
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

Mat2 zero_i() { return Mat2::identity() * cplx(0.0, 1.0); }

Mat2 projector(int b) {
  if (b != 0 && b != 1) throw std::invalid_argument("pauli::projector: bit must be 0 or 1");
  Mat2 m;
  m(b, b) = 1.0;
  return m;
}

}  // namespace pauli

PauliVector pauli_components(const Mat2& h) {
  PauliVector v;
  v.h0 = 0.5 * (h(0, 0) + h(1, 1)).real();
  v.hz = 0.5 * (h(0, 0) - h(1, 1)).real();
  v.hx = 0.5 * (h(0, 1) + h(1, 0)).real();
  v.hy = 0.5 * (h(1, 0) - h(0, 1)).imag();
  return v;
}

Mat2 from_pauli(const PauliVector& v) {
  Mat2 m;
  m(0, 0) = v.h0 + v.hz;
  m(1, 1) = v.h0 - v.hz;
  m(0, 1) = cplx(v.hx, -v.hy);
  m(1, 0) = cplx(v.hx, v.hy);
  return m;
}

Mat2 pauli_exp(double a, double b, double c) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c))
    throw std::invalid_argument("pauli_exp: non-finite coefficient");
  const double r = std::sqrt(a * a + b * b + c * c);
  if (r == 0.0) return Mat2::identity();
  const double cr = std::cos(r);
  const double s = std::sin(r) / r;
  // cos(r) 1 - i sin(r)/r (aX + bY + cZ)
  Mat2 m;
  m(0, 0) = cplx(cr, -s * c);
  m(1, 1) = cplx(cr, s * c);
  m(0, 1) = cplx(-s * b, -s * a);
  m(1, 0) = cplx(s * b, -s * a);
  return m;
}

Mat4 tensor(const Mat2& a, const Mat2& b) {
  Mat4 m;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 2; ++k)
        for (std::size_t l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return m;
}

std::array<double, 2> hermitian_eigenvalues(const Mat2& h) {
  const auto v = pauli_components(h);
  const double r = v.norm();
  return {v.h0 - r, v.h0 + r};
}

namespace {

constexpr std::size_t kJ = 8;
using Real8 = std::array<std::array<double, kJ>, kJ>;

double off_diagonal_norm(const Real8& s) {
  double acc = 0.0;
  for (std::size_t p = 0; p < kJ; ++p)
    for (std::size_t q = 0; q < kJ; ++q)
      if (p != q) acc += s[p][q] * s[p][q];
  return std::sqrt(acc);
}

// Cyclic Jacobi sweeps on a real symmetric matrix; returns the diagonal.
std::array<double, kJ> jacobi_eigenvalues(Real8 s) {
  constexpr double kThreshold = 1e-14;
  constexpr int kMaxSweeps = 100;
  double scale = 0.0;
  for (const auto& row : s)
    for (double x : row) scale = std::max(scale, std::abs(x));
  const double target = kThreshold * std::max(1.0, scale);

  for (int sweep = 0; sweep < kMaxSweeps && off_diagonal_norm(s) > target; ++sweep) {
    for (std::size_t p = 0; p + 1 < kJ; ++p) {
      for (std::size_t q = p + 1; q < kJ; ++q) {
        const double apq = s[p][q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (s[q][q] - s[p][p]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (std::size_t k = 0; k < kJ; ++k) {
          const double skp = s[k][p];
          const double skq = s[k][q];
          s[k][p] = c * skp - sn * skq;
          s[k][q] = sn * skp + c * skq;
        }
        for (std::size_t k = 0; k < kJ; ++k) {
          const double spk = s[p][k];
          const double sqk = s[q][k];
          s[p][k] = c * spk - sn * sqk;
          s[q][k] = sn * spk + c * sqk;
        }
      }
    }
  }
  std::array<double, kJ> d{};
  for (std::size_t i = 0; i < kJ; ++i) d[i] = s[i][i];
  return d;
}

}  // namespace

std::array<double, 4> hermitian_eigenvalues(const Mat4& h) {
  // H = A + iB  ->  [[A, -B], [B, A]], whose spectrum is that of H doubled.
  Real8 s{};
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      // symmetrize away roundoff-level anti-Hermitian parts
      const cplx v = 0.5 * (h(r, c) + std::conj(h(c, r)));
      s[r][c] = v.real();
      s[r + 4][c + 4] = v.real();
      s[r][c + 4] = -v.imag();
      s[r + 4][c] = v.imag();
    }
  auto d = jacobi_eigenvalues(s);
  std::sort(d.begin(), d.end());
  return {0.5 * (d[0] + d[1]), 0.5 * (d[2] + d[3]), 0.5 * (d[4] + d[5]), 0.5 * (d[6] + d[7])};
}

Density2 partial_trace_system(const Density4& rho) {
  Mat2 out;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) out(i, j) = rho(2 * i, 2 * j) + rho(2 * i + 1, 2 * j + 1);
  return Density2(out);
}

}  // namespace qwork
