#pragma once

// Small dense complex linear algebra for one and two qubits.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

namespace qwork {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Square complex matrix with compile-time dimension (2 or 4 in practice).
template <std::size_t N>
class Matrix {
 public:
  static constexpr std::size_t dim = N;

  Matrix() = default;

  static Matrix identity() {
    Matrix m;
    for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
    return m;
  }

  cplx& operator()(std::size_t r, std::size_t c) { return a_[r * N + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return a_[r * N + c]; }

  Matrix adjoint() const {
    Matrix out;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = 0; c < N; ++c) out(c, r) = std::conj((*this)(r, c));
    return out;
  }

  cplx trace() const {
    cplx t = 0.0;
    for (std::size_t i = 0; i < N; ++i) t += (*this)(i, i);
    return t;
  }

  Matrix& operator+=(const Matrix& o) {
    for (std::size_t i = 0; i < N * N; ++i) a_[i] += o.a_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    for (std::size_t i = 0; i < N * N; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Matrix& operator*=(cplx s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, cplx s) { return a *= s; }
  friend Matrix operator*(cplx s, Matrix a) { return a *= s; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    Matrix out;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t k = 0; k < N; ++k) {
        const cplx ark = a(r, k);
        if (ark == cplx{}) continue;
        for (std::size_t c = 0; c < N; ++c) out(r, c) += ark * b(k, c);
      }
    return out;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::array<cplx, N * N> a_{};
};

using Mat2 = Matrix<2>;
using Mat4 = Matrix<4>;

template <std::size_t N>
double max_abs_diff(const Matrix<N>& a, const Matrix<N>& b) {
  double m = 0.0;
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) m = std::max(m, std::abs(a(r, c) - b(r, c)));
  return m;
}

template <std::size_t N>
bool is_hermitian(const Matrix<N>& m, double tol = 1e-12) {
  return max_abs_diff(m, m.adjoint()) <= tol;
}

template <std::size_t N>
bool is_unitary(const Matrix<N>& m, double tol = 1e-12) {
  return max_abs_diff(m.adjoint() * m, Matrix<N>::identity()) <= tol;
}

namespace pauli {
Mat2 identity();
Mat2 x();
Mat2 y();
Mat2 z();
// The i*1 element used as the first operator of the process-matrix basis.
Mat2 zero_i();
// |b><b| for b in {0, 1}.
Mat2 projector(int b);
}  // namespace pauli

// Decomposition H = h0*1 + hx*X + hy*Y + hz*Z of a Hermitian 2x2 matrix.
struct PauliVector {
  double h0 = 0.0;
  double hx = 0.0;
  double hy = 0.0;
  double hz = 0.0;

  double norm() const { return std::sqrt(hx * hx + hy * hy + hz * hz); }
};

PauliVector pauli_components(const Mat2& h);
Mat2 from_pauli(const PauliVector& v);

// exp(-i (a X + b Y + c Z)) in closed form.
Mat2 pauli_exp(double a, double b, double c);

// Kronecker product; the first factor is the ancilla.
Mat4 tensor(const Mat2& ancilla, const Mat2& system);

// Eigenvalues of a Hermitian matrix, ascending. Closed form for 2x2,
// cyclic Jacobi on the real 8x8 embedding for 4x4.
std::array<double, 2> hermitian_eigenvalues(const Mat2& h);
std::array<double, 4> hermitian_eigenvalues(const Mat4& h);

template <std::size_t N>
double trace_norm_hermitian(const Matrix<N>& h) {
  double s = 0.0;
  for (double v : hermitian_eigenvalues(h)) s += std::abs(v);
  return s;
}

template <std::size_t N>
class PureState {
 public:
  explicit PureState(const std::array<cplx, N>& amplitudes) : amp_(amplitudes) {
    double n = 0.0;
    for (const auto& a : amp_) {
      if (!std::isfinite(a.real()) || !std::isfinite(a.imag()))
        throw std::invalid_argument("PureState: non-finite amplitude");
      n += std::norm(a);
    }
    if (std::abs(n - 1.0) > 1e-12) throw std::invalid_argument("PureState: amplitudes are not unit norm");
  }

  static PureState basis(std::size_t k) {
    std::array<cplx, N> a{};
    a.at(k) = 1.0;
    return PureState(a);
  }

  const cplx& operator[](std::size_t i) const { return amp_[i]; }
  const std::array<cplx, N>& amplitudes() const { return amp_; }

  cplx inner(const PureState& other) const {
    cplx s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += std::conj(amp_[i]) * other.amp_[i];
    return s;
  }

  Matrix<N> projector() const {
    Matrix<N> m;
    for (std::size_t r = 0; r < N; ++r)
      for (std::size_t c = 0; c < N; ++c) m(r, c) = amp_[r] * std::conj(amp_[c]);
    return m;
  }

 private:
  std::array<cplx, N> amp_;
};

template <std::size_t N>
std::array<cplx, N> apply(const Matrix<N>& m, const std::array<cplx, N>& v) {
  std::array<cplx, N> out{};
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) out[r] += m(r, c) * v[c];
  return out;
}

// <a|M|b>
template <std::size_t N>
cplx matrix_element(const PureState<N>& a, const Matrix<N>& m, const PureState<N>& b) {
  const auto mb = apply(m, b.amplitudes());
  cplx s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += std::conj(a[i]) * mb[i];
  return s;
}

inline constexpr double kDensityTol = 1e-12;
inline constexpr double kNegativeEigTol = 1e-10;

// Hermitian, unit-trace, positive semidefinite (within tolerances).
template <std::size_t N>
class DensityMatrix {
 public:
  explicit DensityMatrix(const Matrix<N>& m) : m_(m) {
    if (!is_hermitian(m_, kDensityTol)) throw std::invalid_argument("DensityMatrix: not Hermitian");
    if (std::abs(m_.trace() - 1.0) > kDensityTol) throw std::invalid_argument("DensityMatrix: trace is not 1");
    for (double v : hermitian_eigenvalues(m_))
      if (v < -kNegativeEigTol) throw std::invalid_argument("DensityMatrix: negative eigenvalue");
  }

  static DensityMatrix from_pure(const PureState<N>& s) { return DensityMatrix(s.projector()); }
  static DensityMatrix maximally_mixed() { return DensityMatrix(Matrix<N>::identity() * cplx(1.0 / N)); }

  const Matrix<N>& matrix() const { return m_; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

  double expectation(const Matrix<N>& op) const { return (m_ * op).trace().real(); }

  DensityMatrix evolved(const Matrix<N>& u) const { return DensityMatrix(u * m_ * u.adjoint()); }

 private:
  Matrix<N> m_;
};

using Density2 = DensityMatrix<2>;
using Density4 = DensityMatrix<4>;

// Traces out the system (second) factor, leaving the ancilla state.
Density2 partial_trace_system(const Density4& rho);

// Half the trace norm of the difference.
template <std::size_t N>
double trace_distance(const DensityMatrix<N>& rho, const DensityMatrix<N>& sigma) {
  return 0.5 * trace_norm_hermitian(rho.matrix() - sigma.matrix());
}

}  // namespace qwork
