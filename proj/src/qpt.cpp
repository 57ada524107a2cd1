#include "qwork/qpt.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qwork {

namespace {

constexpr cplx kI{0.0, 1.0};

std::array<double, 3> bloch(const Mat2& rho) {
  return {2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(), (rho(0, 0) - rho(1, 1)).real()};
}

Mat2 pure_state(double theta, double phi) {
  const PureState<2> s({std::cos(0.5 * theta), std::polar(std::sin(0.5 * theta), phi)});
  return s.projector();
}

// Affine action r -> m r + t of a channel on the Bloch ball.
struct BlochMap {
  std::array<std::array<double, 3>, 3> m{};
  std::array<double, 3> t{};

  explicit BlochMap(const Channel& e) {
    t = bloch(e(pauli::identity() * cplx(0.5)));
    const std::array<Mat2, 3> paulis = {pauli::x(), pauli::y(), pauli::z()};
    for (int j = 0; j < 3; ++j) {
      const auto r = bloch(e((pauli::identity() + paulis[j]) * cplx(0.5)));
      for (int i = 0; i < 3; ++i) m[i][j] = r[i] - t[i];
    }
  }
};

}  // namespace

const std::array<Mat2, 4>& process_basis() {
  static const std::array<Mat2, 4> basis = {pauli::identity() * kI, pauli::x(), pauli::y(), pauli::z()};
  return basis;
}

void ProcessMatrix::validate(double tol) const {
  if (max_abs_diff(xi, xi.adjoint()) > tol)
    throw std::invalid_argument("ProcessMatrix: not Hermiticity preserving");
  const auto& b = process_basis();
  Mat2 tp;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) tp += b[l].adjoint() * b[k] * xi(k, l);
  if (max_abs_diff(tp, pauli::identity()) > tol) throw std::invalid_argument("ProcessMatrix: not trace preserving");
}

double ProcessMatrix::imag_norm() const {
  double m = 0.0;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) m = std::max(m, std::abs(xi(k, l).imag()));
  return m;
}

Mat2 apply_process(const ProcessMatrix& xi, const Mat2& rho) {
  xi.validate();
  const auto& b = process_basis();
  Mat2 out;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l)
      if (xi.xi(k, l) != cplx(0.0)) out += b[k] * rho * b[l].adjoint() * xi.xi(k, l);
  if (std::abs(out.trace() - rho.trace()) > 1e-9) throw std::invalid_argument("apply_process: trace not preserved");
  return out;
}

Density2 apply_process(const ProcessMatrix& xi, const Density2& rho) {
  return Density2(apply_process(xi, rho.matrix()));
}

ProcessMatrix reconstruct(const Channel& channel) {
  const Mat2 r0 = pure_state(0.0, 0.0);
  const Mat2 r1 = pure_state(kPi, 0.0);
  const Mat2 rp = pure_state(0.5 * kPi, 0.0);
  const Mat2 ri = pure_state(0.5 * kPi, 0.5 * kPi);
  const Mat2 e0 = channel(r0), e1 = channel(r1), ep = channel(rp), ei = channel(ri);
  for (const Mat2* e : {&e0, &e1, &ep, &ei})
    if (std::abs(e->trace() - 1.0) > 1e-9) throw std::invalid_argument("reconstruct: channel is not trace preserving");

  // Images of the matrix units |a><b|.
  std::array<Mat2, 4> units{};
  std::array<Mat2, 4> images{};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) units[2 * a + b](a, b) = 1.0;
  images[0] = e0;
  images[3] = e1;
  images[1] = ep + ei * kI - (e0 + e1) * cplx(0.5, 0.5);
  images[2] = ep - ei * kI - (e0 + e1) * cplx(0.5, -0.5);

  const auto& basis = process_basis();
  Eigen::Matrix<cplx, 16, 16> a;
  Eigen::Matrix<cplx, 16, 1> rhs;
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) {
        const Mat2 term = basis[k] * units[j] * basis[l].adjoint();
        for (int e = 0; e < 4; ++e) a(4 * j + e, 4 * k + l) = term(e / 2, e % 2);
      }
    for (int e = 0; e < 4; ++e) rhs(4 * j + e) = images[j](e / 2, e % 2);
  }
  const Eigen::Matrix<cplx, 16, 1> sol = a.fullPivLu().solve(rhs);
  ProcessMatrix xi;
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) xi.xi(k, l) = sol(4 * k + l);
  // Remove round-off asymmetry before the consistency checks.
  xi.xi = (xi.xi + xi.xi.adjoint()) * cplx(0.5);

  // A linear channel must predict its response to states outside the probe set.
  const Channel model = process_channel(xi);
  const std::array<Mat2, 3> tests = {pure_state(0.5 * kPi, kPi), pure_state(0.5 * kPi, 1.5 * kPi),
                                     pure_state(1.1, 2.3) * cplx(0.6) + pure_state(2.0, 0.4) * cplx(0.4)};
  for (const auto& t : tests)
    if (max_abs_diff(channel(t), model(t)) > 1e-9)
      throw std::invalid_argument("reconstruct: channel response is not linear");
  xi.validate();
  return xi;
}

Channel unitary_channel(const Mat2& u) {
  return [u](const Mat2& rho) { return u * rho * u.adjoint(); };
}

Channel process_channel(const ProcessMatrix& xi) {
  return [xi](const Mat2& rho) {
    const auto& b = process_basis();
    Mat2 out;
    for (int k = 0; k < 4; ++k)
      for (int l = 0; l < 4; ++l) out += b[k] * rho * b[l].adjoint() * xi.xi(k, l);
    return out;
  };
}

Channel depolarizing_channel(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("depolarizing_channel: p outside [0, 1]");
  return [p](const Mat2& rho) { return rho * cplx(1.0 - p) + pauli::identity() * (rho.trace() * 0.5 * p); };
}

Channel amplitude_damping_channel(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("amplitude_damping_channel: p outside [0, 1]");
  Mat2 k0, k1;
  k0(0, 0) = 1.0;
  k0(1, 1) = std::sqrt(1.0 - p);
  k1(0, 1) = std::sqrt(p);
  return [k0, k1](const Mat2& rho) { return k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint(); };
}

double unitality_deviation(const ProcessMatrix& xi) {
  const Mat2 half = pauli::identity() * cplx(0.5);
  return 0.5 * trace_norm_hermitian(apply_process(xi, half) - half);
}

double worst_case_distance(const Channel& e1, const Channel& e2) {
  const BlochMap b1(e1), b2(e2);
  std::array<std::array<double, 3>, 3> dm{};
  std::array<double, 3> dt{};
  for (int i = 0; i < 3; ++i) {
    dt[i] = b1.t[i] - b2.t[i];
    for (int j = 0; j < 3; ++j) dm[i][j] = b1.m[i][j] - b2.m[i][j];
  }
  // Trace distance of qubit states is half the Bloch-vector distance.
  auto f = [&](double theta, double phi) {
    const std::array<double, 3> r = {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                                     std::cos(theta)};
    double s = 0.0;
    for (int i = 0; i < 3; ++i) {
      double v = dt[i];
      for (int j = 0; j < 3; ++j) v += dm[i][j] * r[j];
      s += v * v;
    }
    return 0.5 * std::sqrt(s);
  };

  const double step = 2.0 * kPi / 180.0;
  double best = -1.0, bt = 0.0, bp = 0.0;
  for (int i = 0; i <= 90; ++i)
    for (int j = 0; j < 180; ++j) {
      const double v = f(i * step, j * step);
      if (v > best) {
        best = v;
        bt = i * step;
        bp = j * step;
      }
    }

  // Nelder-Mead on -f over (theta, phi).
  std::array<std::array<double, 2>, 3> x = {{{bt, bp}, {bt + step, bp}, {bt, bp + step}}};
  std::array<double, 3> fx{};
  for (int i = 0; i < 3; ++i) fx[i] = -f(x[i][0], x[i][1]);
  for (int iter = 0; iter < 500; ++iter) {
    std::array<int, 3> o = {0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    const auto lo = o[0], mid = o[1], hi = o[2];
    if (std::abs(fx[hi] - fx[lo]) < 1e-15 && std::abs(x[hi][0] - x[lo][0]) + std::abs(x[hi][1] - x[lo][1]) < 1e-10)
      break;
    const std::array<double, 2> c = {0.5 * (x[lo][0] + x[mid][0]), 0.5 * (x[lo][1] + x[mid][1])};
    auto along = [&](double t) {
      return std::array<double, 2>{c[0] + t * (x[hi][0] - c[0]), c[1] + t * (x[hi][1] - c[1])};
    };
    const auto xr = along(-1.0);
    const double fr = -f(xr[0], xr[1]);
    if (fr < fx[lo]) {
      const auto xe = along(-2.0);
      const double fe = -f(xe[0], xe[1]);
      if (fe < fr) {
        x[hi] = xe;
        fx[hi] = fe;
      } else {
        x[hi] = xr;
        fx[hi] = fr;
      }
    } else if (fr < fx[mid]) {
      x[hi] = xr;
      fx[hi] = fr;
    } else {
      const auto xc = along(fr < fx[hi] ? -0.5 : 0.5);
      const double fc = -f(xc[0], xc[1]);
      if (fc < std::min(fr, fx[hi])) {
        x[hi] = xc;
        fx[hi] = fc;
      } else {
        for (int i : {mid, hi}) {
          x[i] = {0.5 * (x[i][0] + x[lo][0]), 0.5 * (x[i][1] + x[lo][1])};
          fx[i] = -f(x[i][0], x[i][1]);
        }
      }
    }
  }
  for (double v : fx) best = std::max(best, -v);
  return std::min(best, 1.0);
}

ChannelMetrics channel_metrics(const ProcessMatrix& measured, const Channel& ideal) {
  return {worst_case_distance(process_channel(measured), ideal), unitality_deviation(measured), measured.imag_norm()};
}

double microreversibility_deviation(const TransitionTable& forward, const TransitionTable& backward) {
  double d = 0.0;
  for (int n = 0; n < 2; ++n)
    for (int m = 0; m < 2; ++m) d = std::max(d, std::abs(backward.pcond[m][n] - forward.pcond[n][m]));
  return d;
}

}  // namespace qwork
