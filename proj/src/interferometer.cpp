#include "qwork/interferometer.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace qwork {

void NoiseModel::validate() const {
  auto nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!nonneg(gamma_f)) throw std::invalid_argument("NoiseModel: gamma_f must be >= 0");
  if (!nonneg(gamma_b)) throw std::invalid_argument("NoiseModel: gamma_b must be >= 0");
  if (!nonneg(rf_sigma)) throw std::invalid_argument("NoiseModel: rf_sigma must be >= 0");
  if (!nonneg(c_dephasing) || c_dephasing > 1.0)
    throw std::invalid_argument("NoiseModel: c_dephasing must lie in [0, 1]");
  if (!nonneg(readout_sigma)) throw std::invalid_argument("NoiseModel: readout_sigma must be >= 0");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

Mat2 hadamard() { return (pauli::x() + pauli::z()) * cplx(1.0 / std::sqrt(2.0)); }

Mat2 exp_hamiltonian(const Mat2& h, double u) {
  const auto v = pauli_components(h);
  const double k = kTwoPi * u;
  return pauli_exp(k * v.hx, k * v.hy, k * v.hz);
}

Mat4 rho_initial(const QuenchProtocol& p, const InverseTemperature& beta) {
  return tensor(pauli::projector(0), gibbs(p, beta).matrix());
}

// Frame change taking Z to the axis of H(0) or H(tau), with the sign of
// that Hamiltonian along its axis.
struct Frame {
  std::vector<PulseSpec> pulses;
  double sign;
};

Frame initial_frame(Direction d) {
  return d == Direction::Forward ? Frame{hadamard_yz_pulses(), 1.0} : Frame{hadamard_xz_pulses(), -1.0};
}

Frame final_frame(Direction d) {
  return d == Direction::Forward ? Frame{hadamard_xz_pulses(), 1.0} : Frame{hadamard_yz_pulses(), -1.0};
}

GateElement pulse(const std::string& label, Qubit target, Axis axis, double angle) {
  GateElement e;
  e.kind = GateElement::Kind::RfPulse;
  e.label = label;
  e.target = target;
  e.axis = axis;
  e.angle = angle;
  e.unitary = e.realized(1.0);
  return e;
}

GateElement coupling(double duration) {
  GateElement e;
  e.kind = GateElement::Kind::Coupling;
  e.label = "J";
  e.duration = duration;
  e.unitary = coupling_evolution(duration);
  return e;
}

void append_pulses(std::vector<GateElement>& out, const std::string& label, Qubit target,
                   const std::vector<PulseSpec>& pulses) {
  for (const auto& ps : pulses) out.push_back(pulse(label, target, ps.axis, ps.angle));
}

// exp(-i theta/2 Z) on the system from x / y pulses.
void append_z_rotation(std::vector<GateElement>& out, double theta) {
  out.push_back(pulse("Rz", Qubit::System, Axis::X, -kPi / 2));
  out.push_back(pulse("Rz", Qubit::System, Axis::Y, theta));
  out.push_back(pulse("Rz", Qubit::System, Axis::X, kPi / 2));
}

// exp(-i theta Z x Z); negative angles are refocused by ancilla flips.
void append_zz(std::vector<GateElement>& out, double theta) {
  const double duration = std::abs(theta) / (kTwoPi * kJCouplingKhz);
  if (theta >= 0.0) {
    out.push_back(coupling(duration));
    return;
  }
  out.push_back(pulse("flip", Qubit::Ancilla, Axis::X, kPi));
  out.push_back(coupling(duration));
  out.push_back(pulse("flip", Qubit::Ancilla, Axis::X, kPi));
}

Mat4 dephase_system(const Mat4& rho, double c) {
  const Mat4 z = tensor(Mat2::identity(), pauli::z());
  return rho * cplx(1.0 - 0.5 * c) + (z * rho * z) * cplx(0.5 * c);
}

}  // namespace

std::pair<Mat4, Mat4> conditional_gates(const QuenchProtocol& p, double u) {
  const Mat2 e0 = exp_hamiltonian(hamiltonian(p, 0.0), u);
  const Mat2 e1 = exp_hamiltonian(hamiltonian(p, p.tau), u);
  const Mat4 g1 = tensor(pauli::projector(0), e0) + tensor(pauli::projector(1), Mat2::identity());
  const Mat4 g2 = tensor(pauli::projector(0), Mat2::identity()) + tensor(pauli::projector(1), e1);
  return {g1, g2};
}

Mat4 abstract_unitary(const QuenchProtocol& p, const Mat2& u_quench, double u) {
  const auto [g1, g2] = conditional_gates(p, u);
  const Mat4 h = tensor(hadamard(), Mat2::identity());
  return h * g2 * tensor(Mat2::identity(), u_quench) * g1 * h;
}

cplx ancilla_readout(const Mat4& rho) {
  // Reduced ancilla state without the DensityMatrix validation so that
  // noisy intermediate states can be read out too.
  Mat2 a;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) a(i, j) = rho(2 * i, 2 * j) + rho(2 * i + 1, 2 * j + 1);
  const double z = (a * pauli::z()).trace().real();
  const double y = (a * pauli::y()).trace().real();
  return {z, y};
}

cplx run_abstract(const QuenchProtocol& p, const InverseTemperature& beta, const Mat2& u_quench, double u) {
  const Mat4 a = abstract_unitary(p, u_quench, u);
  return ancilla_readout(a * rho_initial(p, beta) * a.adjoint());
}

cplx run_abstract(const QuenchProtocol& p, const InverseTemperature& beta, double u) {
  return run_abstract(p, beta, propagator(p), u);
}

Mat2 rf_rotation(Axis axis, double angle) {
  return axis == Axis::X ? pauli_exp(0.5 * angle, 0.0, 0.0) : pauli_exp(0.0, 0.5 * angle, 0.0);
}

Mat4 coupling_evolution(double duration_ms) {
  const double phi = kTwoPi * kJCouplingKhz * duration_ms;
  Mat4 m;
  m(0, 0) = std::polar(1.0, -phi);
  m(1, 1) = std::polar(1.0, phi);
  m(2, 2) = std::polar(1.0, phi);
  m(3, 3) = std::polar(1.0, -phi);
  return m;
}

Mat4 GateElement::realized(double rf_scale) const {
  switch (kind) {
    case Kind::RfPulse: {
      const Mat2 r = rf_rotation(axis, angle * rf_scale);
      return target == Qubit::Ancilla ? tensor(r, Mat2::identity()) : tensor(Mat2::identity(), r);
    }
    case Kind::Coupling:
      return coupling_evolution(duration);
    case Kind::Quench:
      return unitary;
  }
  return unitary;
}

Mat4 GateSequence::total() const {
  Mat4 t = Mat4::identity();
  for (const auto& e : elements) t = e.unitary * t;
  return t;
}

// i Rx(pi) Ry(pi/2) = (X + Z)/sqrt2
std::vector<PulseSpec> hadamard_xz_pulses() { return {{Axis::Y, kPi / 2}, {Axis::X, kPi}}; }

// i Ry(pi) Rx(-pi/2) = (Y + Z)/sqrt2
std::vector<PulseSpec> hadamard_yz_pulses() { return {{Axis::X, -kPi / 2}, {Axis::Y, kPi}}; }

Mat2 realize_pulses(const std::vector<PulseSpec>& pulses, double rf_scale) {
  Mat2 m = Mat2::identity();
  for (const auto& ps : pulses) m = rf_rotation(ps.axis, ps.angle * rf_scale) * m;
  return m;
}

GateSequence compile_pulse_sequence(const QuenchProtocol& p, const Mat2& u_quench, double u) {
  GateSequence seq;
  seq.protocol = p;
  seq.u = u;
  seq.s_angle = kTwoPi * p.nu1 * u;
  seq.quench = u_quench;

  const Frame in = initial_frame(p.direction);
  const Frame out = final_frame(p.direction);
  const double phi1 = kTwoPi * u * p.initial_half_gap() * in.sign;
  const double phi2 = kTwoPi * u * p.final_half_gap() * out.sign;

  auto& el = seq.elements;
  append_pulses(el, "H", Qubit::Ancilla, hadamard_xz_pulses());
  // G1: conditional exp(-i phi1 Z) on ancilla |0>, in the frame of H(0)
  append_pulses(el, p.direction == Direction::Forward ? "K" : "L", Qubit::System, in.pulses);
  append_z_rotation(el, phi1);
  append_zz(el, 0.5 * phi1);
  append_pulses(el, p.direction == Direction::Forward ? "K" : "L", Qubit::System, in.pulses);

  GateElement q;
  q.kind = GateElement::Kind::Quench;
  q.label = "U";
  q.unitary = tensor(Mat2::identity(), u_quench);
  el.push_back(q);

  // G2: conditional exp(-i phi2 Z) on ancilla |1>, in the frame of H(tau)
  append_pulses(el, p.direction == Direction::Forward ? "L" : "K", Qubit::System, out.pulses);
  append_z_rotation(el, phi2);
  append_zz(el, -0.5 * phi2);
  append_pulses(el, p.direction == Direction::Forward ? "L" : "K", Qubit::System, out.pulses);
  append_pulses(el, "H", Qubit::Ancilla, hadamard_xz_pulses());
  return seq;
}

GateSequence compile_pulse_sequence(const QuenchProtocol& p, double u) {
  return compile_pulse_sequence(p, propagator(p), u);
}

PulseEnsemble::PulseEnsemble(const QuenchProtocol& p, const Mat2& nominal_quench, double rf_sigma,
                             std::uint64_t seed, int members) {
  if (!(rf_sigma >= 0.0)) throw std::invalid_argument("PulseEnsemble: rf_sigma must be >= 0");
  if (rf_sigma == 0.0) {
    scales_ = {1.0};
    quench_ = {nominal_quench};
    return;
  }
  if (members < 1) throw std::invalid_argument("PulseEnsemble: members must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(1.0, rf_sigma);
  scales_.resize(members);
  for (auto& s : scales_) s = normal(rng);
  quench_.reserve(members);
  for (double s : scales_) quench_.push_back(propagator(p.scaled(s), kEnsembleSlices));
}

cplx run_pulse_sequence(const GateSequence& seq, const InverseTemperature& beta, const NoiseModel& noise,
                        const PulseEnsemble& ensemble) {
  noise.validate();
  const Mat4 rho0 = rho_initial(seq.protocol, beta);
  cplx acc = 0.0;
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    const double scale = ensemble.scales()[m];
    const Mat4 quench = tensor(Mat2::identity(), ensemble.quench(m));
    Mat4 rho = rho0;
    for (const auto& e : seq.elements) {
      const Mat4 g = e.kind == GateElement::Kind::Quench ? quench : e.realized(scale);
      rho = g * rho * g.adjoint();
      if (e.kind == GateElement::Kind::Coupling && noise.c_dephasing > 0.0) rho = dephase_system(rho, noise.c_dephasing);
    }
    acc += ancilla_readout(rho);
  }
  acc /= static_cast<double>(ensemble.size());
  return acc * std::exp(-noise.gamma(seq.protocol.direction) * seq.u);
}

cplx run_pulse_sequence(const GateSequence& seq, const InverseTemperature& beta, const NoiseModel& noise,
                        std::uint64_t rng_seed) {
  const PulseEnsemble ens(seq.protocol, seq.quench, noise.rf_sigma, rng_seed);
  return run_pulse_sequence(seq, beta, noise, ens);
}

void MagnetizationSeries::validate() const {
  if (u_grid.size() != samples.size()) throw std::invalid_argument("MagnetizationSeries: grid/sample size mismatch");
  if (u_grid.size() < 2) return;
  const double h = spacing();
  if (!(h > 0.0)) throw std::invalid_argument("MagnetizationSeries: grid is not strictly ascending");
  for (std::size_t k = 1; k < u_grid.size(); ++k) {
    const double d = u_grid[k] - u_grid[k - 1];
    if (!(d > 0.0)) throw std::invalid_argument("MagnetizationSeries: grid is not strictly ascending");
    if (std::abs(d - h) > 1e-9 * h) throw std::invalid_argument("MagnetizationSeries: grid is not uniform");
  }
}

double MagnetizationSeries::spacing() const {
  if (u_grid.size() < 2) return 0.0;
  return (u_grid.back() - u_grid.front()) / static_cast<double>(u_grid.size() - 1);
}

MagnetizationSeries sample_series(const QuenchProtocol& p, const Mat2& u_quench, const InverseTemperature& beta,
                                  const NoiseModel& noise, int n, double rate_khz, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_series: n must be >= 2");
  if (!(rate_khz > 0.0) || !std::isfinite(rate_khz)) throw std::invalid_argument("sample_series: rate must be positive");
  noise.validate();

  MagnetizationSeries s;
  s.meta = {p, beta, noise, seed, rate_khz, kTwoPi * p.nu1};
  s.u_grid.resize(n);
  s.samples.resize(n);
  const PulseEnsemble ens(p, u_quench, noise.rf_sigma, derive_seed(seed, 1));
  for (int k = 0; k < n; ++k) {
    const double u = k / rate_khz;
    s.u_grid[k] = u;
    s.samples[k] = run_pulse_sequence(compile_pulse_sequence(p, u_quench, u), beta, noise, ens);
  }
  if (noise.readout_sigma > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, 2));
    std::normal_distribution<double> normal(0.0, noise.readout_sigma);
    for (auto& x : s.samples) {
      const double re = normal(rng);
      const double im = normal(rng);
      x += cplx(re, im);
    }
  }
  return s;
}

MagnetizationSeries sample_series(const QuenchProtocol& p, const InverseTemperature& beta, const NoiseModel& noise,
                                  int n, double rate_khz, std::uint64_t seed) {
  return sample_series(p, propagator(p), beta, noise, n, rate_khz, seed);
}

cplx magnetization_closed_form(const TransitionTable& t, const QuenchProtocol& p, double u, double gamma) {
  t.validate(1e-9);
  const double sum = p.nu1 + p.nu2;
  const double diff = p.nu1 - p.nu2;
  const double sign = p.direction == Direction::Forward ? 1.0 : -1.0;
  const double p0 = t.p0[0], p1 = t.p0[1];
  const auto& c = t.pcond;
  const cplx m = p1 * c[1][0] * std::polar(1.0, -kTwoPi * sum * u) +
                 p1 * c[1][1] * std::polar(1.0, -sign * kTwoPi * diff * u) +
                 p0 * c[0][0] * std::polar(1.0, sign * kTwoPi * diff * u) +
                 p0 * c[0][1] * std::polar(1.0, kTwoPi * sum * u);
  return 0.5 * m * std::exp(-gamma * u);
}

std::vector<Mat2> realized_process(const QuenchProtocol& p, const Mat2& nominal_quench, const NoiseModel& noise,
                                   std::uint64_t seed) {
  const PulseEnsemble ens(p, nominal_quench, noise.rf_sigma, derive_seed(seed, 1));
  const Frame in = initial_frame(p.direction);
  const Frame out = final_frame(p.direction);
  const Mat2 in_ideal = realize_pulses(in.pulses, 1.0);
  const Mat2 out_ideal = realize_pulses(out.pulses, 1.0);
  std::vector<Mat2> us;
  us.reserve(ens.size());
  for (std::size_t m = 0; m < ens.size(); ++m) {
    const double s = ens.scales()[m];
    const Mat2 inner = realize_pulses(out.pulses, s) * ens.quench(m) * realize_pulses(in.pulses, s);
    us.push_back(out_ideal.adjoint() * inner * in_ideal.adjoint());
  }
  return us;
}

Channel mixture_channel(std::vector<Mat2> unitaries) {
  if (unitaries.empty()) throw std::invalid_argument("mixture_channel: no members");
  return [us = std::move(unitaries)](const Mat2& rho) {
    Mat2 acc;
    for (const auto& u : us) acc += u * rho * u.adjoint();
    return acc * cplx(1.0 / static_cast<double>(us.size()));
  };
}

}  // namespace qwork
