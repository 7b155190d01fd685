#include "noisefid/qubit.hpp"

#include <cmath>
#include <stdexcept>

namespace noisefid {

namespace {
const std::complex<double> I1(0.0, 1.0);
}

const Mat2& identity2() {
  static const Mat2 m = Mat2::Identity();
  return m;
}
const Mat2& sigma_x() {
  static const Mat2 m = (Mat2() << 0, 1, 1, 0).finished();
  return m;
}
const Mat2& sigma_y() {
  static const Mat2 m = (Mat2() << 0, -I1, I1, 0).finished();
  return m;
}
const Mat2& sigma_z() {
  static const Mat2 m = (Mat2() << 1, 0, 0, -1).finished();
  return m;
}

QubitState QubitState::ket0() { return QubitState{Vec2(1.0, 0.0)}; }
QubitState QubitState::ket1() { return QubitState{Vec2(0.0, 1.0)}; }

QubitState QubitState::from_amplitudes(std::complex<double> c0, std::complex<double> c1) {
  Vec2 v(c0, c1);
  const double n = v.norm();
  if (!(n > 1e-12)) throw std::invalid_argument("QubitState: zero amplitude vector");
  return QubitState{v / n};
}

Mat2 hamiltonian(double omega, double delta) {
  return 0.5 * (omega * sigma_x() + delta * (identity2() - sigma_z()));
}

Mat2 drive_hamiltonian(double omega, double delta, double phase) {
  return 0.5 * (omega * axis_operator(phase) + delta * (identity2() - sigma_z()));
}

Mat2 axis_operator(double phase) {
  return std::cos(phase) * sigma_x() + std::sin(phase) * sigma_y();
}

Mat2 axis_rotation(double theta, double phase) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  Mat2 u;
  u << c, -I1 * s * std::exp(-I1 * phase), -I1 * s * std::exp(I1 * phase), c;
  return u;
}

Mat2 drive_propagator(double omega, double delta, double phase, double tau) {
  // H = (delta/2) I + v . sigma/|..| with v = 0.5*(omega cos, omega sin, -delta);
  // exp(-i H tau) = e^{-i delta tau/2} [cos|v|tau - i sin|v|tau (v_hat . sigma)].
  const double vx = 0.5 * omega * std::cos(phase);
  const double vy = 0.5 * omega * std::sin(phase);
  const double vz = -0.5 * delta;
  const double vn = std::sqrt(vx * vx + vy * vy + vz * vz);
  const std::complex<double> gp = std::exp(-I1 * (0.5 * delta * tau));
  if (vn * tau == 0.0) return gp * identity2();
  const double a = vn * tau;
  const Mat2 ns = (vx * sigma_x() + vy * sigma_y() + vz * sigma_z()) / vn;
  return gp * (std::cos(a) * identity2() - I1 * std::sin(a) * ns);
}

double fidelity(const QubitState& psi, const QubitState& phi) {
  const double f = std::norm(phi.amp.dot(psi.amp));  // Eigen dot conjugates the left arg
  return std::clamp(f, 0.0, 1.0);
}

double population0(const QubitState& psi) {
  return std::clamp(std::norm(psi.amp(0)), 0.0, 1.0);
}

void NoiseOperatorSpec::check_unital() const {
  if (!(S.adjoint() * S).isApprox(identity2(), 1e-12))
    throw std::invalid_argument("NoiseOperatorSpec: S^dag S != I");
}

double NoiseOperatorSpec::s0(const QubitState& phi0) const {
  const std::complex<double> v = phi0.amp.dot(S * phi0.amp);
  if (std::abs(v.imag()) >= 1e-12)
    throw std::invalid_argument("NoiseOperatorSpec: S0 has a non-negligible imaginary part");
  if (std::abs(v.real()) > 1.0 + 1e-12)
    throw std::invalid_argument("NoiseOperatorSpec: S0 outside [-1, 1]");
  return std::clamp(v.real(), -1.0, 1.0);
}

}  // namespace noisefid
