#pragma once
// Single-qubit states, Pauli algebra, and the microwave-drive Hamiltonian
// H = (1/2)[Omega sx + Delta (I - sz)] with closed-form segment propagators.
// Global phase is ignored throughout; fidelity is the only state comparator.

#include <complex>

#include <Eigen/Dense>

namespace noisefid {

using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;

const Mat2& identity2();
const Mat2& sigma_x();
const Mat2& sigma_y();
const Mat2& sigma_z();

struct QubitState {
  Vec2 amp{1.0, 0.0};

  static QubitState ket0();
  static QubitState ket1();
  // Normalizes; throws std::invalid_argument on (near-)zero input.
  static QubitState from_amplitudes(std::complex<double> c0, std::complex<double> c1);

  double norm() const { return amp.norm(); }
  void renormalize() { amp /= amp.norm(); }
};

// H = 0.5 * (omega * sx + delta * (I - sz)); Hermitian by construction.
Mat2 hamiltonian(double omega, double delta);
// Same with the drive quadrature rotated in the equatorial plane:
// sx -> cos(phase) sx + sin(phase) sy.
Mat2 drive_hamiltonian(double omega, double delta, double phase);

// Equatorial axis operator cos(phase) sx + sin(phase) sy (the noise quadrature).
Mat2 axis_operator(double phase);
// exp(-i theta/2 * axis_operator(phase)): rotation by theta about that axis.
Mat2 axis_rotation(double theta, double phase);

// Exact exp(-i H tau) for the piecewise-constant drive Hamiltonian.
Mat2 drive_propagator(double omega, double delta, double phase, double tau);

double fidelity(const QubitState& psi, const QubitState& phi);  // |<phi|psi>|^2 in [0,1]
double population0(const QubitState& psi);

// The SSE noise operator: S = sx in this release. S0 is the initial-state
// expectation value phi0^dag S phi0 entering the closed-form moments.
struct NoiseOperatorSpec {
  Mat2 S = sigma_x();

  void check_unital() const;            // verifies S^dag S == I
  double s0(const QubitState& phi0) const;  // throws if Im > 1e-12 or |S0| > 1
};

}  // namespace noisefid
