#pragma once
// The 24-element single-qubit Clifford group with pulse decompositions.
//
// Unitaries are generated once by closure over {Rx(pi/2), Ry(pi/2)} (breadth-
// first, deterministic order). Each element carries a minimal-pulse-area
// decomposition into at most 3 primitive rotations from {+-x, +-y} x {pi/2, pi},
// found by exhaustive search; z-axis Cliffords come out as equatorial
// sequences automatically. Equality is always up to global phase.

#include <vector>

#include "noisefid/qubit.hpp"

namespace noisefid {

struct PrimitiveRotation {
  double angle = 0;  // rad, in (0, 2*pi)
  double phase = 0;  // drive phase: 0 = +x, pi/2 = +y, pi = -x, 3*pi/2 = -y

  char axis() const;  // 'x' or 'y' (sign carried by the phase)
};

struct CliffordGate {
  int index = 0;
  Mat2 unitary = Mat2::Identity();
  std::vector<PrimitiveRotation> decomposition;  // empty for the identity

  double pulse_area() const;
};

bool equal_up_to_phase(const Mat2& a, const Mat2& b, double tol = 1e-8);

// Cached canonical group; index order is stable across runs.
const std::vector<CliffordGate>& clifford_group();

// Index of the group element matching u up to phase, or -1.
int find_clifford(const Mat2& u, double tol = 1e-8);

Mat2 compose_decomposition(const std::vector<PrimitiveRotation>& prims);

}  // namespace noisefid
