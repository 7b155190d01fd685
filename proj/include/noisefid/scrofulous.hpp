#pragma once
// SCROFULOUS composite pulses: three equatorial rotations that implement a
// target rotation while cancelling first-order pulse-length error.
//
// For target angle theta_t about the axis at phase phi_t:
//   pulses (theta1 @ phi1), (pi @ phi2), (theta1 @ phi1), all offset by phi_t,
// where theta1 solves sinc(theta1) = (2/pi) cos(theta_t/2)  (sinc x = sin x / x),
//   phi1 = arccos(-pi cos(theta1) / (2 theta1 sin(theta_t/2))),
//   phi2 = phi1 - arccos(-pi / (2 theta1)).
// A pi target gives the classic 180_60 - 180_300 - 180_60 composite (area 3*pi).

#include <vector>

#include "noisefid/clifford.hpp"

namespace noisefid {

// Throws ConstraintViolation when no solution exists (large theta_t) and
// FitFailed if the 1e-12 root solve does not converge.
std::vector<PrimitiveRotation> scrofulous(double target_angle, double target_phase);

}  // namespace noisefid
