#pragma once
// Stochastic Schroedinger equation integration for a driven qubit with
// amplitude noise on the drive quadrature:
//
//   d psi = -i H psi dt - 1/2 S^dag S psi d[X]_t - i S psi dX_t
//
// with S the segment's equatorial drive operator (sx at phase 0, S^dag S = I)
// and X the control-noise process carried by a NoiseTrace.
//
// Each segment is integrated by a Strang split: exact closed-form drive
// propagator for half a segment, weak second-order Platen step(s) for the noise
// part, exact drive for the second half. The drive term is exactly solvable per
// segment, so the splitting puts all discretization error into the stochastic
// part, where the Platen scheme operates on xi = dX/sqrt(dQV) with diffusion
// b = -i sqrt(dQV/dt) S psi and drift a = -(dQV/dt)/2 psi. Large increments are
// substepped so the per-step rotation stays below substep_dx. For the
// finite-variation BM process (dQV = 0) the scheme degenerates to the pure
// phase rotation, as it should.

#include <cstddef>

#include "noisefid/noise.hpp"
#include "noisefid/pulse.hpp"
#include "noisefid/qubit.hpp"

namespace noisefid {

struct IntegratorOptions {
  // Noise can perturb the Rabi phase directly (default) or the amplitude
  // setpoint upstream of the calibration, where it is scaled by the local
  // calibration slope.
  enum class NoiseMode { rabi_phase, setpoint };
  NoiseMode noise_mode = NoiseMode::rabi_phase;
  double substep_dx = 2e-3;  // max |dX| handled by a single Platen step, rad
  double norm_tol = 1e-3;    // pre-renormalization drift that counts as divergence
};

struct IntegrationResult {
  QubitState state;
  double max_norm_drift = 0;  // worst |norm - 1| seen before renormalization
};

// Exact piecewise-constant evolution with no noise.
QubitState evolve_ideal(const PulseSchedule& pulse, const AmplitudeCalibration& calib,
                        const QubitState& state0, double site_scale = 1.0);

// SSE evolution: noise applied over [0, noise_duration], the remaining tail
// evolves noiselessly. The drive Hamiltonian is scaled by site_scale.
IntegrationResult integrate_sse(const PulseSchedule& pulse, const AmplitudeCalibration& calib,
                                const NoiseTrace& trace, const QubitState& state0,
                                double site_scale = 1.0, const IntegratorOptions& opts = {});

}  // namespace noisefid
