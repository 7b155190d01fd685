#pragma once
// Randomized benchmarking through the noisy SSE engine: random Clifford
// sequences with an inversion gate, compiled to pulse schedules (optionally
// SCROFULOUS-expanded), evolved per site, measured, and fitted to the decay
// model p(n) = 1/2 + 1/2 (1 - d0)(1 - d)^n with F_C = 1 - d/2.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "noisefid/measurement.hpp"
#include "noisefid/noise.hpp"
#include "noisefid/pulse.hpp"

namespace noisefid {

struct RBSequence {
  std::vector<int> gates;  // n random Clifford indices, in application order
  int inversion = 0;       // index of the unique gate restoring the identity
};

// Uniform random sequence plus its inversion; deterministic per seed.
RBSequence rb_sequence(int n, std::uint64_t seed);

// Compilation convention: each Clifford's primitive rotations (SCROFULOUS-
// expanded when composite) become runs of ceil(theta / (rabi_max * dt))
// constant segments at setpoint theta / (k * dt * rabi_max), on a linear
// calibration anchored at rabi_max.
struct CompiledSequence {
  PulseSchedule schedule;
  double pulse_area = 0;  // rad, after any composite expansion
};

CompiledSequence compile_sequence(const RBSequence& seq, double rabi_max, double segment_dt,
                                  bool composite);

// Mean decomposed pulse area per Clifford under the compile convention
// (averaged uniformly over the 24 group elements).
double average_clifford_area(bool composite);

struct RBConfig {
  std::vector<int> lengths;
  int n_sequences = 75;
  int n_meas = 75;           // overrides the model's n_meas for RB readout
  bool composite = true;     // SCROFULOUS expansion on/off
  NoiseParams noise;         // noise.gamma == 0 disables the stochastic part
  double rabi = 2.0 * M_PI * 117e3;  // rad/s
  double segment_dt = 1e-6;  // s
  std::uint64_t seed = 0;

  void validate() const;
};

struct RBPoint {
  int length = 0;
  int sequence = 0;
  double p0 = 0;  // array-averaged return probability to |0>
};

// model == nullopt: exact site-averaged |<0|psi>|^2 (no readout sampling).
std::vector<RBPoint> run_rb(const RBConfig& config, const std::optional<ArrayModel>& model);

struct RBFit {
  double d0 = 0, d = 0, f_clifford = 1;
  double d0_err = 0, d_err = 0, f_clifford_err = 0;
  double ssr = 0;
};

RBFit fit_rb_decay(const std::vector<double>& lengths, const std::vector<double>& probabilities);
RBFit fit_rb_decay(const std::vector<RBPoint>& points);

}  // namespace noisefid
