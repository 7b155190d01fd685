#pragma once
// Closed-form fidelity law and moments for the three noise kinds.
//
// With the noise entering through the commuting drive quadrature, a single
// trajectory's fidelity is F = cos^2(dX) + S0^2 sin^2(dX) where dX = X_T - X_0.
// Averaging over the Gaussian displacement law gives
//   E[F]   = (1 + S0^2)/2 + (1 - S0^2)/2 * exp(-E(t))
//   Var[F] = (1 - S0^2)^2 / 8 * (1 - exp(-2 E(t)))^2
// with noise energy E(t) = 2 g^2 t (WN), 2 g^2 tau_kappa(t) (OU, started at
// X_0 = 0), and (2/3) g^2 t^3 (BM).

#include "noisefid/noise.hpp"

namespace noisefid {

struct MomentSpec {
  NoiseKind kind = NoiseKind::white;
  double gamma = 0;  // WN/OU: s^-1/2; BM: s^-3/2
  double kappa = 0;  // s^-1, OU only
  double s0 = 0;     // initial-state overlap phi0^dag S phi0

  void validate() const;
  static MomentSpec from_noise(const NoiseParams& p, double s0 = 0.0);
};

// Single-trajectory fidelity from the accumulated displacement.
double fidelity_from_displacement(double s0, double dx);

// (1 - exp(-2 kappa t)) / (2 kappa), expm1-based for kappa*t << 1.
double tau_kappa(double kappa, double t);

// The decay exponent E(t) for the configured kind.
double noise_energy(const MomentSpec& spec, double t);

double mean_fidelity(const MomentSpec& spec, double t);
double var_fidelity(const MomentSpec& spec, double t);

struct MomentBand {
  double mean = 1;
  double band = 0;  // 1 sigma of the n-realization sample mean
};
MomentBand sample_moment_bands(const MomentSpec& spec, double t, int n_realizations);

}  // namespace noisefid
