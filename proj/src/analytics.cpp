#include "noisefid/analytics.hpp"

#include <cmath>
#include <stdexcept>

namespace noisefid {

void MomentSpec::validate() const {
  if (!(gamma >= 0)) throw std::invalid_argument("MomentSpec: gamma must be >= 0");
  if (!(kappa >= 0)) throw std::invalid_argument("MomentSpec: kappa must be >= 0");
  if (kind == NoiseKind::ou && !(kappa > 0))
    throw std::invalid_argument("MomentSpec: OU requires kappa > 0");
  if (std::abs(s0) > 1.0) throw std::invalid_argument("MomentSpec: |S0| must be <= 1");
}

MomentSpec MomentSpec::from_noise(const NoiseParams& p, double s0) {
  MomentSpec m;
  m.kind = p.kind;
  m.gamma = p.gamma;
  m.kappa = p.kappa;
  m.s0 = s0;
  m.validate();
  return m;
}

double fidelity_from_displacement(double s0, double dx) {
  if (std::abs(s0) > 1.0)
    throw std::invalid_argument("fidelity_from_displacement: |S0| must be <= 1");
  const double c = std::cos(dx), s = std::sin(dx);
  return c * c + s0 * s0 * s * s;
}

double tau_kappa(double kappa, double t) {
  if (!(kappa > 0)) throw std::invalid_argument("tau_kappa: kappa must be > 0");
  if (t < 0) throw std::invalid_argument("tau_kappa: t must be >= 0");
  return -std::expm1(-2.0 * kappa * t) / (2.0 * kappa);
}

double noise_energy(const MomentSpec& spec, double t) {
  spec.validate();
  if (t < 0) throw std::invalid_argument("noise_energy: t must be >= 0");
  const double g2 = spec.gamma * spec.gamma;
  switch (spec.kind) {
    case NoiseKind::white: return 2.0 * g2 * t;
    case NoiseKind::ou: return 2.0 * g2 * tau_kappa(spec.kappa, t);
    case NoiseKind::brownian: return (2.0 / 3.0) * g2 * t * t * t;
  }
  throw std::invalid_argument("noise_energy: unknown kind");
}

double mean_fidelity(const MomentSpec& spec, double t) {
  const double s02 = spec.s0 * spec.s0;
  return 0.5 * (1.0 + s02) + 0.5 * (1.0 - s02) * std::exp(-noise_energy(spec, t));
}

double var_fidelity(const MomentSpec& spec, double t) {
  const double s02 = spec.s0 * spec.s0;
  const double decay = -std::expm1(-2.0 * noise_energy(spec, t));  // 1 - e^{-2E}
  return (1.0 - s02) * (1.0 - s02) / 8.0 * decay * decay;
}

MomentBand sample_moment_bands(const MomentSpec& spec, double t, int n_realizations) {
  if (n_realizations < 2)
    throw std::invalid_argument("sample_moment_bands: need n_realizations >= 2");
  MomentBand b;
  b.mean = mean_fidelity(spec, t);
  b.band = std::sqrt(var_fidelity(spec, t) / static_cast<double>(n_realizations));
  return b;
}

}  // namespace noisefid
