#pragma once
// Explicit weak second-order Platen scheme for dY = a(Y) dt + b(Y) dW.
//
// One step with Gaussian xi:
//   Ybar  = Y + a(Y) dt + b(Y) xi sqrt(dt)
//   Ypm   = Y + a(Y) dt +/- b(Y) sqrt(dt)
//   Y'    = Y + 1/2 (a(Ybar) + a(Y)) dt
//             + 1/4 (b(Y+) + b(Y-) + 2 b(Y)) xi sqrt(dt)
//             + 1/4 (b(Y+) - b(Y-)) (xi^2 - 1) sqrt(dt)
//
// With b == 0 this is Heun's deterministic second-order step; with constant b
// and xi = 0 it is the deterministic predictor-corrector step.

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "noisefid/errors.hpp"

namespace noisefid {

namespace platen_detail {
inline bool is_finite(double v) { return std::isfinite(v); }
template <typename Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& v) {
  return v.allFinite();
}
}  // namespace platen_detail

template <typename State, typename Drift, typename Diffusion>
State platen_step(const State& y, Drift&& a, Diffusion&& b, double dt, double xi) {
  const double sq = std::sqrt(dt);
  const State ay = a(y);
  const State by = b(y);
  if (!platen_detail::is_finite(ay) || !platen_detail::is_finite(by))
    throw IntegrationDiverged("platen_step: non-finite drift/diffusion", 0.0);
  const State base = y + ay * dt;
  const State ybar = base + by * (xi * sq);
  const State yp = base + by * sq;
  const State ym = base - by * sq;
  const State byp = b(yp);
  const State bym = b(ym);
  State out = y + (a(ybar) + ay) * (0.5 * dt) + (byp + bym + by * 2.0) * (0.25 * xi * sq) +
              (byp - bym) * (0.25 * (xi * xi - 1.0) * sq);
  if (!platen_detail::is_finite(out))
    throw IntegrationDiverged("platen_step: non-finite state", 0.0);
  return out;
}

}  // namespace noisefid
