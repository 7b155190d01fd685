#include "noisefid/sse.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

#include "noisefid/errors.hpp"
#include "noisefid/platen.hpp"

namespace noisefid {

namespace {

const std::complex<double> I1(0.0, 1.0);

void check_segment_duration(const PulseSchedule& pulse, const AmplitudeCalibration& calib) {
  if (pulse.segment_dt < calib.min_segment - 1e-15)
    throw ConstraintViolation("pulse segment shorter than the calibration's min_segment");
}

// Platen integration of the noise part of one segment: drift a = -q/2 psi,
// diffusion b = -i sigma/sqrt(ddt) S psi with q = dqv/ddt, xi = dx/sigma.
// Substeps keep each per-step rotation below opts.substep_dx.
void noise_steps(Vec2& psi, const Mat2& s_op, double dx, double dqv, double dt,
                 const IntegratorOptions& opts, double& max_drift) {
  const int m = std::max(1, static_cast<int>(std::ceil(std::abs(dx) / opts.substep_dx)));
  const double ddx = dx / m;
  const double ddqv = dqv / m;
  const double ddt = dt / m;
  const double qrate = ddqv / ddt;

  double bscale, xi;
  if (ddqv > 0) {
    const double sigma = std::sqrt(ddqv);
    bscale = sigma / std::sqrt(ddt);
    xi = ddx / sigma;
  } else {
    // Finite-variation path (BM): no quadratic variation, so the diffusion
    // support collapses and the step is the plain phase increment.
    bscale = ddx / std::sqrt(ddt);
    xi = 1.0;
  }

  const auto drift = [&](const Vec2& v) -> Vec2 { return v * (-0.5 * qrate); };
  const auto diff = [&](const Vec2& v) -> Vec2 { return (s_op * v) * (-I1 * bscale); };

  for (int k = 0; k < m; ++k) {
    psi = platen_step(psi, drift, diff, ddt, xi);
    const double n = psi.norm();
    max_drift = std::max(max_drift, std::abs(n - 1.0));
    psi /= n;
  }
}

}  // namespace

QubitState evolve_ideal(const PulseSchedule& pulse, const AmplitudeCalibration& calib,
                        const QubitState& state0, double site_scale) {
  pulse.validate();
  check_segment_duration(pulse, calib);
  if (!(site_scale > 0)) throw std::invalid_argument("evolve_ideal: site_scale must be > 0");

  Vec2 psi = state0.amp;
  // Schedules repeat segments (constant drive, primitive runs); memoize.
  double c_omega = 0, c_det = 0, c_phase = 0, c_dur = -1;
  Mat2 u;
  for (const auto& seg : pulse.segments) {
    const double omega = site_scale * calib.rabi(seg.setpoint);
    if (c_dur != seg.duration || c_omega != omega || c_det != seg.detuning ||
        c_phase != seg.phase) {
      u = drive_propagator(omega, seg.detuning, seg.phase, seg.duration);
      c_omega = omega;
      c_det = seg.detuning;
      c_phase = seg.phase;
      c_dur = seg.duration;
    }
    psi = u * psi;
  }
  QubitState out{psi};
  out.renormalize();
  return out;
}

IntegrationResult integrate_sse(const PulseSchedule& pulse, const AmplitudeCalibration& calib,
                                const NoiseTrace& trace, const QubitState& state0,
                                double site_scale, const IntegratorOptions& opts) {
  pulse.validate();
  check_segment_duration(pulse, calib);
  if (!(site_scale > 0)) throw std::invalid_argument("integrate_sse: site_scale must be > 0");
  const std::size_t n_noise = pulse.noise_segments();
  if (n_noise > 0) {
    if (std::abs(trace.dt - pulse.segment_dt) > 1e-9 * pulse.segment_dt)
      throw std::invalid_argument("integrate_sse: trace.dt must equal pulse.segment_dt");
    if (trace.size() < n_noise)
      throw std::invalid_argument("integrate_sse: trace does not cover the noise window");
  }

  IntegrationResult res;
  Vec2 psi = state0.amp;
  // Memoized per-segment operators; constant-drive schedules hit every time.
  double c_omega = 0, c_det = 0, c_phase = 0, c_dur = -1;
  Mat2 u_full, u_half, s_op;
  const auto refresh = [&](double omega, const PulseSegment& seg) {
    if (c_dur == seg.duration && c_omega == omega && c_det == seg.detuning &&
        c_phase == seg.phase)
      return;
    u_full = drive_propagator(omega, seg.detuning, seg.phase, seg.duration);
    u_half = drive_propagator(omega, seg.detuning, seg.phase, 0.5 * seg.duration);
    s_op = axis_operator(seg.phase);
    c_omega = omega;
    c_det = seg.detuning;
    c_phase = seg.phase;
    c_dur = seg.duration;
  };
  for (std::size_t k = 0; k < pulse.segments.size(); ++k) {
    const auto& seg = pulse.segments[k];
    const double omega = site_scale * calib.rabi(seg.setpoint);

    double dx = 0, dqv = 0;
    if (k < n_noise) {
      dx = trace.dx[k];
      dqv = trace.dqv[k];
      if (opts.noise_mode == IntegratorOptions::NoiseMode::setpoint) {
        // Setpoint-additive noise: linearize through the calibration response.
        const double sl = calib.slope(seg.setpoint);
        dx *= sl;
        dqv *= sl * sl;
      }
    }

    refresh(omega, seg);
    if (dx == 0.0 && dqv == 0.0) {
      psi = u_full * psi;
      continue;
    }
    psi = u_half * psi;
    noise_steps(psi, s_op, dx, dqv, seg.duration, opts, res.max_norm_drift);
    psi = u_half * psi;
  }

  if (res.max_norm_drift > opts.norm_tol)
    throw IntegrationDiverged("integrate_sse: norm drift exceeded tolerance",
                              res.max_norm_drift);
  res.state = QubitState{psi};
  res.state.renormalize();
  return res;
}

}  // namespace noisefid
