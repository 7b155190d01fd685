#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "noisefid/errors.hpp"
#include "noisefid/noise.hpp"
#include "noisefid/pulse.hpp"
#include "noisefid/sse.hpp"

using namespace noisefid;

namespace {

const double kRabi = 2.0 * M_PI * 50e3;  // rad/s

AmplitudeCalibration calib() { return AmplitudeCalibration::linear(kRabi); }

NoiseParams params_for(NoiseKind kind, double duration) {
  NoiseParams p;
  p.kind = kind;
  p.fine_dt = 1e-6;
  p.duration = duration;
  switch (kind) {
    case NoiseKind::white: p.gamma = 6.0; break;
    case NoiseKind::ou: p.gamma = 6.0; p.kappa = 5e3; break;
    case NoiseKind::brownian: p.gamma = 4.22230500820383e5; break;
  }
  return p;
}

// Commuting case (resonant x drive, S = sx): the SSE solves in closed form to
// psi = U_ideal exp(-i X sx) psi0, so F = cos^2 X + S0^2 sin^2 X with X the
// summed displacement over the noise window.
double closed_form_fidelity(double x, double s0) {
  const double c = std::cos(x), s = std::sin(x);
  return c * c + s0 * s0 * s * s;
}

}  // namespace

TEST_SUITE("sse") {

TEST_CASE("zero noise reproduces the ideal propagation") {
  const auto pulse = constant_drive(1.0, 200e-6, 1e-6);
  const auto cal = calib();

  NoiseTrace zero;
  zero.dt = 1e-6;
  zero.kind = NoiseKind::white;
  zero.dx.assign(200, 0.0);
  zero.dqv.assign(200, 0.0);

  const auto res = integrate_sse(pulse, cal, zero, QubitState::ket0());
  const auto ideal = evolve_ideal(pulse, cal, QubitState::ket0());
  CHECK(fidelity(res.state, ideal) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(res.max_norm_drift == 0.0);

  // empty noise window: any trace is accepted, result is ideal
  const auto quiet = constant_drive(1.0, 200e-6, 1e-6, 0.0);
  const auto res2 = integrate_sse(quiet, cal, NoiseTrace{}, QubitState::ket0());
  CHECK(fidelity(res2.state, ideal) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("per-trajectory fidelity matches the commuting closed form") {
  const auto pulse = constant_drive(1.0, 200e-6, 1e-6);
  const auto cal = calib();
  const auto ket0 = QubitState::ket0();
  const auto tilted = QubitState::from_amplitudes(std::cos(M_PI / 8), std::sin(M_PI / 8));
  const double s0_tilted = std::sin(M_PI / 4);

  for (auto kind : {NoiseKind::white, NoiseKind::ou, NoiseKind::brownian}) {
    auto p = params_for(kind, 200e-6);
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
      p.seed = 100 + static_cast<std::uint64_t>(i);
      const auto tr = generate_trace(p);
      const double x = tr.total_displacement();

      const auto res = integrate_sse(pulse, cal, tr, ket0);
      const auto ideal = evolve_ideal(pulse, cal, ket0);
      worst = std::max(worst, std::abs(fidelity(res.state, ideal) -
                                       closed_form_fidelity(x, 0.0)));

      if (i < 40) {  // also exercise a state with S0 != 0
        const auto rest = integrate_sse(pulse, cal, tr, tilted);
        const auto idealt = evolve_ideal(pulse, cal, tilted);
        worst = std::max(worst, std::abs(fidelity(rest.state, idealt) -
                                         closed_form_fidelity(x, s0_tilted)));
      }
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("noise window shorter than the pulse uses the partial displacement") {
  const auto pulse = constant_drive(1.0, 200e-6, 1e-6, 60e-6);
  const auto cal = calib();
  auto p = params_for(NoiseKind::white, 200e-6);
  p.seed = 4242;
  const auto tr = generate_trace(p);  // longer than the window: extra rows ignored

  double x = 0;
  for (int k = 0; k < 60; ++k) x += tr.dx[static_cast<std::size_t>(k)];

  const auto res = integrate_sse(pulse, cal, tr, QubitState::ket0());
  const auto ideal = evolve_ideal(pulse, cal, QubitState::ket0());
  CHECK(fidelity(res.state, ideal) ==
        doctest::Approx(closed_form_fidelity(x, 0.0)).epsilon(1e-6));
}

TEST_CASE("zero-padded trace equals an explicit noise window") {
  const auto cal = calib();
  auto p = params_for(NoiseKind::ou, 60e-6);
  p.seed = 7;
  const auto head = generate_trace(p);

  NoiseTrace padded = head;
  padded.dx.resize(200, 0.0);
  padded.dqv.resize(200, 0.0);

  const auto windowed = constant_drive(1.0, 200e-6, 1e-6, 60e-6);
  const auto full = constant_drive(1.0, 200e-6, 1e-6);
  const auto ra = integrate_sse(windowed, cal, head, QubitState::ket0());
  const auto rb = integrate_sse(full, cal, padded, QubitState::ket0());
  CHECK(ra.state.amp == rb.state.amp);  // bitwise: identical operation sequence
  CHECK(ra.max_norm_drift == rb.max_norm_drift);
}

TEST_CASE("sx eigenstate is dark to the noise") {
  const auto pulse = constant_drive(1.0, 200e-6, 1e-6);
  const auto cal = calib();
  const auto plus = QubitState::from_amplitudes(1.0, 1.0);  // S0 = 1
  auto p = params_for(NoiseKind::white, 200e-6);
  for (int i = 0; i < 20; ++i) {
    p.seed = 900 + static_cast<std::uint64_t>(i);
    const auto res = integrate_sse(pulse, cal, generate_trace(p), plus);
    const auto ideal = evolve_ideal(pulse, cal, plus);
    CHECK(fidelity(res.state, ideal) > 1.0 - 1e-8);
  }
}

TEST_CASE("miscalibrated site drops fidelity by the rotation-angle error") {
  // 200 us at 50 kHz is a 20 pi rotation; a 0.14% amplitude error leaves the
  // overlap cos(0.0014 * 10 pi), i.e. an infidelity of sin^2(0.0014 * 10 pi).
  const auto pulse = constant_drive(1.0, 200e-6, 1e-6, 0.0);
  const auto cal = calib();
  const auto ideal = evolve_ideal(pulse, cal, QubitState::ket0());
  const auto res = integrate_sse(pulse, cal, NoiseTrace{}, QubitState::ket0(), 1.0014);
  const double drop = 1.0 - fidelity(res.state, ideal);
  CHECK(drop == doctest::Approx(1.933195428413767e-3).epsilon(1e-9));
}

TEST_CASE("norm drift is tracked and small") {
  const auto pulse = constant_drive(1.0, 200e-6, 1e-6);
  const auto cal = calib();
  auto p = params_for(NoiseKind::white, 200e-6);
  p.seed = 31;
  const auto tr = generate_trace(p);
  const auto res = integrate_sse(pulse, cal, tr, QubitState::ket0());
  CHECK(res.max_norm_drift > 0.0);
  CHECK(res.max_norm_drift < 1e-4);

  IntegratorOptions strict;
  strict.norm_tol = 1e-12;
  CHECK_THROWS_AS(integrate_sse(pulse, cal, tr, QubitState::ket0(), 1.0, strict),
                  IntegrationDiverged);
}

TEST_CASE("setpoint-mode noise is the slope-scaled phase noise") {
  const auto pulse = constant_drive(0.8, 200e-6, 1e-6);
  const auto cal = calib();
  auto p = params_for(NoiseKind::ou, 200e-6);
  p.gamma = 1e-3;  // setpoint-units trace: keep the linearized excursion small
  p.seed = 55;
  const auto tr = generate_trace(p);

  IntegratorOptions sp;
  sp.noise_mode = IntegratorOptions::NoiseMode::setpoint;
  const auto res_sp = integrate_sse(pulse, cal, tr, QubitState::ket0(), 1.0, sp);

  const double sl = cal.slope(0.8);
  const double sl2 = sl * sl;
  NoiseTrace scaled = tr;
  for (auto& d : scaled.dx) d *= sl;
  for (auto& q : scaled.dqv) q *= sl2;
  const auto res_ph = integrate_sse(pulse, cal, scaled, QubitState::ket0());
  CHECK(res_sp.state.amp == res_ph.state.amp);
  CHECK(res_sp.max_norm_drift == res_ph.max_norm_drift);
}

TEST_CASE("input validation") {
  const auto cal = calib();
  const auto pulse = constant_drive(1.0, 200e-6, 1e-6);

  auto p = params_for(NoiseKind::white, 200e-6);
  p.seed = 1;
  const auto tr = generate_trace(p);

  SUBCASE("site_scale must be positive") {
    CHECK_THROWS_AS(integrate_sse(pulse, cal, tr, QubitState::ket0(), 0.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(evolve_ideal(pulse, cal, QubitState::ket0(), -1.0),
                    std::invalid_argument);
  }
  SUBCASE("trace grid must match the pulse grid") {
    auto p2 = params_for(NoiseKind::white, 200e-6);
    p2.fine_dt = 2e-6;
    const auto wrong_dt = generate_trace(p2);
    CHECK_THROWS_AS(integrate_sse(pulse, cal, wrong_dt, QubitState::ket0()),
                    std::invalid_argument);
  }
  SUBCASE("trace must cover the noise window") {
    auto p3 = params_for(NoiseKind::white, 100e-6);
    const auto short_tr = generate_trace(p3);
    CHECK_THROWS_AS(integrate_sse(pulse, cal, short_tr, QubitState::ket0()),
                    std::invalid_argument);
  }
  SUBCASE("segments shorter than the hardware floor are rejected") {
    const auto fast = constant_drive(1.0, 2e-6, 2e-7);
    NoiseTrace t;
    t.dt = 2e-7;
    t.dx.assign(10, 0.0);
    t.dqv.assign(10, 0.0);
    CHECK_THROWS_AS(integrate_sse(fast, cal, t, QubitState::ket0()), ConstraintViolation);
    CHECK_THROWS_AS(evolve_ideal(fast, cal, QubitState::ket0()), ConstraintViolation);
  }
}

}  // TEST_SUITE
