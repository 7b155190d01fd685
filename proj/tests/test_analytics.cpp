#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "noisefid/analytics.hpp"
#include "noisefid/rng.hpp"

using namespace noisefid;

TEST_SUITE("analytics") {

TEST_CASE("tau_kappa reference values and limits") {
  CHECK(tau_kappa(5e3, 200e-6) == doctest::Approx(8.646647167633873e-05).epsilon(1e-14));
  // kappa t << 1: tau -> t (expm1 keeps precision where 1-exp would not)
  CHECK(tau_kappa(1e-6, 1e-4) == doctest::Approx(1e-4).epsilon(1e-9));
  // kappa t >> 1: tau -> 1/(2 kappa)
  CHECK(tau_kappa(5e3, 10.0) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(tau_kappa(5e3, 100e-6) < tau_kappa(5e3, 200e-6));
  CHECK(tau_kappa(5e3, 200e-6) < 200e-6);
  CHECK_THROWS_AS(tau_kappa(0.0, 1e-4), std::invalid_argument);
  CHECK_THROWS_AS(tau_kappa(5e3, -1.0), std::invalid_argument);
}

TEST_CASE("pinned moment values") {
  MomentSpec wn{NoiseKind::white, 6.0, 0.0, 0.0};
  CHECK(mean_fidelity(wn, 200e-6) == doctest::Approx(0.9928515920612215).epsilon(1e-14));
  CHECK(var_fidelity(wn, 200e-6) == doctest::Approx(1.007435674487736e-4).epsilon(1e-12));
  CHECK(std::sqrt(var_fidelity(wn, 200e-6)) ==
        doctest::Approx(0.010037109516627464).epsilon(1e-12));

  MomentSpec ou{NoiseKind::ou, 6.0, 5e3, 0.0};
  CHECK(mean_fidelity(ou, 200e-6) == doctest::Approx(0.9968968764234829).epsilon(1e-14));

  // gamma_bm chosen so the mean hits exactly 3/4 at t = 180 us (E = ln 2)
  MomentSpec bm{NoiseKind::brownian, 4.22230500820383e5, 0.0, 0.0};
  CHECK(noise_energy(bm, 180e-6) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(mean_fidelity(bm, 180e-6) == doctest::Approx(0.75).epsilon(1e-12));

  const auto band = sample_moment_bands(wn, 200e-6, 75);
  CHECK(band.mean == doctest::Approx(0.9928515920612215).epsilon(1e-14));
  CHECK(band.band == doctest::Approx(0.0011589855762621241).epsilon(1e-12));
}

TEST_CASE("noise_energy formulas") {
  MomentSpec wn{NoiseKind::white, 6.0, 0.0, 0.0};
  CHECK(noise_energy(wn, 1e-4) == doctest::Approx(2.0 * 36.0 * 1e-4).epsilon(1e-14));
  MomentSpec ou{NoiseKind::ou, 6.0, 5e3, 0.0};
  CHECK(noise_energy(ou, 2e-4) ==
        doctest::Approx(72.0 * 8.646647167633873e-05).epsilon(1e-13));
  MomentSpec bm{NoiseKind::brownian, 2.0, 0.0, 0.0};
  CHECK(noise_energy(bm, 3e-2) ==
        doctest::Approx((2.0 / 3.0) * 4.0 * 2.7e-5).epsilon(1e-13));
  CHECK(noise_energy(wn, 0.0) == 0.0);
  CHECK_THROWS_AS(noise_energy(wn, -1e-6), std::invalid_argument);
}

TEST_CASE("fidelity law bounds and special points") {
  CHECK(fidelity_from_displacement(0.0, 0.0) == 1.0);
  CHECK(fidelity_from_displacement(0.0, M_PI / 2) == doctest::Approx(0.0));
  CHECK(fidelity_from_displacement(0.0, M_PI) == doctest::Approx(1.0));
  CHECK(fidelity_from_displacement(1.0, 1.234) == doctest::Approx(1.0));
  const double s0 = 0.6;
  CHECK(fidelity_from_displacement(s0, M_PI / 2) == doctest::Approx(s0 * s0));
  for (double x : {0.1, 0.7, 2.9}) {
    const double f = fidelity_from_displacement(s0, x);
    CHECK(f >= s0 * s0 - 1e-15);
    CHECK(f <= 1.0 + 1e-15);
  }
  CHECK_THROWS_AS(fidelity_from_displacement(1.5, 0.0), std::invalid_argument);
}

TEST_CASE("degenerate and limiting behavior") {
  MomentSpec dark{NoiseKind::white, 6.0, 0.0, 1.0};  // S0 = 1: noise invisible
  CHECK(mean_fidelity(dark, 1.0) == doctest::Approx(1.0));
  CHECK(var_fidelity(dark, 1.0) == doctest::Approx(0.0));

  MomentSpec wn{NoiseKind::white, 6.0, 0.0, 0.0};
  CHECK(mean_fidelity(wn, 0.0) == doctest::Approx(1.0));
  CHECK(var_fidelity(wn, 0.0) == doctest::Approx(0.0));
  // strong-noise asymptotes: mean -> 1/2, var -> 1/8
  CHECK(mean_fidelity(wn, 1e3) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(var_fidelity(wn, 1e3) == doctest::Approx(0.125).epsilon(1e-12));
  // monotone decay in t
  double prev = 2.0;
  for (double t : {20e-6, 60e-6, 100e-6, 140e-6, 180e-6}) {
    const double m = mean_fidelity(wn, t);
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("moments match direct gaussian averaging of the law") {
  // Independent oracle: draw dX ~ N(0, E/2) and average the trajectory law.
  const double s0 = 0.6, t = 150e-6;
  MomentSpec spec{NoiseKind::white, 6.0, 0.0, s0};
  const double sigma = std::sqrt(noise_energy(spec, t) / 2.0);

  RandomStream rng(808, 0);
  const int n = 400000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double f = fidelity_from_displacement(s0, sigma * rng.gaussian());
    s1 += f;
    s2 += f * f;
  }
  const double m = s1 / n;
  const double v = s2 / n - m * m;
  const double se_mean = std::sqrt(v / n);
  CHECK(std::abs(m - mean_fidelity(spec, t)) < 5 * se_mean);
  // loose bound for the variance of the sample variance
  CHECK(v == doctest::Approx(var_fidelity(spec, t)).epsilon(0.05));
}

TEST_CASE("spec validation") {
  MomentSpec ou{NoiseKind::ou, 6.0, 0.0, 0.0};
  CHECK_THROWS_AS(ou.validate(), std::invalid_argument);
  MomentSpec neg{NoiseKind::white, -1.0, 0.0, 0.0};
  CHECK_THROWS_AS(neg.validate(), std::invalid_argument);
  MomentSpec s0bad{NoiseKind::white, 1.0, 0.0, 1.5};
  CHECK_THROWS_AS(s0bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(sample_moment_bands(MomentSpec{NoiseKind::white, 6.0, 0.0, 0.0},
                                      1e-4, 1),
                  std::invalid_argument);

  NoiseParams p;
  p.kind = NoiseKind::ou;
  p.gamma = 6.0;
  p.kappa = 5e3;
  const auto m = MomentSpec::from_noise(p, 0.3);
  CHECK(m.kind == NoiseKind::ou);
  CHECK(m.gamma == 6.0);
  CHECK(m.kappa == 5e3);
  CHECK(m.s0 == 0.3);
}

}  // TEST_SUITE
