#include <doctest.h>

#include <cmath>
#include <limits>

#include "noisefid/clifford.hpp"
#include "noisefid/errors.hpp"
#include "noisefid/rb.hpp"
#include "noisefid/rng.hpp"

using namespace noisefid;

TEST_SUITE("rb") {

TEST_CASE("sequences are deterministic and correctly inverted") {
  const auto& group = clifford_group();
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    const auto seq = rb_sequence(20, seed);
    REQUIRE(seq.gates.size() == 20);
    CHECK(rb_sequence(20, seed).gates == seq.gates);

    Mat2 total = Mat2::Identity();
    for (int g : seq.gates) {
      REQUIRE(g >= 0);
      REQUIRE(g < 24);
      total = group[static_cast<std::size_t>(g)].unitary * total;
    }
    const Mat2 closed = group[static_cast<std::size_t>(seq.inversion)].unitary * total;
    CHECK(equal_up_to_phase(closed, Mat2::Identity(), 1e-9));
  }
  CHECK(rb_sequence(20, 1).gates != rb_sequence(20, 2).gates);
  CHECK_THROWS_AS(rb_sequence(0, 1), std::invalid_argument);
}

TEST_CASE("gate draws cover the group roughly uniformly") {
  std::vector<int> counts(24, 0);
  const auto seq = rb_sequence(24000, 7);
  for (int g : seq.gates) counts[static_cast<std::size_t>(g)] += 1;
  for (int c : counts) {
    CHECK(c > 800);  // expectation 1000, generous 6+ sigma band
    CHECK(c < 1200);
  }
}

TEST_CASE("compilation respects the segment grid and setpoint ceiling") {
  const double rabi = 2.0 * M_PI * 117e3, dt = 1e-6;
  const auto seq = rb_sequence(10, 5);
  const auto compiled = compile_sequence(seq, rabi, dt, false);
  CHECK_NOTHROW(compiled.schedule.validate());
  CHECK(compiled.schedule.segment_dt == dt);
  CHECK(compiled.schedule.noise_duration ==
        doctest::Approx(compiled.schedule.total_duration()));

  double area_segments = 0;
  for (const auto& seg : compiled.schedule.segments) {
    CHECK(seg.setpoint >= 0.0);
    CHECK(seg.setpoint <= 1.0 + 1e-12);  // never asks for more than rabi_max
    area_segments += seg.setpoint * rabi * seg.duration;
  }
  // the schedule's integrated rotation equals the decomposed pulse area
  CHECK(area_segments == doctest::Approx(compiled.pulse_area).epsilon(1e-9));

  // composite expansion triples every primitive into a SCROFULOUS triple
  const auto comp = compile_sequence(seq, rabi, dt, true);
  CHECK(comp.pulse_area > 2.5 * compiled.pulse_area);
}

TEST_CASE("average clifford areas match the pinned values") {
  CHECK(average_clifford_area(false) == doctest::Approx(13.0 * M_PI / 12.0).epsilon(1e-10));
  CHECK(average_clifford_area(true) ==
        doctest::Approx(4.419706010742015 * M_PI).epsilon(1e-9));
  // headline comparison: composite average within 15% of 4.46 pi
  CHECK(average_clifford_area(true) / M_PI == doctest::Approx(4.46).epsilon(0.15));
}

TEST_CASE("noiseless rb returns to |0> exactly") {
  RBConfig cfg;
  cfg.lengths = {1, 5, 12};
  cfg.n_sequences = 6;
  cfg.noise.gamma = 0.0;
  cfg.seed = 11;
  for (bool composite : {false, true}) {
    cfg.composite = composite;
    const auto points = run_rb(cfg, std::nullopt);
    REQUIRE(points.size() == 18);
    for (const auto& pt : points) CHECK(pt.p0 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("decay fit recovers exact synthetic parameters") {
  const double d0 = 0.104, d = 6.94e-4;
  std::vector<double> n, p;
  for (int len : {1, 30, 80, 150, 250, 400}) {
    n.push_back(len);
    p.push_back(0.5 + 0.5 * (1.0 - d0) * std::pow(1.0 - d, len));
  }
  const auto fit = fit_rb_decay(n, p);
  CHECK(fit.d0 == doctest::Approx(d0).epsilon(1e-8));
  CHECK(fit.d == doctest::Approx(d).epsilon(1e-6));
  CHECK(fit.f_clifford == doctest::Approx(1.0 - d / 2.0).epsilon(1e-9));
  CHECK(fit.ssr < 1e-16);
}

TEST_CASE("fit stderrs calibrate against binomial shot noise") {
  // Planted decay + normal-approximated binomial noise at 3750 shots per
  // length. With 6 points and 2 parameters the interval statistic is t with 4
  // dof, so 3-stderr coverage is ~96% nominally; 90% over 200 replicates still
  // rejects stderrs that are mis-scaled by a factor of ~2.
  const double d0 = 0.104, d = 6.94e-4;
  const std::vector<int> lengths{1, 30, 80, 150, 250, 400};
  const int shots = 3750;
  RandomStream rng(31337, 0);
  int cover_d = 0, cover_d0 = 0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> n, p;
    for (int len : lengths) {
      const double mean = 0.5 + 0.5 * (1.0 - d0) * std::pow(1.0 - d, len);
      const double se = std::sqrt(mean * (1.0 - mean) / shots);
      n.push_back(len);
      p.push_back(mean + se * rng.gaussian());
    }
    const auto fit = fit_rb_decay(n, p);
    if (std::abs(fit.d - d) <= 3.0 * fit.d_err) ++cover_d;
    if (std::abs(fit.d0 - d0) <= 3.0 * fit.d0_err) ++cover_d0;
  }
  CHECK(cover_d >= reps * 90 / 100);
  CHECK(cover_d0 >= reps * 90 / 100);
}

TEST_CASE("fit input validation") {
  CHECK_THROWS_AS(fit_rb_decay({1.0, 2.0}, {0.9}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rb_decay({1.0, 2.0, 1.0, 2.0}, {0.9, 0.8, 0.9, 0.8}),
                  std::invalid_argument);  // only 2 distinct lengths
  // NaN points (all atoms absent) are dropped before fitting
  std::vector<RBPoint> pts;
  for (int len : {1, 50, 120, 300}) {
    pts.push_back({len, 0, 0.5 + 0.5 * 0.9 * std::pow(1.0 - 2e-3, len)});
    pts.push_back({len, 1, std::numeric_limits<double>::quiet_NaN()});
  }
  const auto fit = fit_rb_decay(pts);
  CHECK(fit.d == doctest::Approx(2e-3).epsilon(1e-4));
}

TEST_CASE("rb config validation") {
  RBConfig cfg;
  cfg.lengths = {};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.lengths = {0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.lengths = {1, 10};
  cfg.n_sequences = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.n_sequences = 5;
  cfg.segment_dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("readout model produces array-averaged probabilities") {
  RBConfig cfg;
  cfg.lengths = {1, 4, 9};
  cfg.n_sequences = 4;
  cfg.n_meas = 200;
  cfg.noise.gamma = 0.0;
  cfg.seed = 21;

  ArrayModel model;
  model.n_sites = 30;
  model.n_meas = 1;  // overridden by cfg.n_meas
  model.p_c = 1.0;
  model.p01 = 0.0;
  model.p10 = 0.1;

  const auto points = run_rb(cfg, model);
  REQUIRE(points.size() == 12);
  // noiseless p0_row is all 1; with p10 = 0.1 the read-back mean sits near 0.9
  double m = 0;
  for (const auto& pt : points) m += pt.p0;
  m /= static_cast<double>(points.size());
  CHECK(m == doctest::Approx(0.9).epsilon(0.02));
}

}  // TEST_SUITE
