#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include "noisefid/io.hpp"
#include "noisefid/pulse.hpp"

using namespace noisefid;
namespace fs = std::filesystem;

TEST_SUITE("pulse") {

TEST_CASE("constant drive builds a uniform schedule") {
  const auto p = constant_drive(1.0, 200e-6, 1e-6);
  CHECK(p.segments.size() == 200);
  CHECK(p.segment_dt == 1e-6);
  CHECK(p.total_duration() == doctest::Approx(200e-6).epsilon(1e-12));
  CHECK(p.noise_duration == doctest::Approx(200e-6).epsilon(1e-12));
  CHECK(p.noise_segments() == 200);
  for (const auto& s : p.segments) {
    CHECK(s.setpoint == 1.0);
    CHECK(s.detuning == 0.0);
    CHECK(s.phase == 0.0);
    CHECK(s.duration == 1e-6);
  }
  CHECK_NOTHROW(p.validate());
}

TEST_CASE("noise window can cover a prefix only") {
  const auto p = constant_drive(0.8, 200e-6, 1e-6, 60e-6, 2e3, 0.4);
  CHECK(p.noise_duration == doctest::Approx(60e-6));
  CHECK(p.noise_segments() == 60);
  CHECK(p.segments[0].detuning == 2e3);
  CHECK(p.segments[0].phase == 0.4);
  CHECK_NOTHROW(p.validate());

  const auto zero = constant_drive(1.0, 200e-6, 1e-6, 0.0);
  CHECK(zero.noise_segments() == 0);
  CHECK_NOTHROW(zero.validate());
}

TEST_CASE("constant drive rejects off-grid durations") {
  CHECK_THROWS_AS(constant_drive(1.0, 200.5e-6, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(constant_drive(1.0, 200e-6, 1e-6, 30.5e-6), std::invalid_argument);
  CHECK_THROWS_AS(constant_drive(1.0, 200e-6, 1e-6, 300e-6), std::invalid_argument);
  CHECK_THROWS_AS(constant_drive(1.0, 0.0, 1e-6), std::invalid_argument);
  CHECK_THROWS_AS(constant_drive(1.0, 200e-6, 0.0), std::invalid_argument);
}

TEST_CASE("schedule validation catches inconsistent segments") {
  auto p = constant_drive(1.0, 10e-6, 1e-6);
  p.segments[3].duration = 2e-6;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  auto q = constant_drive(1.0, 10e-6, 1e-6);
  q.noise_duration = 3.5e-6;  // off-grid noise window
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}

TEST_CASE("identity and linear calibrations") {
  const auto ident = AmplitudeCalibration::identity();
  CHECK(ident.rabi(2.5e5) == doctest::Approx(2.5e5));
  CHECK(ident.slope(2.5e5) == doctest::Approx(1.0));

  const double rmax = 2.0 * M_PI * 50e3;
  const auto lin = AmplitudeCalibration::linear(rmax);
  CHECK(lin.rabi(1.0) == doctest::Approx(rmax));
  CHECK(lin.rabi(0.5) == doctest::Approx(0.5 * rmax));
  CHECK(lin.slope(0.3) == doctest::Approx(rmax));
  CHECK(apply_amplitude_calibration(lin, 0.25) == doctest::Approx(0.25 * rmax));
  // analytic curves extrapolate beyond setpoint 1
  CHECK(lin.rabi(1.3) == doctest::Approx(1.3 * rmax));
}

TEST_CASE("csv calibration interpolates between knots") {
  const auto path = (fs::temp_directory_path() /
                     ("nf_calib_" + std::to_string(std::rand()) + ".csv"))
                        .string();
  // setpoint -> Rabi in Hz; loader converts to rad/s, (0,0) anchor required
  write_file(path, "setpoint,rabi_hz\n0,0\n0.5,30e3\n1.0,50e3\n");
  const auto cal = AmplitudeCalibration::from_csv(path);
  fs::remove(path);

  CHECK(cal.rabi(0.5) == doctest::Approx(2.0 * M_PI * 30e3).epsilon(1e-12));
  CHECK(cal.rabi(1.0) == doctest::Approx(2.0 * M_PI * 50e3).epsilon(1e-12));
  CHECK(cal.rabi(0.25) == doctest::Approx(2.0 * M_PI * 15e3).epsilon(1e-12));
  CHECK(cal.rabi(0.75) == doctest::Approx(2.0 * M_PI * 40e3).epsilon(1e-12));
  CHECK(cal.slope(0.75) == doctest::Approx(2.0 * M_PI * 40e3).epsilon(1e-12));
  CHECK(cal.rabi(0.0) == doctest::Approx(0.0));
  // tabulated curves refuse to extrapolate
  CHECK_THROWS_AS(cal.rabi(1.2), std::out_of_range);
  CHECK_THROWS_AS(cal.rabi(-0.1), std::out_of_range);
  CHECK_THROWS_AS(cal.slope(1.2), std::out_of_range);
}

TEST_CASE("csv calibration rejects bad files") {
  const auto dir = fs::temp_directory_path();
  const auto bad_header = (dir / "nf_calib_h.csv").string();
  write_file(bad_header, "amp,rabi\n0,0\n1,50e3\n");
  CHECK_THROWS_AS(AmplitudeCalibration::from_csv(bad_header), std::invalid_argument);
  fs::remove(bad_header);

  const auto no_anchor = (dir / "nf_calib_a.csv").string();
  write_file(no_anchor, "setpoint,rabi_hz\n0.5,30e3\n1.0,50e3\n");
  CHECK_THROWS_AS(AmplitudeCalibration::from_csv(no_anchor), std::invalid_argument);
  fs::remove(no_anchor);
}

TEST_CASE("knot calibration validation") {
  CHECK_THROWS_AS(AmplitudeCalibration::from_knots({0.0, 0.5, 0.4}, {0.0, 1.0, 2.0}, false),
                  std::invalid_argument);  // setpoints not increasing
  CHECK_THROWS_AS(AmplitudeCalibration::from_knots({0.0, 0.5, 1.0}, {0.0, 2.0, 1.0}, false),
                  std::invalid_argument);  // rabi not monotone
  CHECK_THROWS_AS(AmplitudeCalibration::from_knots({0.0}, {0.0}, false),
                  std::invalid_argument);  // too few knots
  CHECK_THROWS_AS(AmplitudeCalibration::from_knots({0.0, 1.0}, {0.0, 1.0, 2.0}, false),
                  std::invalid_argument);  // size mismatch

  const auto ok = AmplitudeCalibration::from_knots({0.0, 1.0}, {0.0, 3.0}, true);
  CHECK(ok.rabi(2.0) == doctest::Approx(6.0));  // extrapolation enabled
  CHECK(ok.min_segment == doctest::Approx(400e-9));
}

}  // TEST_SUITE
