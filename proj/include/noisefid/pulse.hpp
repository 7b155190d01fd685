#pragma once
// Piecewise-constant drive schedules and the amplitude calibration mapping
// dimensionless setpoints to Rabi frequency. The noise window [0, noise_duration]
// may end before the pulse does (variable-t sweeps inject noise into a prefix of
// the schedule only).

#include <string>
#include <vector>

namespace noisefid {

struct PulseSegment {
  double setpoint = 0;   // dimensionless amplitude, fed through the calibration
  double detuning = 0;   // rad/s
  double phase = 0;      // drive axis in the equatorial plane, rad (0 = x, pi/2 = y)
  double duration = 0;   // s, equal to the schedule's segment_dt
};

struct PulseSchedule {
  std::vector<PulseSegment> segments;
  double segment_dt = 1e-6;     // uniform grid, s
  double noise_duration = 0;    // s, multiple of segment_dt, <= total_duration

  double total_duration() const;
  std::size_t noise_segments() const;
  void validate() const;  // throws std::invalid_argument
};

// Constant-amplitude resonant-frame schedule; noise_duration < 0 means the full pulse.
PulseSchedule constant_drive(double setpoint, double duration, double segment_dt,
                             double noise_duration = -1.0, double detuning = 0.0,
                             double phase = 0.0);

class AmplitudeCalibration {
 public:
  // Identity curve: setpoint interpreted directly as Rabi frequency in rad/s.
  static AmplitudeCalibration identity();
  // Linear curve through (1, rabi_max): rabi = setpoint * rabi_max, rad/s.
  static AmplitudeCalibration linear(double rabi_max_rad);
  // Two-column CSV "setpoint,rabi_hz" (monotone, anchored at (0,0)); evaluation
  // outside the tabulated domain throws std::out_of_range.
  static AmplitudeCalibration from_csv(const std::string& path);
  static AmplitudeCalibration from_knots(std::vector<double> setpoints,
                                         std::vector<double> rabi_rad, bool extrapolate);

  double rabi(double setpoint) const;   // rad/s; exact at knots
  double slope(double setpoint) const;  // local d(rabi)/d(setpoint), rad/s
  double min_segment = 400e-9;          // hardware floor on segment duration, s

 private:
  std::vector<double> s_, r_;  // knots
  bool extrapolate_ = false;   // analytic curves continue past the last knot
};

double apply_amplitude_calibration(const AmplitudeCalibration& calib, double setpoint);

}  // namespace noisefid
