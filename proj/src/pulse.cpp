#include "noisefid/pulse.hpp"

#include <cmath>
#include <stdexcept>

#include "noisefid/io.hpp"

namespace noisefid {

double PulseSchedule::total_duration() const {
  return segment_dt * static_cast<double>(segments.size());
}

std::size_t PulseSchedule::noise_segments() const {
  return static_cast<std::size_t>(std::llround(noise_duration / segment_dt));
}

void PulseSchedule::validate() const {
  if (segments.empty()) throw std::invalid_argument("pulse: empty schedule");
  if (!(segment_dt > 0)) throw std::invalid_argument("pulse: segment_dt must be > 0");
  for (const auto& s : segments) {
    if (std::abs(s.duration - segment_dt) > 1e-12 * segment_dt)
      throw std::invalid_argument("pulse: segment duration off the uniform grid");
    if (!std::isfinite(s.setpoint) || !std::isfinite(s.detuning) || !std::isfinite(s.phase))
      throw std::invalid_argument("pulse: non-finite segment parameters");
  }
  if (noise_duration < -1e-15 || noise_duration > total_duration() + 1e-12 * segment_dt)
    throw std::invalid_argument("pulse: noise_duration outside [0, total_duration]");
  const double ratio = noise_duration / segment_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6)
    throw std::invalid_argument("pulse: noise_duration must be a multiple of segment_dt");
}

PulseSchedule constant_drive(double setpoint, double duration, double segment_dt,
                             double noise_duration, double detuning, double phase) {
  PulseSchedule p;
  p.segment_dt = segment_dt;
  const auto n = static_cast<std::size_t>(std::llround(duration / segment_dt));
  if (n == 0 || std::abs(duration - static_cast<double>(n) * segment_dt) > 1e-9 * duration)
    throw std::invalid_argument("constant_drive: duration must be a multiple of segment_dt");
  p.segments.assign(n, PulseSegment{setpoint, detuning, phase, segment_dt});
  p.noise_duration = noise_duration < 0 ? p.total_duration() : noise_duration;
  p.validate();
  return p;
}

AmplitudeCalibration AmplitudeCalibration::identity() {
  return from_knots({0.0, 1.0}, {0.0, 1.0}, true);
}

AmplitudeCalibration AmplitudeCalibration::linear(double rabi_max_rad) {
  if (!(rabi_max_rad > 0)) throw std::invalid_argument("calibration: rabi_max must be > 0");
  return from_knots({0.0, 1.0}, {0.0, rabi_max_rad}, true);
}

AmplitudeCalibration AmplitudeCalibration::from_csv(const std::string& path) {
  const Table t = read_table_csv(path);
  if (t.columns.size() != 2 || t.columns[0] != "setpoint" || t.columns[1] != "rabi_hz")
    throw std::invalid_argument("calibration CSV must have columns setpoint,rabi_hz: " + path);
  std::vector<double> s, r;
  for (const auto& row : t.rows) {
    s.push_back(row[0]);
    r.push_back(row[1] * 2.0 * M_PI);  // Hz -> rad/s
  }
  return from_knots(std::move(s), std::move(r), false);
}

AmplitudeCalibration AmplitudeCalibration::from_knots(std::vector<double> setpoints,
                                                      std::vector<double> rabi_rad,
                                                      bool extrapolate) {
  if (setpoints.size() != rabi_rad.size() || setpoints.size() < 2)
    throw std::invalid_argument("calibration: need >= 2 knots");
  if (setpoints.front() != 0.0 || rabi_rad.front() != 0.0)
    throw std::invalid_argument("calibration: curve must be anchored at (0, 0)");
  for (std::size_t i = 1; i < setpoints.size(); ++i) {
    if (!(setpoints[i] > setpoints[i - 1]))
      throw std::invalid_argument("calibration: setpoints must be strictly increasing");
    if (rabi_rad[i] < rabi_rad[i - 1])
      throw std::invalid_argument("calibration: curve must be monotone non-decreasing");
  }
  AmplitudeCalibration c;
  c.s_ = std::move(setpoints);
  c.r_ = std::move(rabi_rad);
  c.extrapolate_ = extrapolate;
  return c;
}

double AmplitudeCalibration::rabi(double setpoint) const {
  if (setpoint < 0.0)
    throw std::out_of_range("calibration: negative setpoint");
  if (setpoint > s_.back()) {
    if (!extrapolate_)
      throw std::out_of_range("calibration: setpoint above tabulated domain");
    const std::size_t i = s_.size() - 1;
    const double sl = (r_[i] - r_[i - 1]) / (s_[i] - s_[i - 1]);
    return r_[i] + sl * (setpoint - s_[i]);
  }
  auto it = std::upper_bound(s_.begin(), s_.end(), setpoint);
  const std::size_t i = std::max<std::size_t>(1, static_cast<std::size_t>(it - s_.begin()));
  const std::size_t hi = std::min(i, s_.size() - 1);
  const double w = (setpoint - s_[hi - 1]) / (s_[hi] - s_[hi - 1]);
  return r_[hi - 1] + w * (r_[hi] - r_[hi - 1]);
}

double AmplitudeCalibration::slope(double setpoint) const {
  if (setpoint < 0.0) throw std::out_of_range("calibration: negative setpoint");
  std::size_t hi = s_.size() - 1;
  if (setpoint <= s_.back()) {
    auto it = std::upper_bound(s_.begin(), s_.end(), setpoint);
    hi = std::min(std::max<std::size_t>(1, static_cast<std::size_t>(it - s_.begin())),
                  s_.size() - 1);
  } else if (!extrapolate_) {
    throw std::out_of_range("calibration: setpoint above tabulated domain");
  }
  return (r_[hi] - r_[hi - 1]) / (s_[hi] - s_[hi - 1]);
}

double apply_amplitude_calibration(const AmplitudeCalibration& calib, double setpoint) {
  return calib.rabi(setpoint);
}

}  // namespace noisefid
