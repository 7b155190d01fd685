#include "noisefid/scrofulous.hpp"

#include <cmath>
#include <stdexcept>

#include "noisefid/errors.hpp"

namespace noisefid {

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// First minimum of sinc on (0, 2 pi); theta1 solutions live in (0, this].
constexpr double kSincMinArg = 4.493409457909064;

}  // namespace

std::vector<PrimitiveRotation> scrofulous(double target_angle, double target_phase) {
  if (!(target_angle > 0.0) || !(target_angle < 2.0 * M_PI))
    throw std::invalid_argument("scrofulous: target_angle must lie in (0, 2*pi)");

  const double rhs = (2.0 / M_PI) * std::cos(0.5 * target_angle);
  if (rhs < sinc(kSincMinArg))
    throw ConstraintViolation("scrofulous: no composite exists for this target angle");

  // Bisection for sinc(theta1) = rhs; sinc is strictly decreasing on (0, min].
  double lo = 1e-12, hi = kSincMinArg;
  if (sinc(lo) - rhs < 0)
    throw ConstraintViolation("scrofulous: target angle outside the solvable branch");
  for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((sinc(mid) - rhs >= 0) ? lo : hi) = mid;
  }
  const double theta1 = 0.5 * (lo + hi);
  if (std::abs(sinc(theta1) - rhs) > 1e-12)
    throw FitFailed("scrofulous: transcendental solve did not reach 1e-12");

  double c1 = -M_PI * std::cos(theta1) / (2.0 * theta1 * std::sin(0.5 * target_angle));
  if (std::abs(c1) > 1.0 + 1e-9)
    throw ConstraintViolation("scrofulous: phase equation has no solution");
  c1 = std::clamp(c1, -1.0, 1.0);
  const double phi1 = std::acos(c1);
  const double phi2 = phi1 - std::acos(std::clamp(-M_PI / (2.0 * theta1), -1.0, 1.0));

  return {{theta1, phi1 + target_phase},
          {M_PI, phi2 + target_phase},
          {theta1, phi1 + target_phase}};
}

}  // namespace noisefid
