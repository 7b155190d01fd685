#include "noisefid/clifford.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace noisefid {

char PrimitiveRotation::axis() const {
  const double m = std::fmod(std::abs(phase), M_PI);
  return (m < 0.25 * M_PI || m > 0.75 * M_PI) ? 'x' : 'y';
}

double CliffordGate::pulse_area() const {
  double a = 0;
  for (const auto& p : decomposition) a += p.angle;
  return a;
}

bool equal_up_to_phase(const Mat2& a, const Mat2& b, double tol) {
  return std::abs(std::abs((a.adjoint() * b).trace()) - 2.0) < tol;
}

Mat2 compose_decomposition(const std::vector<PrimitiveRotation>& prims) {
  Mat2 u = Mat2::Identity();
  for (const auto& p : prims) u = axis_rotation(p.angle, p.phase) * u;
  return u;
}

namespace {

std::vector<CliffordGate> build_group() {
  // Deterministic BFS closure from the identity over the two generators.
  const std::array<Mat2, 2> gens = {axis_rotation(0.5 * M_PI, 0.0),
                                    axis_rotation(0.5 * M_PI, 0.5 * M_PI)};
  std::vector<Mat2> unitaries{Mat2::Identity()};
  for (std::size_t head = 0; head < unitaries.size(); ++head) {
    for (const auto& g : gens) {
      const Mat2 v = g * unitaries[head];
      bool known = false;
      for (const auto& u : unitaries)
        if (equal_up_to_phase(u, v, 1e-9)) {
          known = true;
          break;
        }
      if (!known) unitaries.push_back(v);
    }
  }
  if (unitaries.size() != 24)
    throw std::logic_error("clifford_group: closure did not yield 24 elements");

  // Exhaustive minimal-area decomposition over <= 3 primitives from
  // {pi/2, pi} x {0, pi/2, pi, 3pi/2}; ties break on fewer pulses, then on
  // enumeration order (first found wins).
  std::vector<PrimitiveRotation> prims;
  for (double angle : {0.5 * M_PI, M_PI})
    for (int q = 0; q < 4; ++q) prims.push_back({angle, 0.5 * M_PI * q});

  std::vector<CliffordGate> group(24);
  for (int i = 0; i < 24; ++i) {
    group[i].index = i;
    group[i].unitary = unitaries[i];
  }
  std::vector<double> best_area(24, 1e300);
  std::vector<std::size_t> best_len(24, 99);
  best_area[0] = 0;  // identity: empty decomposition (idle)
  best_len[0] = 0;

  std::vector<std::size_t> idx;
  const auto consider = [&](const std::vector<std::size_t>& combo) {
    Mat2 u = Mat2::Identity();
    double area = 0;
    std::vector<PrimitiveRotation> seq;
    seq.reserve(combo.size());
    for (std::size_t pi_ : combo) {
      u = axis_rotation(prims[pi_].angle, prims[pi_].phase) * u;
      area += prims[pi_].angle;
      seq.push_back(prims[pi_]);
    }
    for (int i = 0; i < 24; ++i) {
      if (!equal_up_to_phase(u, unitaries[i], 1e-9)) continue;
      if (area < best_area[i] - 1e-12 ||
          (std::abs(area - best_area[i]) < 1e-12 && combo.size() < best_len[i])) {
        best_area[i] = area;
        best_len[i] = combo.size();
        group[i].decomposition = seq;
      }
      break;
    }
  };

  for (std::size_t a = 0; a < prims.size(); ++a) {
    consider({a});
    for (std::size_t b = 0; b < prims.size(); ++b) {
      consider({a, b});
      for (std::size_t c = 0; c < prims.size(); ++c) consider({a, b, c});
    }
  }

  for (int i = 1; i < 24; ++i)
    if (group[i].decomposition.empty())
      throw std::logic_error("clifford_group: missing decomposition");
  return group;
}

}  // namespace

const std::vector<CliffordGate>& clifford_group() {
  static const std::vector<CliffordGate> group = build_group();
  return group;
}

int find_clifford(const Mat2& u, double tol) {
  const auto& g = clifford_group();
  for (const auto& c : g)
    if (equal_up_to_phase(c.unitary, u, tol)) return c.index;
  return -1;
}

}  // namespace noisefid
