#pragma once
// Colored control-noise realizations: white noise (WN), Ornstein-Uhlenbeck (OU)
// and integrated Brownian motion (BM), all represented as increment traces
// (dX, dQV) on a uniform grid. dX are phase increments in rad; dQV is the
// quadratic-variation increment of the process (gamma^2 dt for WN/OU, 0 for the
// finite-variation BM path).
//
// Units: gamma is s^-1/2 for WN/OU and s^-3/2 for BM (X = gamma * int W ds);
// kappa is s^-1.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "noisefid/rng.hpp"

namespace noisefid {

enum class NoiseKind { white, ou, brownian };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

struct NoiseParams {
  NoiseKind kind = NoiseKind::ou;
  double gamma = 0.0;      // WN/OU: s^-1/2; BM: s^-3/2
  double kappa = 0.0;      // OU damping rate, s^-1 (ignored otherwise)
  double fine_dt = 1e-6;   // s
  double duration = 200e-6;  // s, integer multiple of fine_dt
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
  std::size_t steps() const;
};

struct NoiseTrace {
  double dt = 0;
  NoiseKind kind = NoiseKind::white;
  std::uint64_t seed = 0;
  std::vector<double> dx;   // increments of X, rad
  std::vector<double> dqv;  // increments of [X], rad^2

  std::size_t size() const { return dx.size(); }
  double duration() const { return dt * static_cast<double>(dx.size()); }
  double total_displacement() const;  // X_T - X_0
  double total_qv() const;
  // X at grid points (size()+1 values, starting at 0).
  std::vector<double> cumulative() const;
};

// n i.i.d. N(0, dt) Wiener increments, deterministic per (seed, stream).
std::vector<double> wiener_increments(std::size_t n, double dt, std::uint64_t seed,
                                      std::uint64_t stream = 0);

// Realization of the configured process on the fine grid. OU uses the exact
// linear-SDE discretization (no Euler bias); BM integrates the Wiener path by
// the trapezoid rule.
NoiseTrace generate_trace(const NoiseParams& params);

// Blockwise aggregation to a coarser grid: dX summed per block (total
// displacement preserved), dQV summed per block.
NoiseTrace coarsen_trace(const NoiseTrace& trace, double coarse_dt);

// CSV serialization: one-line JSON header ("# {...}") with the generation
// parameters, then "index,dX,dQV" rows. Round-trips exactly.
void write_trace_csv(const NoiseTrace& trace, const NoiseParams& params,
                     const std::string& path);
std::pair<NoiseTrace, NoiseParams> read_trace_csv(const std::string& path);

}  // namespace noisefid
