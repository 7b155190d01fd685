#pragma once
// Spectral characterization of noise traces: Welch-averaged periodogram of the
// increment-rate signal dX/dt with a Hann window and 50% segment overlap.
// One-sided normalization, so integral(S df) equals the signal variance. White
// noise then shows the flat level 2*gamma^2, BM shows 1/f^2, and OU increments
// show the high-pass gamma^2 f^2/(f^2 + f_k^2) with knee f_k = kappa/(2*pi).

#include <complex>
#include <cstddef>
#include <vector>

#include "noisefid/noise.hpp"

namespace noisefid {

// In-place iterative radix-2 Cooley-Tukey; size must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a, bool inverse = false);

struct PsdEstimate {
  std::vector<double> freq;   // Hz, bins 1..L/2 (DC dropped)
  std::vector<double> power;  // one-sided, units^2 / Hz
  double df = 0;
  std::size_t segment_len = 0;
  int n_segments = 0;
};

// segment_len must be a power of two and fit into every trace.
PsdEstimate welch_psd(const std::vector<const NoiseTrace*>& traces, std::size_t segment_len);
PsdEstimate welch_psd(const std::vector<NoiseTrace>& traces, std::size_t segment_len);

// Least-squares slope of log10(S) vs log10(f) over [fmin, fmax].
double fit_loglog_slope(const PsdEstimate& psd, double fmin, double fmax);

struct KneeFit {
  double knee_hz = 0;
  double amplitude = 0;  // high-frequency plateau
};

// Fits S(f) = A f^2/(f^2 + f_k^2) in log space over [fmin, fmax] by scanning
// f_k on a log grid with parabolic refinement.
KneeFit fit_ou_knee(const PsdEstimate& psd, double fmin, double fmax);

}  // namespace noisefid
