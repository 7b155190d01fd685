#include "noisefid/psd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace noisefid {

void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw std::invalid_argument("fft_radix2: size must be a power of two");

  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }

  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
}

PsdEstimate welch_psd(const std::vector<const NoiseTrace*>& traces, std::size_t segment_len) {
  if (traces.empty()) throw std::invalid_argument("welch_psd: no traces");
  if (segment_len == 0 || (segment_len & (segment_len - 1)) != 0)
    throw std::invalid_argument("welch_psd: segment_len must be a power of two");
  const double dt = traces.front()->dt;
  const std::size_t n = traces.front()->size();
  for (const auto* t : traces) {
    if (t->size() != n || t->dt != dt)
      throw std::invalid_argument("welch_psd: traces must share length and dt");
  }
  if (segment_len > n) throw std::invalid_argument("welch_psd: segment longer than trace");

  const std::size_t L = segment_len;
  const double fs = 1.0 / dt;

  // periodic Hann window
  std::vector<double> w(L);
  double wsum2 = 0;
  for (std::size_t k = 0; k < L; ++k) {
    w[k] = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(k) / static_cast<double>(L)));
    wsum2 += w[k] * w[k];
  }

  PsdEstimate out;
  out.segment_len = L;
  out.df = fs / static_cast<double>(L);
  out.power.assign(L / 2, 0.0);
  out.freq.resize(L / 2);
  for (std::size_t j = 0; j < L / 2; ++j)
    out.freq[j] = static_cast<double>(j + 1) * out.df;

  std::vector<std::complex<double>> buf(L);
  int segments = 0;
  for (const auto* t : traces) {
    for (std::size_t start = 0; start + L <= n; start += L / 2) {  // 50% overlap
      for (std::size_t k = 0; k < L; ++k)
        buf[k] = w[k] * (t->dx[start + k] / dt);
      fft_radix2(buf);
      // One-sided: bins 1..L/2-1 doubled, Nyquist (L/2) not. DC dropped.
      for (std::size_t j = 1; j <= L / 2; ++j) {
        const double scale = (j == L / 2) ? 1.0 : 2.0;
        out.power[j - 1] += scale * std::norm(buf[j]) / (fs * wsum2);
      }
      ++segments;
    }
  }
  if (segments == 0) throw std::invalid_argument("welch_psd: no full segment fits");
  for (auto& p : out.power) p /= segments;
  out.n_segments = segments;
  return out;
}

PsdEstimate welch_psd(const std::vector<NoiseTrace>& traces, std::size_t segment_len) {
  std::vector<const NoiseTrace*> ptrs;
  ptrs.reserve(traces.size());
  for (const auto& t : traces) ptrs.push_back(&t);
  return welch_psd(ptrs, segment_len);
}

namespace {

// Collect (log10 f, log10 S) pairs inside the band.
void band_points(const PsdEstimate& psd, double fmin, double fmax,
                 std::vector<double>& lx, std::vector<double>& ly) {
  for (std::size_t j = 0; j < psd.freq.size(); ++j) {
    const double f = psd.freq[j];
    if (f < fmin || f > fmax || psd.power[j] <= 0) continue;
    lx.push_back(std::log10(f));
    ly.push_back(std::log10(psd.power[j]));
  }
  if (lx.size() < 4)
    throw std::invalid_argument("psd fit: fewer than 4 bins in the requested band");
}

}  // namespace

double fit_loglog_slope(const PsdEstimate& psd, double fmin, double fmax) {
  std::vector<double> lx, ly;
  band_points(psd, fmin, fmax, lx, ly);
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return sxy / sxx;
}

KneeFit fit_ou_knee(const PsdEstimate& psd, double fmin, double fmax) {
  std::vector<double> lx, ly;
  band_points(psd, fmin, fmax, lx, ly);

  // For fixed f_k, log-amplitude is the mean residual -> 1-D scan over log f_k.
  auto ssr_at = [&](double logfk) {
    const double fk2 = std::pow(10.0, 2.0 * logfk);
    double mean = 0;
    std::vector<double> shape(lx.size());
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double f2 = std::pow(10.0, 2.0 * lx[i]);
      shape[i] = std::log10(f2 / (f2 + fk2));
      mean += ly[i] - shape[i];
    }
    mean /= static_cast<double>(lx.size());
    double ssr = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double r = ly[i] - shape[i] - mean;
      ssr += r * r;
    }
    return std::pair{ssr, mean};
  };

  const double lo = std::log10(fmin), hi = std::log10(fmax);
  const int steps = 400;
  double best_l = lo, best_ssr = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double l = lo + (hi - lo) * i / steps;
    const double ssr = ssr_at(l).first;
    if (ssr < best_ssr) {
      best_ssr = ssr;
      best_l = l;
    }
  }
  // parabolic refinement around the best grid point
  const double h = (hi - lo) / steps;
  const double sm = ssr_at(best_l - h).first, sp = ssr_at(best_l + h).first;
  const double denom = sm - 2.0 * best_ssr + sp;
  double l = best_l;
  if (denom > 0) l = best_l + 0.5 * h * (sm - sp) / denom;

  KneeFit fit;
  fit.knee_hz = std::pow(10.0, l);
  fit.amplitude = std::pow(10.0, ssr_at(l).second);
  return fit;
}

}  // namespace noisefid
