#include "noisefid/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>
#include <omp.h>

#include "noisefid/errors.hpp"
#include "noisefid/io.hpp"

namespace noisefid {

void ArrayModel::validate() const {
  if (n_sites < 1 || n_meas < 1)
    throw std::invalid_argument("ArrayModel: n_sites and n_meas must be >= 1");
  for (double p : {p_c, p01, p10})
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("ArrayModel: probabilities must lie in [0, 1]");
  if (!site_scales.empty()) {
    if (static_cast<int>(site_scales.size()) != n_sites)
      throw std::invalid_argument("ArrayModel: site_scales size must equal n_sites");
    double mean = 0;
    for (double s : site_scales) mean += s;
    mean /= static_cast<double>(site_scales.size());
    if (std::abs(mean - 1.0) > 1e-6)
      throw std::invalid_argument("ArrayModel: site_scales mean must be 1 within 1e-6");
  }
}

std::vector<double> make_site_scales(int n_sites, double cv, std::uint64_t seed) {
  if (n_sites < 1) throw std::invalid_argument("make_site_scales: n_sites must be >= 1");
  if (!(cv >= 0)) throw std::invalid_argument("make_site_scales: cv must be >= 0");
  RandomStream rng(seed, 0);
  std::vector<double> s(n_sites);
  double mean = 0;
  for (auto& v : s) {
    v = 1.0 + cv * rng.gaussian();
    mean += v;
  }
  mean /= static_cast<double>(n_sites);
  for (auto& v : s) v += 1.0 - mean;  // recenter to an exact sample mean of 1
  return s;
}

std::vector<double> FidelityEnsemble::realization_means() const {
  std::vector<double> out(n_realizations, 0.0);
  for (int i = 0; i < n_realizations; ++i) {
    double m = 0;
    for (int j = 0; j < n_sites; ++j) m += f_true_at(i, j);
    out[i] = m / n_sites;
  }
  return out;
}

std::vector<double> FidelityEnsemble::measured_values() const {
  std::vector<double> out;
  for (const auto& v : f_measured)
    if (v) out.push_back(*v);
  return out;
}

void write_ensemble_csv(const FidelityEnsemble& ens, const std::string& path) {
  std::ostringstream os;
  os << "realization,site,F_true\n";
  for (int i = 0; i < ens.n_realizations; ++i)
    for (int j = 0; j < ens.n_sites; ++j)
      os << i << "," << j << "," << format_double(ens.f_true_at(i, j)) << "\n";
  write_file(path, os.str());
}

void write_ensemble_summary(const FidelityEnsemble& ens, const std::string& path) {
  nlohmann::json j;
  j["n_realizations"] = ens.n_realizations;
  j["n_sites"] = ens.n_sites;
  j["metadata"] = {{"kind", to_string(ens.meta.kind)}, {"gamma", ens.meta.gamma},
                   {"kappa", ens.meta.kappa},          {"t", ens.meta.t},
                   {"master_seed", ens.meta.master_seed}};
  nlohmann::json fm = nlohmann::json::array();
  for (const auto& v : ens.f_measured) {
    if (v)
      fm.push_back(*v);
    else
      fm.push_back(nullptr);
  }
  j["F_measured"] = fm;
  write_file(path, j.dump(2) + "\n");
}

std::optional<double> simulate_measurements(const std::vector<double>& f_true_row,
                                            const ArrayModel& model, std::uint64_t seed) {
  model.validate();
  if (static_cast<int>(f_true_row.size()) != model.n_sites)
    throw std::invalid_argument("simulate_measurements: row size must equal n_sites");

  RandomStream rng(seed, 0);
  std::size_t valid = 0;
  std::size_t ones = 0;
  for (int j = 0; j < model.n_sites; ++j) {
    const double f = f_true_row[j];
    for (int k = 0; k < model.n_meas; ++k) {
      if (rng.uniform() >= model.p_c) continue;  // atom absent: measurement discarded
      ++valid;
      const bool correct = rng.uniform() < f;
      const double flip = rng.uniform();
      if (correct) {
        if (flip >= model.p10) ++ones;
      } else {
        if (flip < model.p01) ++ones;
      }
    }
  }
  if (valid == 0) return std::nullopt;
  return static_cast<double>(ones) / static_cast<double>(valid);
}

Kde kde(const std::vector<double>& samples, std::optional<double> bandwidth, int grid_points) {
  if (samples.size() < 2) throw std::invalid_argument("kde: need at least 2 samples");
  if (grid_points < 2) throw std::invalid_argument("kde: need at least 2 grid points");
  const double n = static_cast<double>(samples.size());

  double h;
  if (bandwidth) {
    h = *bandwidth;
    if (!(h > 0)) throw std::invalid_argument("kde: bandwidth must be > 0");
  } else {
    // Silverman's rule on min(sd, IQR/1.34), floored so the kernel stays
    // resolvable on the evaluation grid.
    double mean = 0;
    for (double s : samples) mean += s;
    mean /= n;
    double var = 0;
    for (double s : samples) var += (s - mean) * (s - mean);
    var /= (n - 1);
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const auto q = [&](double p) {
      const double idx = p * (n - 1);
      const auto lo = static_cast<std::size_t>(idx);
      const double w = idx - static_cast<double>(lo);
      return sorted[lo] * (1 - w) + sorted[std::min(sorted.size() - 1, lo + 1)] * w;
    };
    const double iqr = q(0.75) - q(0.25);
    double spread = std::sqrt(var);
    if (iqr > 0) spread = std::min(spread, iqr / 1.34);
    h = 0.9 * spread * std::pow(n, -0.2);
    h = std::max(h, 3e-3);
  }

  Kde out;
  out.bandwidth = h;
  out.x.resize(grid_points);
  out.density.assign(grid_points, 0.0);
  const double step = 1.0 / (grid_points - 1);
  for (int i = 0; i < grid_points; ++i) out.x[i] = i * step;

  const double inv = 1.0 / (n * h * std::sqrt(2.0 * M_PI));
  const auto kern = [&](double d) { return std::exp(-0.5 * d * d / (h * h)); };
  for (double s : samples) {
    // reflect at both boundaries: images at -s and 2-s
    for (int i = 0; i < grid_points; ++i) {
      const double x = out.x[i];
      out.density[i] += inv * (kern(x - s) + kern(x + s) + kern(2.0 - x - s));
    }
  }
  return out;
}

std::vector<double> histogram_probs(const std::vector<double>& samples, int bins) {
  if (bins < 1) throw std::invalid_argument("histogram_probs: bins must be >= 1");
  if (samples.empty()) throw std::invalid_argument("histogram_probs: no samples");
  std::vector<double> h(bins, 0.0);
  for (double s : samples) {
    int b = static_cast<int>(s * bins);
    b = std::clamp(b, 0, bins - 1);
    h[b] += 1.0;
  }
  for (auto& v : h) v /= static_cast<double>(samples.size());
  return h;
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q, double eps) {
  if (p.size() != q.size())
    throw std::invalid_argument("kl_divergence: histogram binning mismatch");
  if (p.empty()) throw std::invalid_argument("kl_divergence: empty histograms");
  // Floor-smooth the model and renormalize.
  std::vector<double> qs(q.size());
  double norm = 0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    qs[i] = std::max(q[i], eps);
    norm += qs[i];
  }
  double kl = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0) kl += p[i] * std::log(p[i] / (qs[i] / norm));
  }
  return kl;
}

SpamReferenceSampler::SpamReferenceSampler(const std::vector<std::vector<double>>& f_true_rows,
                                           const ArrayModel& model, std::uint64_t seed) {
  model.validate();
  if (f_true_rows.empty())
    throw std::invalid_argument("SpamReferenceSampler: need at least one realization");
  for (const auto& row : f_true_rows)
    if (static_cast<int>(row.size()) != model.n_sites)
      throw std::invalid_argument("SpamReferenceSampler: row size must equal n_sites");
  reals_.resize(f_true_rows.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(f_true_rows.size()); ++i) {
    const auto& row = f_true_rows[i];
    RandomStream rng(seed, static_cast<std::uint64_t>(i));
    auto& r = reals_[i];
    for (int j = 0; j < model.n_sites; ++j) {
      const double f = row[j];
      for (int k = 0; k < model.n_meas; ++k) {
        if (rng.uniform() >= model.p_c) continue;
        ++r.valid;
        const bool correct = rng.uniform() < f;
        const double flip = rng.uniform();
        (correct ? r.u_correct : r.u_incorrect).push_back(flip);
      }
    }
    std::sort(r.u_correct.begin(), r.u_correct.end());
    std::sort(r.u_incorrect.begin(), r.u_incorrect.end());
  }
}

std::vector<double> SpamReferenceSampler::sample(double p01, double p10) const {
  std::vector<double> out;
  out.reserve(reals_.size());
  for (const auto& r : reals_) {
    if (r.valid == 0) continue;
    // flips happen when the stored uniform falls below the flip probability
    const auto flipped_correct = static_cast<std::size_t>(
        std::lower_bound(r.u_correct.begin(), r.u_correct.end(), p10) - r.u_correct.begin());
    const auto flipped_incorrect = static_cast<std::size_t>(
        std::lower_bound(r.u_incorrect.begin(), r.u_incorrect.end(), p01) -
        r.u_incorrect.begin());
    const std::size_t ones = (r.u_correct.size() - flipped_correct) + flipped_incorrect;
    out.push_back(static_cast<double>(ones) / static_cast<double>(r.valid));
  }
  return out;
}

SpamFit fit_spam(const std::vector<double>& exp_samples,
                 const std::function<std::vector<double>(double, double)>& sim_generator,
                 const SpamFitOptions& opts) {
  if (exp_samples.empty()) throw std::invalid_argument("fit_spam: no experimental samples");
  if (!(opts.grid_step > 0) || !(opts.refine_step > 0) || opts.bins < 2)
    throw std::invalid_argument("fit_spam: bad options");
  const std::vector<double> p_exp = histogram_probs(exp_samples, opts.bins);

  const auto scan = [&](double lo01, double hi01, double lo10, double hi10, double step) {
    const auto n01 = static_cast<std::size_t>(std::floor((hi01 - lo01) / step + 1e-9)) + 1;
    const auto n10 = static_cast<std::size_t>(std::floor((hi10 - lo10) / step + 1e-9)) + 1;
    std::vector<double> kl(n01 * n10, std::numeric_limits<double>::quiet_NaN());
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t a = 0; a < static_cast<std::int64_t>(n01); ++a) {
      const double p01 = std::min(1.0, lo01 + static_cast<double>(a) * step);
      for (std::size_t b = 0; b < n10; ++b) {
        const double p10 = std::min(1.0, lo10 + static_cast<double>(b) * step);
        try {
          const auto sim = sim_generator(p01, p10);
          if (sim.empty()) continue;
          const auto q = histogram_probs(sim, opts.bins);
          kl[static_cast<std::size_t>(a) * n10 + b] = kl_divergence(p_exp, q, opts.eps);
        } catch (...) {
          // leave the cell NaN; an all-NaN grid surfaces as FitFailed below
        }
      }
    }
    // row-major first-minimum tie-break (documented): scan order p01 outer.
    SpamFit best;
    best.kl = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t a = 0; a < n01; ++a)
      for (std::size_t b = 0; b < n10; ++b) {
        const double v = kl[a * n10 + b];
        if (std::isfinite(v) && v < best.kl) {
          best.kl = v;
          best.p01 = std::min(1.0, lo01 + static_cast<double>(a) * step);
          best.p10 = std::min(1.0, lo10 + static_cast<double>(b) * step);
          found = true;
        }
      }
    if (!found) throw FitFailed("fit_spam: KL divergence non-finite over the whole grid");
    return best;
  };

  const SpamFit coarse = scan(0.0, 1.0, 0.0, 1.0, opts.grid_step);
  const double w = opts.grid_step;
  return scan(std::max(0.0, coarse.p01 - w), std::min(1.0, coarse.p01 + w),
              std::max(0.0, coarse.p10 - w), std::min(1.0, coarse.p10 + w), opts.refine_step);
}

}  // namespace noisefid
