#pragma once
// Measurement layer: maps true per-site fidelities to the array-averaged
// measured fidelity with loading (p_c) and SPAM (p01/p10) errors, plus the
// density-estimation and KL-divergence machinery used to fit the SPAM
// parameters from measured distributions.
//
// Per measurement index l = (site j, repetition k): a presence Bernoulli(p_c)
// decides whether the measurement yields a result at all; retained draws
// contribute B(F_ij)(1 - B(p10)) + (1 - B(F_ij)) B(p01), so in expectation
// F_m = F (1 - p10) + (1 - F) p01. If every measurement is discarded the
// result is missing (std::nullopt), never 0.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "noisefid/noise.hpp"
#include "noisefid/rng.hpp"

namespace noisefid {

struct ArrayModel {
  int n_sites = 100;
  int n_meas = 300;
  double p_c = 0.5;   // presence (loading) probability
  double p01 = 0.04;  // P(read 1 | truth 0)
  double p10 = 0.04;  // P(read 0 | truth 1)
  std::vector<double> site_scales;  // dimensionless Rabi factors; empty = all 1

  void validate() const;  // probabilities in [0,1], scales sized and mean-1
};

// Mean-one Gaussian site factors at the given coefficient of variation,
// recentered so the sample mean is exactly 1.
std::vector<double> make_site_scales(int n_sites, double cv, std::uint64_t seed);

struct EnsembleMeta {
  NoiseKind kind = NoiseKind::white;
  double gamma = 0, kappa = 0, t = 0;
  std::uint64_t master_seed = 0;
};

struct FidelityEnsemble {
  int n_realizations = 0;
  int n_sites = 0;
  std::vector<double> f_true;  // row-major [realization][site]
  std::vector<std::optional<double>> f_measured;  // per realization; empty if no model
  EnsembleMeta meta;

  double f_true_at(int i, int j) const { return f_true[static_cast<std::size_t>(i) * n_sites + j]; }
  std::vector<double> realization_means() const;  // site-averaged F_true per realization
  std::vector<double> measured_values() const;    // defined F_measured entries
};

// Long-form CSV (realization,site,F_true) and a JSON summary with F_measured
// (null where missing) plus the ensemble metadata.
void write_ensemble_csv(const FidelityEnsemble& ens, const std::string& path);
void write_ensemble_summary(const FidelityEnsemble& ens, const std::string& path);

// One realization's measured fidelity; deterministic per seed.
std::optional<double> simulate_measurements(const std::vector<double>& f_true_row,
                                            const ArrayModel& model, std::uint64_t seed);

// --- density estimation -----------------------------------------------------

struct Kde {
  std::vector<double> x;        // 1000-point uniform grid on [0, 1]
  std::vector<double> density;  // >= 0, integrates to 1 (trapezoid) within 1e-3
  double bandwidth = 0;
};

// Gaussian KDE with boundary reflection at 0 and 1. Bandwidth defaults to
// Silverman's rule with a floor keeping the kernel resolvable on the grid.
Kde kde(const std::vector<double>& samples, std::optional<double> bandwidth = std::nullopt,
        int grid_points = 1000);

// Probability-mass histogram (sums to 1) on uniform bins over [0, 1].
std::vector<double> histogram_probs(const std::vector<double>& samples, int bins);

// KL(p || q) with the model q floor-smoothed by eps and renormalized.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q,
                     double eps = 1e-9);

// --- SPAM fit ---------------------------------------------------------------

// Reference-measurement sampler over a frozen set of true-fidelity rows using
// common random numbers: per-measurement uniforms are drawn once, bucketed by
// ideal outcome, and sorted, so sampling at any (p01, p10) is a pair of binary
// searches per realization. The KL surface over (p01, p10) is then smooth
// (no resampling noise) and the full fit grid is cheap. Thread-safe.
class SpamReferenceSampler {
 public:
  SpamReferenceSampler(const std::vector<std::vector<double>>& f_true_rows,
                       const ArrayModel& model, std::uint64_t seed);

  std::vector<double> sample(double p01, double p10) const;

 private:
  struct Realization {
    std::vector<double> u_correct;    // sorted flip-uniforms, ideal outcome correct
    std::vector<double> u_incorrect;  // sorted flip-uniforms, ideal outcome incorrect
    std::size_t valid = 0;
  };
  std::vector<Realization> reals_;
};

struct SpamFit {
  double p01 = 0, p10 = 0;
  double kl = 0;
};

struct SpamFitOptions {
  double grid_step = 0.005;
  double refine_step = 0.0005;
  int bins = 100;
  double eps = 1e-9;
};

// Argmin over [0,1]^2 of KL(exp || sim). Coarse grid then local refinement;
// ties resolve to the first minimum in row-major (p01-outer) scan order. The
// generator must be thread-safe (grid rows evaluate in parallel).
SpamFit fit_spam(const std::vector<double>& exp_samples,
                 const std::function<std::vector<double>(double, double)>& sim_generator,
                 const SpamFitOptions& opts = {});

}  // namespace noisefid
