#pragma once
// Experiment harness: each run writes one output directory with config.json
// (resolved config + hash), one CSV per curve with a .meta.json provenance
// sidecar, and optional SVG quick-looks. All runners return a JSON summary of
// the key numbers and artifact paths and are byte-deterministic in (config,
// seed) regardless of worker count.

#include <string>

#include <json.hpp>

#include "noisefid/config.hpp"

namespace noisefid {

// Mean fidelity vs noise amplitude at fixed pulse length, one noise kind.
nlohmann::json run_gamma_sweep(const ExperimentConfig& cfg);

// Mean fidelity vs noise-window length for each kind in sweep.kinds.
nlohmann::json run_time_sweep(const ExperimentConfig& cfg);

// Fidelity standard deviation vs noise-window length, one kind.
nlohmann::json run_variance_sweep(const ExperimentConfig& cfg);

// Fidelity histogram + KDE at selected times, one kind.
nlohmann::json run_distribution(const ExperimentConfig& cfg);

// Mean fidelity from identical fine noise paths coarsened to several control
// grids (common random numbers across dt).
nlohmann::json run_convergence(const ExperimentConfig& cfg);

// Welch PSD of dX/dt per kind with slope / knee fits.
nlohmann::json run_psd(const ExperimentConfig& cfg);

// Randomized benchmarking curve and decay fit.
nlohmann::json run_rb_experiment(const ExperimentConfig& cfg);

// KL fit of SPAM parameters from a planted "experimental" measured-fidelity
// distribution against the common-random-number reference sampler.
nlohmann::json run_spam_fit(const ExperimentConfig& cfg);

// Re-simulates exported noise traces through the SSE and recombines them with
// a recorded measurements file (layout produced by run.export_traces). Trace
// and measurement realization ids must align or an AlignmentError is thrown.
// With the original config and seed this reproduces the recorded F_m exactly.
nlohmann::json replay_experiment(const ExperimentConfig& cfg, const std::string& noise_dir,
                                 const std::string& measurements_file);

// Dispatch on cfg.experiment.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

}  // namespace noisefid
