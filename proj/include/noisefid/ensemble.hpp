#pragma once
// Ensemble engine: N_r noise realizations x N_a sites through the SSE,
// producing a FidelityEnsemble against the noiseless reference evolution.
//
// One noise trace per realization (the drive is global, so all sites share the
// realization's trace); sites differ by their Rabi scale factor and by
// measurement sampling. Per-realization seeds derive from the master seed, so
// serial and OpenMP execution produce bit-identical results; the serial path
// is kept as the reference implementation for testing and benchmarking.

#include <cstdint>
#include <optional>
#include <vector>

#include "noisefid/measurement.hpp"
#include "noisefid/noise.hpp"
#include "noisefid/pulse.hpp"
#include "noisefid/qubit.hpp"
#include "noisefid/sse.hpp"

namespace noisefid {

enum class Execution { serial, parallel };

struct EnsembleConfig {
  NoiseParams noise;       // per-realization seeds overwrite noise.seed
  PulseSchedule pulse;
  AmplitudeCalibration calib = AmplitudeCalibration::identity();
  std::vector<double> site_scales{1.0};
  int n_realizations = 75;
  std::uint64_t master_seed = 0;
  QubitState initial = QubitState::ket0();
  IntegratorOptions integrator{};
  // When set, F_measured is sampled per realization with this model
  // (its site_scales field is ignored; site_scales above is authoritative).
  std::optional<ArrayModel> measurement;
};

struct EnsembleRun {
  FidelityEnsemble ensemble;
  std::vector<double> delta_x;         // per-realization X_T - X_0 over the noise window
  std::vector<NoiseTrace> traces;      // kept only when keep_traces was requested
  double max_norm_drift = 0;
};

EnsembleRun run_ensemble(const EnsembleConfig& config, Execution exec = Execution::parallel,
                         bool keep_traces = false);

// Seed used for realization i's trace (exposed for replay/export tooling).
std::uint64_t ensemble_trace_seed(std::uint64_t master_seed, int realization);
std::uint64_t ensemble_measurement_seed(std::uint64_t master_seed, int realization);

}  // namespace noisefid
