#include "noisefid/ensemble.hpp"

#include <cmath>
#include <stdexcept>

#include <omp.h>

#include "noisefid/rng.hpp"

namespace noisefid {

std::uint64_t ensemble_trace_seed(std::uint64_t master_seed, int realization) {
  return derive_seed(master_seed, "trace", static_cast<std::uint64_t>(realization));
}

std::uint64_t ensemble_measurement_seed(std::uint64_t master_seed, int realization) {
  return derive_seed(master_seed, "measurement", static_cast<std::uint64_t>(realization));
}

EnsembleRun run_ensemble(const EnsembleConfig& config, Execution exec, bool keep_traces) {
  config.pulse.validate();
  if (config.pulse.noise_segments() > 0) config.noise.validate();
  if (config.n_realizations < 1)
    throw std::invalid_argument("run_ensemble: n_realizations must be >= 1");
  if (config.site_scales.empty())
    throw std::invalid_argument("run_ensemble: site_scales must be non-empty");

  const int n_r = config.n_realizations;
  const int n_a = static_cast<int>(config.site_scales.size());

  // Noiseless reference at unit scale defines the fidelity target.
  const QubitState reference = evolve_ideal(config.pulse, config.calib, config.initial, 1.0);

  EnsembleRun run;
  auto& ens = run.ensemble;
  ens.n_realizations = n_r;
  ens.n_sites = n_a;
  ens.f_true.assign(static_cast<std::size_t>(n_r) * n_a, 0.0);
  ens.meta = {config.noise.kind, config.noise.gamma, config.noise.kappa,
              config.pulse.noise_duration, config.master_seed};
  run.delta_x.assign(n_r, 0.0);
  if (keep_traces) run.traces.resize(n_r);
  std::vector<double> drift(n_r, 0.0);

  const std::size_t n_noise = config.pulse.noise_segments();

  const auto work = [&](int i) {
    NoiseTrace trace;
    trace.dt = config.pulse.segment_dt;
    trace.kind = config.noise.kind;
    if (n_noise > 0) {
      NoiseParams np = config.noise;
      np.seed = ensemble_trace_seed(config.master_seed, i);
      trace = generate_trace(np);
      if (std::abs(trace.dt - config.pulse.segment_dt) > 1e-9 * config.pulse.segment_dt)
        trace = coarsen_trace(trace, config.pulse.segment_dt);
    }

    double dx = 0;
    for (std::size_t k = 0; k < std::min(n_noise, trace.size()); ++k) dx += trace.dx[k];
    run.delta_x[i] = dx;

    for (int j = 0; j < n_a; ++j) {
      const auto res = integrate_sse(config.pulse, config.calib, trace, config.initial,
                                     config.site_scales[j], config.integrator);
      drift[i] = std::max(drift[i], res.max_norm_drift);
      ens.f_true[static_cast<std::size_t>(i) * n_a + j] = fidelity(res.state, reference);
    }
    if (keep_traces) run.traces[i] = std::move(trace);
  };

  if (exec == Execution::serial) {
    for (int i = 0; i < n_r; ++i) work(i);
  } else {
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n_r; ++i) {
      try {
        work(i);
      } catch (...) {
#pragma omp critical(noisefid_ensemble_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  }

  for (int i = 0; i < n_r; ++i) run.max_norm_drift = std::max(run.max_norm_drift, drift[i]);

  if (config.measurement) {
    ArrayModel model = *config.measurement;
    model.n_sites = n_a;
    model.site_scales.clear();
    model.validate();
    ens.f_measured.resize(n_r);
    // Measurement sampling is cheap; serial keeps it trivially deterministic.
    for (int i = 0; i < n_r; ++i) {
      std::vector<double> row(ens.f_true.begin() + static_cast<std::size_t>(i) * n_a,
                              ens.f_true.begin() + static_cast<std::size_t>(i + 1) * n_a);
      ens.f_measured[i] =
          simulate_measurements(row, model, ensemble_measurement_seed(config.master_seed, i));
    }
  }
  return run;
}

}  // namespace noisefid
