// Timing comparison of the serial reference ensemble path against the OpenMP
// path, over the three noise kinds. Not a correctness test (the equality of
// both paths is asserted in the unit suite); build and run manually:
//   ./build/bench/bench_ensemble [n_realizations]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <omp.h>

#include "noisefid/ensemble.hpp"

using namespace noisefid;

namespace {

double time_run(const EnsembleConfig& cfg, Execution exec) {
  const auto t0 = std::chrono::steady_clock::now();
  const EnsembleRun run = run_ensemble(cfg, exec);
  const auto t1 = std::chrono::steady_clock::now();
  // touch the result so the call cannot be elided
  volatile double sink = run.ensemble.f_true.back();
  (void)sink;
  return std::chrono::duration<double>(t1 - t0).count();
}

EnsembleConfig make_config(NoiseKind kind, int n_r) {
  EnsembleConfig cfg;
  cfg.noise.kind = kind;
  cfg.noise.gamma = kind == NoiseKind::brownian ? 4.2223e5 : 6.0;
  cfg.noise.kappa = 5e3;
  cfg.noise.fine_dt = 1e-6;
  cfg.noise.duration = 200e-6;
  cfg.pulse = constant_drive(2.0 * M_PI * 50e3, 200e-6, 1e-6);
  cfg.n_realizations = n_r;
  cfg.master_seed = 7;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  const int n_r = argc > 1 ? std::atoi(argv[1]) : 4000;
  std::printf("ensemble benchmark: %d realizations x 200 segments, %d threads\n", n_r,
              omp_get_max_threads());
  std::printf("%-6s %12s %12s %9s\n", "kind", "serial (s)", "parallel (s)", "speedup");
  for (NoiseKind kind : {NoiseKind::white, NoiseKind::ou, NoiseKind::brownian}) {
    const EnsembleConfig cfg = make_config(kind, n_r);
    const double ts = time_run(cfg, Execution::serial);
    const double tp = time_run(cfg, Execution::parallel);
    std::printf("%-6s %12.3f %12.3f %8.2fx\n", to_string(kind).c_str(), ts, tp, ts / tp);
  }
  return 0;
}
