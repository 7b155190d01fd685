#pragma once
// Resolved experiment configuration: defaults, INI loading, JSON dump, hashing.
//
// INI format: optional top-level `experiment = <name>` plus [section] blocks
// whose keys mirror the nested structs below (see README for the full key list).
// Unknown sections or keys are rejected so typos fail loudly.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "noisefid/noise.hpp"

namespace noisefid {

struct ExperimentConfig {
  std::string experiment = "time_sweep";

  struct Noise {
    std::string kind = "OU";       // WN | OU | BM  (primary condition)
    double gamma = 6.0;            // s^{-1/2} (WN/OU)
    double gamma_bm = 4.22230500820383e5;  // s^{-3/2} (BM)
    double kappa = 5e3;            // s^{-1} (OU)
    double fine_dt = 1e-6;         // s
  } noise;

  struct Pulse {
    double rabi_hz = 50e3;         // Rabi frequency Omega/2pi
    double duration = 200e-6;      // s, total drive length
    double segment_dt = 1e-6;      // s, control grid
    double detuning = 0.0;         // rad/s
    std::string calibration_file;  // empty -> identity (setpoint already in rad/s)
    double min_segment = 400e-9;   // s, shortest representable segment
    std::string noise_mode = "rabi_phase";  // rabi_phase | setpoint
  } pulse;

  struct Array {
    bool enabled = true;
    int sites = 100;
    int meas = 300;
    double p_c = 0.5;
    double p01 = 0.04;
    double p10 = 0.04;
    double site_cv = 0.0014;       // fractional spread of per-site drive amplitude
  } array;

  struct Run {
    int realizations = 75;
    std::uint64_t seed = 20240613;
    std::string out = "out/run";
    int threads = 0;               // 0 -> NOISEFID_THREADS env or hardware default
    bool svg = true;
    bool export_traces = false;    // also write per-point noise traces + measurements
    std::string replay_dir;        // overlay experimental data exported earlier
  } run;

  struct Sweep {
    std::vector<double> gammas = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    std::vector<double> times;     // s; default 0..180us step 20us
    std::vector<std::string> kinds = {"WN", "OU", "BM"};
  } sweep;

  struct Convergence {
    std::vector<double> dts = {4e-9, 1e-7, 1e-6};
    double fine_dt = 4e-9;
    int realizations = 10000;
  } convergence;

  struct Distribution {
    int bins = 25;
    std::vector<double> times = {0.0, 180e-6};
  } distribution;

  struct Psd {
    int traces = 8;
    double fine_dt = 4e-9;
    int segment_pow = 16;          // Welch segment length 2^segment_pow
    int trace_pow = 19;            // samples per trace 2^trace_pow
    double ou_kappa = 5e6;         // s^{-1}, OU condition for the knee check
    double slope_fmin = 2e4, slope_fmax = 2e6;   // Hz, WN/BM slope fit band
    double knee_fmin = 3e4, knee_fmax = 2e7;     // Hz, OU knee fit band
  } psd;

  struct Rb {
    std::vector<int> lengths = {1, 30, 80, 150, 250, 400};
    int sequences = 75;
    int meas = 75;
    bool composite = true;
    bool spam = true;
    double rabi_hz = 117e3;
    double segment_dt = 1e-6;
  } rb;

  struct SpamFit {
    int sim_realizations = 2000;
    double grid_step = 0.005;
    double refine_step = 0.0005;
    int bins = 100;
  } spamfit;

  void validate() const;
};

// Experiment kinds accepted by run_experiment / the CLI.
const std::vector<std::string>& experiment_names();

// Defaults specialised per experiment (e.g. spam_fit defaults to a zero-noise
// reference condition, convergence to WN).
ExperimentConfig default_config(const std::string& experiment);

// Parse `section.key = value` pairs from an INI file into `cfg`.
// Throws std::invalid_argument on unknown keys or malformed values.
void apply_ini(ExperimentConfig& cfg, const std::string& path);
void apply_ini_text(ExperimentConfig& cfg, const std::string& text, const std::string& origin);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::string config_hash(const ExperimentConfig& cfg);  // 16-hex FNV-1a of the resolved dump

}  // namespace noisefid
