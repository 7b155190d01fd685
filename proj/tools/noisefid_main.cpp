// Command-line entry point. Subcommands per experiment plus `run <config.ini>`
// and `replay <noise_dir> <measurements.csv>`. Flag overrides are routed
// through the same key/value table as the INI loader, so precedence is simply
// defaults < config file < command line. Success prints a JSON summary on
// stdout; failures print machine-readable JSON on stderr and exit nonzero.

#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisefid/config.hpp"
#include "noisefid/errors.hpp"
#include "noisefid/experiments.hpp"

namespace {

using noisefid::ExperimentConfig;

void setup_common(CLI::App* sub, std::map<std::string, std::string>& vals) {
  const auto bind = [sub, &vals](const std::string& flag, const std::string& key,
                                 const std::string& desc) {
    sub->add_option_function<std::string>(
        flag, [&vals, key](const std::string& v) { vals[key] = v; }, desc);
  };
  bind("--gamma", "noise.gamma", "Noise amplitude gamma (WN/OU, s^-1/2)");
  bind("--gamma-bm", "noise.gamma_bm", "BM noise amplitude (s^-3/2)");
  bind("--kappa", "noise.kappa", "OU relaxation rate kappa (s^-1)");
  bind("--kind", "noise.kind", "Noise kind: WN | OU | BM");
  bind("--realizations", "run.realizations", "Number of noise realizations");
  bind("--seed", "run.seed", "Master seed");
  bind("--out", "run.out", "Output directory");
  bind("--threads", "run.threads", "Worker threads (0 = NOISEFID_THREADS env or hardware)");
  bind("--rabi-hz", "pulse.rabi_hz", "Drive Rabi frequency (Hz)");
  bind("--duration", "pulse.duration", "Pulse duration (s)");
  bind("--segment-dt", "pulse.segment_dt", "Control segment length (s)");
  bind("--replay-dir", "run.replay_dir", "Previous run directory to overlay as experimental data");
  sub->add_flag_callback("--export-traces", [&vals] { vals["run.export_traces"] = "true"; },
                         "Write per-point noise traces and measurements");
  sub->add_flag_callback("--no-svg", [&vals] { vals["run.svg"] = "false"; },
                         "Skip SVG quick-look plots");
}

ExperimentConfig config_from_file(const std::string& path) {
  // Two passes: the first learns the experiment name so the second starts from
  // that experiment's defaults.
  ExperimentConfig probe = noisefid::default_config("time_sweep");
  noisefid::apply_ini(probe, path);
  ExperimentConfig cfg = noisefid::default_config(probe.experiment);
  noisefid::apply_ini(cfg, path);
  return cfg;
}

int fail(const std::string& code, const std::string& message,
         const std::vector<std::string>& missing = {}) {
  nlohmann::json err = {{"error", code}, {"message", message}};
  if (!missing.empty()) err["missing"] = missing;
  std::cerr << err.dump(2) << std::endl;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noisefid: stochastic control-noise fidelity toolkit"};
  app.require_subcommand(1);

  std::map<std::string, std::string> vals;
  std::string config_file, noise_dir, measurements;

  std::vector<std::pair<std::string, CLI::App*>> experiment_subs;
  for (const auto& name : noisefid::experiment_names()) {
    std::string dashed = name;
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    CLI::App* sub = app.add_subcommand(dashed, "Run the " + name + " experiment");
    setup_common(sub, vals);
    experiment_subs.emplace_back(name, sub);
  }

  CLI::App* run_sub = app.add_subcommand("run", "Run an experiment from an INI config file");
  run_sub->add_option("config", config_file, "INI config file")
      ->required()
      ->check(CLI::ExistingFile);
  setup_common(run_sub, vals);

  CLI::App* replay_sub = app.add_subcommand(
      "replay", "Re-simulate exported noise traces and recombine with recorded measurements");
  replay_sub->add_option("noise_dir", noise_dir, "Directory of exported trace_*.csv files")
      ->required()
      ->check(CLI::ExistingDirectory);
  replay_sub->add_option("measurements", measurements, "Recorded measurements CSV")
      ->required()
      ->check(CLI::ExistingFile);
  replay_sub->add_option("--config", config_file, "INI config matching the original run")
      ->check(CLI::ExistingFile);
  setup_common(replay_sub, vals);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    ExperimentConfig cfg;
    if (app.got_subcommand(run_sub) || (app.got_subcommand(replay_sub) && !config_file.empty())) {
      cfg = config_from_file(config_file);
    } else if (app.got_subcommand(replay_sub)) {
      cfg = noisefid::default_config("time_sweep");
    } else {
      for (const auto& [name, sub] : experiment_subs)
        if (app.got_subcommand(sub)) cfg = noisefid::default_config(name);
    }
    std::string overrides;
    for (const auto& [key, value] : vals) overrides += key + " = " + value + "\n";
    noisefid::apply_ini_text(cfg, overrides, "<command line>");

    const nlohmann::json out = app.got_subcommand(replay_sub)
                                   ? noisefid::replay_experiment(cfg, noise_dir, measurements)
                                   : noisefid::run_experiment(cfg);
    std::cout << out.dump(2) << std::endl;
    return 0;
  } catch (const noisefid::AlignmentError& e) {
    return fail("alignment_error", e.what(), e.missing);
  } catch (const noisefid::ConstraintViolation& e) {
    return fail("constraint_violation", e.what());
  } catch (const noisefid::IntegrationDiverged& e) {
    return fail("integration_diverged", e.what());
  } catch (const noisefid::FitFailed& e) {
    return fail("fit_failed", e.what());
  } catch (const std::invalid_argument& e) {
    return fail("invalid_argument", e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
}
