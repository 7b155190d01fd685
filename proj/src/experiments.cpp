#include "noisefid/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <omp.h>

#include "noisefid/analytics.hpp"
#include "noisefid/ensemble.hpp"
#include "noisefid/errors.hpp"
#include "noisefid/io.hpp"
#include "noisefid/psd.hpp"
#include "noisefid/rb.hpp"
#include "noisefid/rng.hpp"
#include "noisefid/svg.hpp"

namespace noisefid {
namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Stats {
  int n = 0;
  double mean = kNaN, sd = kNaN, se = kNaN, m4 = kNaN;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  s.n = static_cast<int>(v.size());
  if (s.n == 0) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / s.n;
  if (s.n < 2) return s;
  double ss = 0, s4 = 0;
  for (double x : v) {
    const double d = x - s.mean;
    ss += d * d;
    s4 += d * d * d * d;
  }
  s.sd = std::sqrt(ss / (s.n - 1));
  s.se = s.sd / std::sqrt(static_cast<double>(s.n));
  s.m4 = s4 / s.n;
  return s;
}

// 1-sigma error of the sample standard deviation (delta method on Var(s^2)).
double sd_stderr(const Stats& s) {
  if (s.n < 2 || !(s.sd > 0)) return kNaN;
  const double var_of_var = std::max(0.0, s.m4 - std::pow(s.sd, 4)) / s.n;
  return std::sqrt(var_of_var) / (2.0 * s.sd);
}

std::string zero_pad(int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*d", width, value);
  return buf;
}

double kind_gamma(const ExperimentConfig& cfg, NoiseKind kind) {
  return kind == NoiseKind::brownian ? cfg.noise.gamma_bm : cfg.noise.gamma;
}

AmplitudeCalibration make_calib(const ExperimentConfig& cfg) {
  AmplitudeCalibration calib =
      cfg.pulse.calibration_file.empty()
          ? AmplitudeCalibration::linear(2.0 * M_PI * cfg.pulse.rabi_hz)
          : AmplitudeCalibration::from_csv(cfg.pulse.calibration_file);
  calib.min_segment = cfg.pulse.min_segment;
  return calib;
}

PulseSchedule make_pulse(const ExperimentConfig& cfg, double noise_t) {
  return constant_drive(1.0, cfg.pulse.duration, cfg.pulse.segment_dt, noise_t,
                        cfg.pulse.detuning);
}

IntegratorOptions make_integrator(const ExperimentConfig& cfg) {
  IntegratorOptions opts;
  opts.noise_mode = cfg.pulse.noise_mode == "setpoint" ? IntegratorOptions::NoiseMode::setpoint
                                                       : IntegratorOptions::NoiseMode::rabi_phase;
  return opts;
}

std::vector<double> experiment_site_scales(const ExperimentConfig& cfg) {
  if (!cfg.array.enabled) return {1.0};
  return make_site_scales(cfg.array.sites, cfg.array.site_cv,
                          derive_seed(cfg.run.seed, "sites", 0));
}

std::optional<ArrayModel> experiment_model(const ExperimentConfig& cfg) {
  if (!cfg.array.enabled) return std::nullopt;
  ArrayModel m;
  m.n_sites = cfg.array.sites;
  m.n_meas = cfg.array.meas;
  m.p_c = cfg.array.p_c;
  m.p01 = cfg.array.p01;
  m.p10 = cfg.array.p10;
  return m;
}

nlohmann::json base_meta(const ExperimentConfig& cfg) {
  return {{"experiment", cfg.experiment},
          {"config_hash", config_hash(cfg)},
          {"seed", cfg.run.seed}};
}

void prepare_out(const ExperimentConfig& cfg) {
  cfg.validate();
  apply_threads(cfg.run.threads);
  ensure_dir(cfg.run.out);
  nlohmann::json j = config_to_json(cfg);
  j["hash"] = config_hash(cfg);
  write_file(cfg.run.out + "/config.json", j.dump(2) + "\n");
}

std::uint64_t point_master_seed(const ExperimentConfig& cfg, const std::string& label) {
  return derive_seed(cfg.run.seed, "point-" + label, 0);
}

struct PointRun {
  EnsembleRun run;
  std::uint64_t master = 0;
  NoiseParams noise;
};

PointRun run_point(const ExperimentConfig& cfg, NoiseKind kind, double gamma, double t,
                   const std::string& label, bool keep_traces) {
  EnsembleConfig ec;
  ec.noise.kind = kind;
  ec.noise.gamma = gamma;
  ec.noise.kappa = cfg.noise.kappa;
  ec.noise.fine_dt = cfg.noise.fine_dt;
  ec.noise.duration = t;
  ec.pulse = make_pulse(cfg, t);
  ec.calib = make_calib(cfg);
  ec.site_scales = experiment_site_scales(cfg);
  ec.n_realizations = cfg.run.realizations;
  ec.master_seed = point_master_seed(cfg, label);
  ec.integrator = make_integrator(cfg);
  ec.measurement = experiment_model(cfg);
  PointRun out{run_ensemble(ec, Execution::parallel, keep_traces), ec.master_seed, ec.noise};
  return out;
}

void export_point(const std::string& dir, const PointRun& pr) {
  ensure_dir(dir + "/traces");
  const auto& ens = pr.run.ensemble;
  for (int i = 0; i < ens.n_realizations; ++i) {
    NoiseParams np = pr.noise;
    np.seed = ensemble_trace_seed(pr.master, i);
    const NoiseTrace& tr = pr.run.traces[i];
    np.fine_dt = tr.size() > 0 ? tr.dt : np.fine_dt;  // exported at the control grid
    np.duration = tr.duration();
    write_trace_csv(tr, np, dir + "/traces/trace_" + zero_pad(i, 4) + ".csv");
  }
  if (!ens.f_measured.empty()) {
    std::string out = "realization,F_m\n";
    for (int i = 0; i < ens.n_realizations; ++i) {
      out += std::to_string(i);
      out += ',';
      if (ens.f_measured[i]) out += format_double(*ens.f_measured[i]);
      out += '\n';
    }
    write_file(dir + "/measurements.csv", out);
  }
}

std::map<int, std::optional<double>> load_measurements(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("realization,", 0) != 0)
    throw std::invalid_argument("measurements file missing 'realization,F_m' header: " + path);
  std::map<int, std::optional<double>> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected id,value");
    const int id = std::stoi(line.substr(0, comma));
    const std::string val = line.substr(comma + 1);
    if (val.empty())
      out[id] = std::nullopt;
    else
      out[id] = std::stod(val);
  }
  return out;
}

std::vector<double> overlay_values(const ExperimentConfig& cfg, const std::string& label) {
  const std::string path = cfg.run.replay_dir + "/points/" + label + "/measurements.csv";
  if (!fs::exists(path))
    throw std::invalid_argument("replay overlay: missing " + path);
  std::vector<double> vals;
  for (const auto& [id, v] : load_measurements(path))
    if (v) vals.push_back(*v);
  return vals;
}

void write_kde_csv(const std::vector<double>& samples, const std::string& path,
                   const nlohmann::json& meta) {
  const Kde k = kde(samples);
  Table t;
  t.columns = {"f", "density"};
  for (std::size_t i = 0; i < k.x.size(); ++i) t.add_row({k.x[i], k.density[i]});
  nlohmann::json m = meta;
  m["bandwidth"] = k.bandwidth;
  m["samples"] = samples.size();
  write_table_csv(t, path, m);
}

}  // namespace

nlohmann::json run_gamma_sweep(const ExperimentConfig& cfg) {
  prepare_out(cfg);
  const NoiseKind kind = noise_kind_from_string(cfg.noise.kind);
  const double t = cfg.pulse.duration;
  const bool overlay = !cfg.run.replay_dir.empty();

  Table tab;
  tab.columns = {"gamma",     "analytic_mean", "band",    "sim_mean", "sim_sd",
                 "sim_se",    "meas_mean",     "meas_sd", "meas_n"};
  if (overlay) {
    tab.columns.push_back("exp_mean");
    tab.columns.push_back("exp_sd");
    tab.columns.push_back("exp_n");
  }

  SvgSeries analytic{"analytic", {}, {}, "#444444", false, true, true};
  SvgSeries sim{"simulated", {}, {}, "#1f6fb4", true, true, false};
  SvgSeries meas{"measured", {}, {}, "#d1495b", true, false, false};
  SvgSeries exp{"experimental", {}, {}, "#2e8b57", true, false, false};

  for (std::size_t gi = 0; gi < cfg.sweep.gammas.size(); ++gi) {
    const double g = cfg.sweep.gammas[gi];
    const std::string label = "gamma_" + zero_pad(static_cast<int>(gi), 3);
    const PointRun pr = run_point(cfg, kind, g, t, label, cfg.run.export_traces);
    if (cfg.run.export_traces) export_point(cfg.run.out + "/points/" + label, pr);

    const Stats st = stats(pr.run.ensemble.realization_means());
    const Stats mst = stats(pr.run.ensemble.measured_values());
    MomentSpec spec{kind, g, cfg.noise.kappa, 0.0};
    const MomentBand band = sample_moment_bands(spec, t, cfg.run.realizations);

    std::vector<double> row = {g,     band.mean, band.band, st.mean, st.sd,
                               st.se, mst.mean,  mst.sd,    static_cast<double>(mst.n)};
    if (overlay) {
      const Stats est = stats(overlay_values(cfg, label));
      row.insert(row.end(), {est.mean, est.sd, static_cast<double>(est.n)});
      exp.x.push_back(g);
      exp.y.push_back(est.mean);
    }
    tab.rows.push_back(row);
    analytic.x.push_back(g);
    analytic.y.push_back(band.mean);
    sim.x.push_back(g);
    sim.y.push_back(st.mean);
    if (mst.n > 0) {
      meas.x.push_back(g);
      meas.y.push_back(mst.mean);
    }
  }

  const std::string csv = cfg.run.out + "/gamma_sweep.csv";
  write_table_csv(tab, csv, base_meta(cfg));
  if (cfg.run.svg) {
    SvgPlot plot;
    plot.title = "Mean fidelity vs noise amplitude (" + cfg.noise.kind + ")";
    plot.xlabel = "gamma";
    plot.ylabel = "mean fidelity";
    plot.series = {analytic, sim, meas};
    if (overlay) plot.series.push_back(exp);
    plot.write(cfg.run.out + "/gamma_sweep.svg");
  }
  return {{"experiment", "gamma_sweep"}, {"rows", tab.rows.size()}, {"csv", csv}};
}

nlohmann::json run_time_sweep(const ExperimentConfig& cfg) {
  prepare_out(cfg);
  const bool overlay = !cfg.run.replay_dir.empty();
  nlohmann::json files = nlohmann::json::array();
  SvgPlot plot;
  plot.title = "Mean fidelity vs noise-window length";
  plot.xlabel = "t (s)";
  plot.ylabel = "mean fidelity";
  const std::map<std::string, std::string> colors = {
      {"WN", "#1f6fb4"}, {"OU", "#d1495b"}, {"BM", "#2e8b57"}};

  for (const auto& kind_s : cfg.sweep.kinds) {
    const NoiseKind kind = noise_kind_from_string(kind_s);
    const double gamma = kind_gamma(cfg, kind);
    Table tab;
    tab.columns = {"t",      "analytic_mean", "band",    "sim_mean", "sim_sd",
                   "sim_se", "meas_mean",     "meas_sd", "meas_n"};
    if (overlay) {
      tab.columns.push_back("exp_mean");
      tab.columns.push_back("exp_sd");
      tab.columns.push_back("exp_n");
    }
    const std::string color =
        colors.count(to_string(kind)) ? colors.at(to_string(kind)) : "#888888";
    SvgSeries analytic{to_string(kind) + " analytic", {}, {}, color, false, true, true};
    SvgSeries sim{to_string(kind) + " sim", {}, {}, color, true, true, false};
    SvgSeries exp{to_string(kind) + " exp", {}, {}, color, true, false, false};

    for (std::size_t ti = 0; ti < cfg.sweep.times.size(); ++ti) {
      const double t = cfg.sweep.times[ti];
      const std::string label = to_string(kind) + "_t" + zero_pad(static_cast<int>(ti), 3);
      const PointRun pr = run_point(cfg, kind, gamma, t, label, cfg.run.export_traces);
      if (cfg.run.export_traces) export_point(cfg.run.out + "/points/" + label, pr);

      const Stats st = stats(pr.run.ensemble.realization_means());
      const Stats mst = stats(pr.run.ensemble.measured_values());
      MomentSpec spec{kind, gamma, cfg.noise.kappa, 0.0};
      const MomentBand band = sample_moment_bands(spec, t, cfg.run.realizations);

      std::vector<double> row = {t,     band.mean, band.band, st.mean, st.sd,
                                 st.se, mst.mean,  mst.sd,    static_cast<double>(mst.n)};
      if (overlay) {
        const Stats est = stats(overlay_values(cfg, label));
        row.insert(row.end(), {est.mean, est.sd, static_cast<double>(est.n)});
        exp.x.push_back(t);
        exp.y.push_back(est.mean);
      }
      tab.rows.push_back(row);
      analytic.x.push_back(t);
      analytic.y.push_back(band.mean);
      sim.x.push_back(t);
      sim.y.push_back(st.mean);
    }
    const std::string csv = cfg.run.out + "/time_sweep_" + to_string(kind) + ".csv";
    nlohmann::json meta = base_meta(cfg);
    meta["kind"] = to_string(kind);
    meta["gamma"] = gamma;
    write_table_csv(tab, csv, meta);
    files.push_back(csv);
    plot.series.push_back(analytic);
    plot.series.push_back(sim);
    if (overlay) plot.series.push_back(exp);
  }
  if (cfg.run.svg) plot.write(cfg.run.out + "/time_sweep.svg");
  return {{"experiment", "time_sweep"}, {"files", files}};
}

nlohmann::json run_variance_sweep(const ExperimentConfig& cfg) {
  prepare_out(cfg);
  const NoiseKind kind = noise_kind_from_string(cfg.noise.kind);
  const double gamma = kind_gamma(cfg, kind);

  Table tab;
  tab.columns = {"t", "analytic_sd", "sim_sd", "sim_sd_se", "meas_sd", "n"};
  SvgSeries analytic{"analytic", {}, {}, "#444444", false, true, true};
  SvgSeries sim{"simulated", {}, {}, "#1f6fb4", true, true, false};

  for (std::size_t ti = 0; ti < cfg.sweep.times.size(); ++ti) {
    const double t = cfg.sweep.times[ti];
    const std::string label = "var_t" + zero_pad(static_cast<int>(ti), 3);
    const PointRun pr = run_point(cfg, kind, gamma, t, label, false);
    const Stats st = stats(pr.run.ensemble.realization_means());
    const Stats mst = stats(pr.run.ensemble.measured_values());
    MomentSpec spec{kind, gamma, cfg.noise.kappa, 0.0};
    const double asd = std::sqrt(var_fidelity(spec, t));
    tab.add_row({t, asd, st.sd, sd_stderr(st), mst.sd, static_cast<double>(st.n)});
    analytic.x.push_back(t);
    analytic.y.push_back(asd);
    sim.x.push_back(t);
    sim.y.push_back(st.sd);
  }
  const std::string csv = cfg.run.out + "/variance_sweep_" + to_string(kind) + ".csv";
  write_table_csv(tab, csv, base_meta(cfg));
  if (cfg.run.svg) {
    SvgPlot plot;
    plot.title = "Fidelity standard deviation vs t (" + to_string(kind) + ")";
    plot.xlabel = "t (s)";
    plot.ylabel = "std dev of fidelity";
    plot.series = {analytic, sim};
    plot.write(cfg.run.out + "/variance_sweep.svg");
  }
  return {{"experiment", "variance_sweep"}, {"csv", csv}, {"rows", tab.rows.size()}};
}

nlohmann::json run_distribution(const ExperimentConfig& cfg) {
  prepare_out(cfg);
  const NoiseKind kind = noise_kind_from_string(cfg.noise.kind);
  const double gamma = kind_gamma(cfg, kind);
  const bool overlay = !cfg.run.replay_dir.empty();
  const int bins = cfg.distribution.bins;

  nlohmann::json points = nlohmann::json::array();
  SvgPlot plot;
  plot.title = "Fidelity distribution (" + to_string(kind) + ")";
  plot.xlabel = "fidelity";
  plot.ylabel = "density";
  const std::vector<std::string> palette = {"#1f6fb4", "#d1495b", "#2e8b57", "#8a5fbf"};

  for (std::size_t ti = 0; ti < cfg.distribution.times.size(); ++ti) {
    const double t = cfg.distribution.times[ti];
    const std::string label = "dist_t" + zero_pad(static_cast<int>(ti), 3);
    const PointRun pr = run_point(cfg, kind, gamma, t, label, cfg.run.export_traces);
    if (cfg.run.export_traces) export_point(cfg.run.out + "/points/" + label, pr);
    const std::vector<double> samples = cfg.array.enabled
                                            ? pr.run.ensemble.measured_values()
                                            : pr.run.ensemble.realization_means();

    // integer counts; their sum is the number of defined samples
    std::vector<int> counts(bins, 0);
    for (double s : samples) {
      int b = static_cast<int>(std::floor(s * bins));
      b = std::clamp(b, 0, bins - 1);
      ++counts[b];
    }
    Table hist;
    hist.columns = {"bin_center", "count"};
    for (int b = 0; b < bins; ++b)
      hist.add_row({(b + 0.5) / bins, static_cast<double>(counts[b])});
    nlohmann::json meta = base_meta(cfg);
    meta["t"] = t;
    meta["kind"] = to_string(kind);
    const std::string hist_csv = cfg.run.out + "/" + label + "_hist.csv";
    write_table_csv(hist, hist_csv, meta);

    const std::string kde_csv = cfg.run.out + "/" + label + "_kde.csv";
    if (samples.size() >= 2) {
      write_kde_csv(samples, kde_csv, meta);
      const Kde k = kde(samples);
      SvgSeries ser{"t = " + format_double(t) + " s", k.x, k.density,
                    palette[ti % palette.size()], false, true, false};
      plot.series.push_back(ser);
    }
    nlohmann::json pt = {{"t", t}, {"samples", samples.size()}, {"hist", hist_csv}};
    if (overlay) {
      const std::vector<double> ev = overlay_values(cfg, label);
      if (ev.size() >= 2) {
        const std::string exp_csv = cfg.run.out + "/" + label + "_exp_kde.csv";
        write_kde_csv(ev, exp_csv, meta);
        const Kde k = kde(ev);
        SvgSeries ser{"exp t = " + format_double(t) + " s", k.x, k.density,
                      palette[ti % palette.size()], false, true, true};
        plot.series.push_back(ser);
        pt["exp_kde"] = exp_csv;
      }
    }
    points.push_back(pt);
  }
  if (cfg.run.svg) plot.write(cfg.run.out + "/distribution.svg");
  return {{"experiment", "distribution"}, {"points", points}};
}

nlohmann::json run_convergence(const ExperimentConfig& cfg) {
  prepare_out(cfg);
  const NoiseKind kind = noise_kind_from_string(cfg.noise.kind);
  const double gamma = kind_gamma(cfg, kind);
  const double fine_dt = cfg.convergence.fine_dt;
  const double T = cfg.pulse.duration;
  const int n_r = cfg.convergence.realizations;
  const auto& dts = cfg.convergence.dts;
  const int n_dt = static_cast<int>(dts.size());

  // Sub-microsecond control grids are deliberate here; lift the hardware floor.
  AmplitudeCalibration calib = make_calib(cfg);
  calib.min_segment = 0;
  const IntegratorOptions opts = make_integrator(cfg);

  std::vector<PulseSchedule> pulses;
  std::vector<QubitState> refs;
  for (double dt : dts) {
    pulses.push_back(constant_drive(1.0, T, dt, T, cfg.pulse.detuning));
    refs.push_back(evolve_ideal(pulses.back(), calib, QubitState::ket0(), 1.0));
  }

  std::vector<std::vector<double>> fids(n_dt, std::vector<double>(n_r, 0.0));
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_r; ++i) {
    try {
      NoiseParams np;
      np.kind = kind;
      np.gamma = gamma;
      np.kappa = cfg.noise.kappa;
      np.fine_dt = fine_dt;
      np.duration = T;
      np.seed = derive_seed(cfg.run.seed, "conv-trace", i);
      const NoiseTrace fine = generate_trace(np);
      for (int di = 0; di < n_dt; ++di) {
        const NoiseTrace tr = std::abs(dts[di] - fine_dt) <= 1e-12 * fine_dt
                                  ? fine
                                  : coarsen_trace(fine, dts[di]);
        const auto res = integrate_sse(pulses[di], calib, tr, QubitState::ket0(), 1.0, opts);
        fids[di][i] = fidelity(res.state, refs[di]);
      }
    } catch (...) {
#pragma omp critical(noisefid_conv_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);

  MomentSpec spec{kind, gamma, cfg.noise.kappa, 0.0};
  const double analytic = mean_fidelity(spec, T);
  Table tab;
  tab.columns = {"dt", "mean", "sd", "se", "n"};
  SvgSeries sim{"simulated", {}, {}, "#1f6fb4", true, true, false};
  for (int di = 0; di < n_dt; ++di) {
    const Stats st = stats(fids[di]);
    tab.add_row({dts[di], st.mean, st.sd, st.se, static_cast<double>(st.n)});
    sim.x.push_back(dts[di]);
    sim.y.push_back(st.mean);
  }
  const std::string csv = cfg.run.out + "/convergence.csv";
  nlohmann::json meta = base_meta(cfg);
  meta["analytic_mean"] = analytic;
  write_table_csv(tab, csv, meta);
  if (cfg.run.svg) {
    SvgPlot plot;
    plot.title = "Mean fidelity vs control-grid dt (shared fine noise paths)";
    plot.xlabel = "dt (s)";
    plot.ylabel = "mean fidelity";
    plot.logx = true;
    SvgSeries ana{"analytic", {dts.front(), dts.back()}, {analytic, analytic},
                  "#444444", false, true, true};
    plot.series = {ana, sim};
    plot.write(cfg.run.out + "/convergence.svg");
  }
  return {{"experiment", "convergence"}, {"csv", csv}, {"analytic_mean", analytic}};
}

nlohmann::json run_psd(const ExperimentConfig& cfg) {
  prepare_out(cfg);
  const std::size_t seg = std::size_t{1} << cfg.psd.segment_pow;
  const std::size_t n_samples = std::size_t{1} << cfg.psd.trace_pow;
  const double dt = cfg.psd.fine_dt;

  nlohmann::json fits;
  SvgPlot plot;
  plot.title = "Welch PSD of dX/dt";
  plot.xlabel = "f (Hz)";
  plot.ylabel = "S (rad^2/s^2/Hz)";
  plot.logx = plot.logy = true;
  const std::map<std::string, std::string> colors = {
      {"WN", "#1f6fb4"}, {"OU", "#d1495b"}, {"BM", "#2e8b57"}};

  nlohmann::json files = nlohmann::json::array();
  for (const auto& kind_s : cfg.sweep.kinds) {
    const NoiseKind kind = noise_kind_from_string(kind_s);
    NoiseParams np;
    np.kind = kind;
    np.gamma = kind_gamma(cfg, kind);
    np.kappa = kind == NoiseKind::ou ? cfg.psd.ou_kappa : cfg.noise.kappa;
    np.fine_dt = dt;
    np.duration = static_cast<double>(n_samples) * dt;
    std::vector<NoiseTrace> traces;
    traces.reserve(cfg.psd.traces);
    for (int i = 0; i < cfg.psd.traces; ++i) {
      np.seed = derive_seed(cfg.run.seed, "psd-" + to_string(kind), i);
      traces.push_back(generate_trace(np));
    }
    const PsdEstimate est = welch_psd(traces, seg);

    Table tab;
    tab.columns = {"freq_hz", "power"};
    for (std::size_t i = 0; i < est.freq.size(); ++i) tab.add_row({est.freq[i], est.power[i]});
    nlohmann::json meta = base_meta(cfg);
    meta["kind"] = to_string(kind);
    meta["gamma"] = np.gamma;
    meta["n_segments"] = est.n_segments;
    const std::string csv = cfg.run.out + "/psd_" + to_string(kind) + ".csv";
    write_table_csv(tab, csv, meta);
    files.push_back(csv);

    if (kind == NoiseKind::white) {
      fits["wn_slope"] = fit_loglog_slope(est, cfg.psd.slope_fmin, cfg.psd.slope_fmax);
      fits["wn_level_expected"] = 2.0 * np.gamma * np.gamma;
    } else if (kind == NoiseKind::brownian) {
      fits["bm_slope"] = fit_loglog_slope(est, cfg.psd.slope_fmin, cfg.psd.slope_fmax);
    } else {
      const KneeFit knee = fit_ou_knee(est, cfg.psd.knee_fmin, cfg.psd.knee_fmax);
      fits["ou_knee_hz"] = knee.knee_hz;
      fits["ou_knee_expected_hz"] = cfg.psd.ou_kappa / (2.0 * M_PI);
      fits["ou_kappa_fit"] = 2.0 * M_PI * knee.knee_hz;
      fits["ou_plateau"] = knee.amplitude;
    }
    const std::string color =
        colors.count(to_string(kind)) ? colors.at(to_string(kind)) : "#888888";
    plot.series.push_back({to_string(kind), est.freq, est.power, color, false, true, false});
  }
  write_file(cfg.run.out + "/psd_fits.json", fits.dump(2) + "\n");
  if (cfg.run.svg) plot.write(cfg.run.out + "/psd.svg");
  nlohmann::json out = {{"experiment", "psd"}, {"files", files}};
  out["fits"] = fits;
  return out;
}

nlohmann::json run_rb_experiment(const ExperimentConfig& cfg) {
  prepare_out(cfg);
  RBConfig rc;
  rc.lengths = cfg.rb.lengths;
  rc.n_sequences = cfg.rb.sequences;
  rc.n_meas = cfg.rb.meas;
  rc.composite = cfg.rb.composite;
  rc.noise.kind = noise_kind_from_string(cfg.noise.kind);
  rc.noise.gamma = kind_gamma(cfg, rc.noise.kind);
  rc.noise.kappa = cfg.noise.kappa;
  rc.noise.fine_dt = cfg.rb.segment_dt;
  rc.rabi = 2.0 * M_PI * cfg.rb.rabi_hz;
  rc.segment_dt = cfg.rb.segment_dt;
  rc.seed = derive_seed(cfg.run.seed, "rb", 0);

  std::optional<ArrayModel> model;
  if (cfg.rb.spam && cfg.array.enabled) {
    model = *experiment_model(cfg);
    model->site_scales = experiment_site_scales(cfg);
  }

  const std::vector<RBPoint> points = run_rb(rc, model);

  Table curve;
  curve.columns = {"length", "sequence", "p0"};
  int n_missing = 0;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.p0)) {
      ++n_missing;
      continue;
    }
    curve.add_row({static_cast<double>(pt.length), static_cast<double>(pt.sequence), pt.p0});
  }
  nlohmann::json meta = base_meta(cfg);
  meta["composite"] = rc.composite;
  meta["missing_points"] = n_missing;
  write_table_csv(curve, cfg.run.out + "/rb_curve.csv", meta);

  std::map<int, std::vector<double>> by_length;
  for (const auto& pt : points)
    if (std::isfinite(pt.p0)) by_length[pt.length].push_back(pt.p0);
  Table means;
  means.columns = {"length", "p0_mean", "p0_sd", "p0_se", "n"};
  std::vector<double> ls, ps;
  for (const auto& [len, vals] : by_length) {
    const Stats st = stats(vals);
    means.add_row({static_cast<double>(len), st.mean, st.sd, st.se,
                   static_cast<double>(st.n)});
    ls.push_back(len);
    ps.push_back(st.mean);
  }
  write_table_csv(means, cfg.run.out + "/rb_means.csv", meta);

  nlohmann::json fit_json;
  fit_json["avg_clifford_area_plain_pi"] = average_clifford_area(false) / M_PI;
  fit_json["avg_clifford_area_composite_pi"] = average_clifford_area(true) / M_PI;
  std::optional<RBFit> fit;
  try {
    fit = fit_rb_decay(ls, ps);
    fit_json["d0"] = fit->d0;
    fit_json["d"] = fit->d;
    fit_json["f_clifford"] = fit->f_clifford;
    fit_json["d0_err"] = fit->d0_err;
    fit_json["d_err"] = fit->d_err;
    fit_json["f_clifford_err"] = fit->f_clifford_err;
    fit_json["ssr"] = fit->ssr;
  } catch (const std::exception& e) {
    fit_json["error"] = e.what();
  }
  write_file(cfg.run.out + "/rb_fit.json", fit_json.dump(2) + "\n");

  if (cfg.run.svg) {
    SvgPlot plot;
    plot.title = "Randomized benchmarking";
    plot.xlabel = "sequence length";
    plot.ylabel = "P(|0>)";
    SvgSeries cloud{"sequences", {}, {}, "#9fb8d0", false, false, false};
    for (const auto& pt : points)
      if (std::isfinite(pt.p0)) {
        cloud.x.push_back(pt.length);
        cloud.y.push_back(pt.p0);
      }
    SvgSeries mean_ser{"mean", ls, ps, "#1f6fb4", true, true, false};
    plot.series = {cloud, mean_ser};
    if (fit) {
      SvgSeries fit_ser{"fit", {}, {}, "#d1495b", false, true, true};
      const double lmax = *std::max_element(ls.begin(), ls.end());
      for (int i = 0; i <= 100; ++i) {
        const double n = lmax * i / 100.0;
        fit_ser.x.push_back(n);
        fit_ser.y.push_back(0.5 + 0.5 * (1.0 - fit->d0) * std::pow(1.0 - fit->d, n));
      }
      plot.series.push_back(fit_ser);
    }
    plot.write(cfg.run.out + "/rb.svg");
  }
  nlohmann::json out = {{"experiment", "rb"}, {"points", points.size()}, {"missing", n_missing}};
  out["fit"] = fit_json;
  return out;
}

nlohmann::json run_spam_fit(const ExperimentConfig& cfg) {
  prepare_out(cfg);
  if (!cfg.array.enabled)
    throw std::invalid_argument("spam_fit requires array.enabled = true");
  const NoiseKind kind = noise_kind_from_string(cfg.noise.kind);
  const double gamma = kind_gamma(cfg, kind);
  const double t = cfg.pulse.duration;

  // Planted "experimental" side: measured fidelities under the configured SPAM.
  const PointRun exp_run = run_point(cfg, kind, gamma, t, "spamfit_exp", false);
  const std::vector<double> exp_samples = exp_run.run.ensemble.measured_values();
  if (exp_samples.size() < 2)
    throw FitFailed("spam_fit: fewer than 2 defined experimental samples");

  // Reference true-fidelity ensemble for the CRN sampler (independent seeds,
  // no measurement model on this pass).
  EnsembleConfig ec;
  ec.noise.kind = kind;
  ec.noise.gamma = gamma;
  ec.noise.kappa = cfg.noise.kappa;
  ec.noise.fine_dt = cfg.noise.fine_dt;
  ec.noise.duration = t;
  ec.pulse = make_pulse(cfg, t);
  ec.calib = make_calib(cfg);
  ec.site_scales = experiment_site_scales(cfg);
  ec.n_realizations = cfg.spamfit.sim_realizations;
  ec.master_seed = point_master_seed(cfg, "spamfit_sim");
  ec.integrator = make_integrator(cfg);
  const EnsembleRun sim_run = run_ensemble(ec);

  std::vector<std::vector<double>> rows(sim_run.ensemble.n_realizations);
  for (int i = 0; i < sim_run.ensemble.n_realizations; ++i) {
    rows[i].resize(sim_run.ensemble.n_sites);
    for (int j = 0; j < sim_run.ensemble.n_sites; ++j) rows[i][j] = sim_run.ensemble.f_true_at(i, j);
  }
  ArrayModel sampler_model = *experiment_model(cfg);
  const SpamReferenceSampler sampler(rows, sampler_model,
                                     derive_seed(cfg.run.seed, "spam-sampler", 0));

  SpamFitOptions opts;
  opts.grid_step = cfg.spamfit.grid_step;
  opts.refine_step = cfg.spamfit.refine_step;
  opts.bins = cfg.spamfit.bins;
  const SpamFit fit = fit_spam(
      exp_samples, [&](double p01, double p10) { return sampler.sample(p01, p10); }, opts);

  nlohmann::json meta = base_meta(cfg);
  write_kde_csv(exp_samples, cfg.run.out + "/spam_exp_kde.csv", meta);
  const std::vector<double> fitted_samples = sampler.sample(fit.p01, fit.p10);
  if (fitted_samples.size() >= 2)
    write_kde_csv(fitted_samples, cfg.run.out + "/spam_sim_kde.csv", meta);

  nlohmann::json out = {{"experiment", "spam_fit"},
                        {"planted_p01", cfg.array.p01},
                        {"planted_p10", cfg.array.p10},
                        {"p01", fit.p01},
                        {"p10", fit.p10},
                        {"kl", fit.kl}};
  write_file(cfg.run.out + "/spam_fit.json", out.dump(2) + "\n");

  if (cfg.run.svg && fitted_samples.size() >= 2) {
    SvgPlot plot;
    plot.title = "SPAM fit: measured-fidelity densities";
    plot.xlabel = "measured fidelity";
    plot.ylabel = "density";
    const Kde ke = kde(exp_samples);
    const Kde ks = kde(fitted_samples);
    plot.series = {{"experimental", ke.x, ke.density, "#1f6fb4", false, true, false},
                   {"fitted model", ks.x, ks.density, "#d1495b", false, true, true}};
    plot.write(cfg.run.out + "/spam_fit.svg");
  }
  return out;
}

nlohmann::json replay_experiment(const ExperimentConfig& cfg, const std::string& noise_dir,
                                 const std::string& measurements_file) {
  prepare_out(cfg);
  if (!fs::is_directory(noise_dir))
    throw std::invalid_argument("replay: noise directory not found: " + noise_dir);
  if (!fs::exists(measurements_file))
    throw std::invalid_argument("replay: measurements file not found: " + measurements_file);
  if (!cfg.array.enabled)
    throw std::invalid_argument("replay requires array.enabled = true");

  const std::string label = fs::path(measurements_file).parent_path().filename().string();
  if (label.empty())
    throw std::invalid_argument("replay: cannot derive point label from measurements path");
  const std::uint64_t master = point_master_seed(cfg, label);

  std::map<int, NoiseTrace> traces;
  for (const auto& entry : fs::directory_iterator(noise_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("trace_", 0) != 0 || entry.path().extension() != ".csv") continue;
    const std::string digits = entry.path().stem().string().substr(6);
    traces[std::stoi(digits)] = read_trace_csv(entry.path().string()).first;
  }
  if (traces.empty())
    throw std::invalid_argument("replay: no trace_*.csv files in " + noise_dir);

  const auto recorded = load_measurements(measurements_file);
  std::vector<std::string> missing;
  for (const auto& [id, tr] : traces)
    if (!recorded.count(id)) missing.push_back("measurement " + std::to_string(id));
  for (const auto& [id, v] : recorded)
    if (!traces.count(id)) missing.push_back("trace " + std::to_string(id));
  if (!missing.empty())
    throw AlignmentError("replay: trace/measurement realization ids do not align", missing);

  const AmplitudeCalibration calib = make_calib(cfg);
  const IntegratorOptions opts = make_integrator(cfg);
  const std::vector<double> scales = experiment_site_scales(cfg);
  ArrayModel model = *experiment_model(cfg);
  model.n_sites = static_cast<int>(scales.size());
  model.site_scales.clear();

  Table tab;
  tab.columns = {"realization", "f_m_recorded", "f_m_replayed", "f_true_mean"};
  std::vector<double> rec_vals, rep_vals;
  double max_diff = 0;
  bool any_pair = false;
  for (const auto& [id, tr] : traces) {
    const PulseSchedule pulse = make_pulse(cfg, tr.duration());
    const QubitState ref = evolve_ideal(pulse, calib, QubitState::ket0(), 1.0);
    std::vector<double> row(scales.size());
    for (std::size_t j = 0; j < scales.size(); ++j)
      row[j] = fidelity(integrate_sse(pulse, calib, tr, QubitState::ket0(), scales[j], opts).state,
                        ref);
    const auto replayed =
        simulate_measurements(row, model, ensemble_measurement_seed(master, id));
    const auto& rec = recorded.at(id);
    const double mean_f = std::accumulate(row.begin(), row.end(), 0.0) / row.size();
    tab.add_row({static_cast<double>(id), rec ? *rec : kNaN, replayed ? *replayed : kNaN,
                 mean_f});
    if (rec) rec_vals.push_back(*rec);
    if (replayed) rep_vals.push_back(*replayed);
    if (rec && replayed) {
      max_diff = std::max(max_diff, std::abs(*rec - *replayed));
      any_pair = true;
    }
  }
  nlohmann::json meta = base_meta(cfg);
  meta["label"] = label;
  meta["noise_dir"] = noise_dir;
  write_table_csv(tab, cfg.run.out + "/replay.csv", meta);

  nlohmann::json report = {{"experiment", "replay"},
                           {"label", label},
                           {"realizations", traces.size()},
                           {"recorded_defined", rec_vals.size()},
                           {"replayed_defined", rep_vals.size()}};
  if (any_pair) {
    report["max_abs_diff"] = max_diff;
    report["exact"] = max_diff == 0.0;
  }
  if (rec_vals.size() >= 2 && rep_vals.size() >= 2) {
    const auto hp = histogram_probs(rec_vals, cfg.distribution.bins);
    const auto hq = histogram_probs(rep_vals, cfg.distribution.bins);
    report["kl_recorded_vs_replayed"] = kl_divergence(hp, hq);
    write_kde_csv(rec_vals, cfg.run.out + "/replay_recorded_kde.csv", meta);
    write_kde_csv(rep_vals, cfg.run.out + "/replay_replayed_kde.csv", meta);
    if (cfg.run.svg) {
      SvgPlot plot;
      plot.title = "Replay: recorded vs replayed measured fidelity";
      plot.xlabel = "measured fidelity";
      plot.ylabel = "density";
      const Kde kr = kde(rec_vals);
      const Kde kp = kde(rep_vals);
      plot.series = {{"recorded", kr.x, kr.density, "#1f6fb4", false, true, false},
                     {"replayed", kp.x, kp.density, "#d1495b", false, true, true}};
      plot.write(cfg.run.out + "/replay.svg");
    }
  }
  write_file(cfg.run.out + "/replay_report.json", report.dump(2) + "\n");
  return report;
}

nlohmann::json run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment == "gamma_sweep") return run_gamma_sweep(cfg);
  if (cfg.experiment == "time_sweep") return run_time_sweep(cfg);
  if (cfg.experiment == "variance_sweep") return run_variance_sweep(cfg);
  if (cfg.experiment == "distribution") return run_distribution(cfg);
  if (cfg.experiment == "convergence") return run_convergence(cfg);
  if (cfg.experiment == "psd") return run_psd(cfg);
  if (cfg.experiment == "rb") return run_rb_experiment(cfg);
  if (cfg.experiment == "spam_fit") return run_spam_fit(cfg);
  throw std::invalid_argument("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace noisefid
