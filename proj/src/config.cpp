#include "noisefid/config.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "noisefid/io.hpp"
#include "noisefid/rng.hpp"

namespace noisefid {
namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  double x = std::strtod(v.c_str(), &end);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
  return x;
}

long long parse_int(const std::string& key, const std::string& v) {
  double x = parse_double(key, v);
  long long i = static_cast<long long>(x);
  if (static_cast<double>(i) != x)
    throw std::invalid_argument("config: expected integer for " + key + ": '" + v + "'");
  return i;
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  errno = 0;
  char* end = nullptr;
  unsigned long long x = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    throw std::invalid_argument("config: bad unsigned integer for " + key + ": '" + v + "'");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(parse_double(key, s));
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const auto& s : split_list(v)) out.push_back(static_cast<int>(parse_int(key, s)));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.experiment = v; }},
      {"noise.kind", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.noise.kind = v; }},
      {"noise.gamma", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.noise.gamma = parse_double(k, v); }},
      {"noise.gamma_bm", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.noise.gamma_bm = parse_double(k, v); }},
      {"noise.kappa", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.noise.kappa = parse_double(k, v); }},
      {"noise.fine_dt", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.noise.fine_dt = parse_double(k, v); }},
      {"pulse.rabi_hz", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pulse.rabi_hz = parse_double(k, v); }},
      {"pulse.duration", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pulse.duration = parse_double(k, v); }},
      {"pulse.segment_dt", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pulse.segment_dt = parse_double(k, v); }},
      {"pulse.detuning", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pulse.detuning = parse_double(k, v); }},
      {"pulse.calibration_file", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.pulse.calibration_file = v; }},
      {"pulse.min_segment", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.pulse.min_segment = parse_double(k, v); }},
      {"pulse.noise_mode", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.pulse.noise_mode = v; }},
      {"array.enabled", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.array.enabled = parse_bool(k, v); }},
      {"array.sites", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.array.sites = static_cast<int>(parse_int(k, v)); }},
      {"array.meas", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.array.meas = static_cast<int>(parse_int(k, v)); }},
      {"array.p_c", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.array.p_c = parse_double(k, v); }},
      {"array.p01", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.array.p01 = parse_double(k, v); }},
      {"array.p10", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.array.p10 = parse_double(k, v); }},
      {"array.site_cv", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.array.site_cv = parse_double(k, v); }},
      {"run.realizations", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.run.realizations = static_cast<int>(parse_int(k, v)); }},
      {"run.seed", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.run.seed = parse_u64(k, v); }},
      {"run.out", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.run.out = v; }},
      {"run.threads", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.run.threads = static_cast<int>(parse_int(k, v)); }},
      {"run.svg", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.run.svg = parse_bool(k, v); }},
      {"run.export_traces", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.run.export_traces = parse_bool(k, v); }},
      {"run.replay_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.run.replay_dir = v; }},
      {"sweep.gammas", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.sweep.gammas = parse_doubles(k, v); }},
      {"sweep.times", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.sweep.times = parse_doubles(k, v); }},
      {"sweep.kinds", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.sweep.kinds = split_list(v); }},
      {"convergence.dts", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.convergence.dts = parse_doubles(k, v); }},
      {"convergence.fine_dt", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.convergence.fine_dt = parse_double(k, v); }},
      {"convergence.realizations", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.convergence.realizations = static_cast<int>(parse_int(k, v)); }},
      {"distribution.bins", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.distribution.bins = static_cast<int>(parse_int(k, v)); }},
      {"distribution.times", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.distribution.times = parse_doubles(k, v); }},
      {"psd.traces", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.psd.traces = static_cast<int>(parse_int(k, v)); }},
      {"psd.fine_dt", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.psd.fine_dt = parse_double(k, v); }},
      {"psd.segment_pow", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.psd.segment_pow = static_cast<int>(parse_int(k, v)); }},
      {"psd.trace_pow", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.psd.trace_pow = static_cast<int>(parse_int(k, v)); }},
      {"psd.ou_kappa", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.psd.ou_kappa = parse_double(k, v); }},
      {"psd.slope_fmin", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.psd.slope_fmin = parse_double(k, v); }},
      {"psd.slope_fmax", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.psd.slope_fmax = parse_double(k, v); }},
      {"psd.knee_fmin", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.psd.knee_fmin = parse_double(k, v); }},
      {"psd.knee_fmax", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.psd.knee_fmax = parse_double(k, v); }},
      {"rb.lengths", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rb.lengths = parse_ints(k, v); }},
      {"rb.sequences", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rb.sequences = static_cast<int>(parse_int(k, v)); }},
      {"rb.meas", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rb.meas = static_cast<int>(parse_int(k, v)); }},
      {"rb.composite", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rb.composite = parse_bool(k, v); }},
      {"rb.spam", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rb.spam = parse_bool(k, v); }},
      {"rb.rabi_hz", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rb.rabi_hz = parse_double(k, v); }},
      {"rb.segment_dt", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.rb.segment_dt = parse_double(k, v); }},
      {"spamfit.sim_realizations", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.spamfit.sim_realizations = static_cast<int>(parse_int(k, v)); }},
      {"spamfit.grid_step", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.spamfit.grid_step = parse_double(k, v); }},
      {"spamfit.refine_step", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.spamfit.refine_step = parse_double(k, v); }},
      {"spamfit.bins", [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.spamfit.bins = static_cast<int>(parse_int(k, v)); }},
  };
  return table;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("config: " + msg);
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"gamma_sweep",  "time_sweep", "variance_sweep",
                                                 "distribution", "convergence", "psd",
                                                 "rb",           "spam_fit"};
  return names;
}

ExperimentConfig default_config(const std::string& experiment) {
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  for (int i = 0; i <= 9; ++i) cfg.sweep.times.push_back(20e-6 * i);
  if (experiment == "gamma_sweep" || experiment == "variance_sweep" || experiment == "distribution" ||
      experiment == "convergence")
    cfg.noise.kind = "WN";
  if (experiment == "variance_sweep") {
    cfg.sweep.times.clear();
    for (int i = 1; i <= 10; ++i) cfg.sweep.times.push_back(20e-6 * i);
  }
  if (experiment == "spam_fit") cfg.noise.gamma = 0.0;  // zero-noise reference condition
  cfg.run.out = "out/" + experiment;
  return cfg;
}

void ExperimentConfig::validate() const {
  const auto& names = experiment_names();
  require(std::find(names.begin(), names.end(), experiment) != names.end(),
          "unknown experiment '" + experiment + "'");
  noise_kind_from_string(noise.kind);  // throws on bad kind
  require(noise.gamma >= 0, "noise.gamma must be >= 0");
  require(noise.gamma_bm > 0, "noise.gamma_bm must be > 0");
  require(noise.kappa > 0, "noise.kappa must be > 0");
  require(noise.fine_dt > 0, "noise.fine_dt must be > 0");
  require(pulse.rabi_hz > 0, "pulse.rabi_hz must be > 0");
  require(pulse.duration > 0, "pulse.duration must be > 0");
  require(pulse.segment_dt > 0, "pulse.segment_dt must be > 0");
  require(pulse.min_segment >= 0, "pulse.min_segment must be >= 0");
  require(pulse.noise_mode == "rabi_phase" || pulse.noise_mode == "setpoint",
          "pulse.noise_mode must be rabi_phase or setpoint");
  if (!pulse.calibration_file.empty())
    require(std::filesystem::exists(pulse.calibration_file),
            "calibration file not found: " + pulse.calibration_file);
  require(array.sites >= 1 && array.meas >= 1, "array.sites and array.meas must be >= 1");
  require(array.p_c > 0 && array.p_c <= 1, "array.p_c must be in (0, 1]");
  require(array.p01 >= 0 && array.p01 <= 1 && array.p10 >= 0 && array.p10 <= 1,
          "array.p01/p10 must be in [0, 1]");
  require(array.site_cv >= 0, "array.site_cv must be >= 0");
  require(run.realizations >= 1, "run.realizations must be >= 1");
  require(run.threads >= 0, "run.threads must be >= 0");
  if (!run.replay_dir.empty())
    require(std::filesystem::is_directory(run.replay_dir),
            "replay directory not found: " + run.replay_dir);
  require(!sweep.gammas.empty(), "sweep.gammas must be non-empty");
  for (double g : sweep.gammas) require(g >= 0, "sweep.gammas entries must be >= 0");
  require(!sweep.times.empty(), "sweep.times must be non-empty");
  for (double t : sweep.times) require(t >= 0, "sweep.times entries must be >= 0");
  require(!sweep.kinds.empty(), "sweep.kinds must be non-empty");
  for (const auto& k : sweep.kinds) noise_kind_from_string(k);
  require(!convergence.dts.empty(), "convergence.dts must be non-empty");
  for (double dt : convergence.dts) require(dt > 0, "convergence.dts entries must be > 0");
  require(convergence.fine_dt > 0, "convergence.fine_dt must be > 0");
  require(convergence.realizations >= 2, "convergence.realizations must be >= 2");
  require(distribution.bins >= 2, "distribution.bins must be >= 2");
  require(!distribution.times.empty(), "distribution.times must be non-empty");
  require(psd.traces >= 1, "psd.traces must be >= 1");
  require(psd.fine_dt > 0, "psd.fine_dt must be > 0");
  require(psd.segment_pow >= 4 && psd.segment_pow <= 24, "psd.segment_pow out of range [4, 24]");
  require(psd.trace_pow >= psd.segment_pow, "psd.trace_pow must be >= psd.segment_pow");
  require(psd.ou_kappa > 0, "psd.ou_kappa must be > 0");
  require(psd.slope_fmin > 0 && psd.slope_fmax > psd.slope_fmin, "bad psd slope band");
  require(psd.knee_fmin > 0 && psd.knee_fmax > psd.knee_fmin, "bad psd knee band");
  require(!rb.lengths.empty(), "rb.lengths must be non-empty");
  for (int n : rb.lengths) require(n >= 1, "rb.lengths entries must be >= 1");
  require(rb.sequences >= 1 && rb.meas >= 1, "rb.sequences and rb.meas must be >= 1");
  require(rb.rabi_hz > 0 && rb.segment_dt > 0, "rb.rabi_hz and rb.segment_dt must be > 0");
  require(spamfit.sim_realizations >= 10, "spamfit.sim_realizations must be >= 10");
  require(spamfit.grid_step > 0 && spamfit.grid_step <= 0.5, "spamfit.grid_step out of range");
  require(spamfit.refine_step > 0 && spamfit.refine_step <= spamfit.grid_step,
          "spamfit.refine_step must be in (0, grid_step]");
  require(spamfit.bins >= 10, "spamfit.bins must be >= 10");
}

void apply_ini_text(ExperimentConfig& cfg, const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  const auto& table = setters();
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    std::string full = section.empty() ? key : section + "." + key;
    auto it = table.find(full);
    if (it == table.end())
      throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": unknown config key '" + full + "'");
    it->second(cfg, full, value);
  }
}

void apply_ini(ExperimentConfig& cfg, const std::string& path) {
  apply_ini_text(cfg, read_file(path), path);
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["experiment"] = cfg.experiment;
  j["noise"] = {{"kind", cfg.noise.kind},       {"gamma", cfg.noise.gamma},
                {"gamma_bm", cfg.noise.gamma_bm}, {"kappa", cfg.noise.kappa},
                {"fine_dt", cfg.noise.fine_dt}};
  j["pulse"] = {{"rabi_hz", cfg.pulse.rabi_hz},
                {"duration", cfg.pulse.duration},
                {"segment_dt", cfg.pulse.segment_dt},
                {"detuning", cfg.pulse.detuning},
                {"calibration_file", cfg.pulse.calibration_file},
                {"min_segment", cfg.pulse.min_segment},
                {"noise_mode", cfg.pulse.noise_mode}};
  j["array"] = {{"enabled", cfg.array.enabled}, {"sites", cfg.array.sites}, {"meas", cfg.array.meas},
                {"p_c", cfg.array.p_c},         {"p01", cfg.array.p01},     {"p10", cfg.array.p10},
                {"site_cv", cfg.array.site_cv}};
  j["run"] = {{"realizations", cfg.run.realizations},
              {"seed", cfg.run.seed},
              {"out", cfg.run.out},
              {"threads", cfg.run.threads},
              {"svg", cfg.run.svg},
              {"export_traces", cfg.run.export_traces},
              {"replay_dir", cfg.run.replay_dir}};
  j["sweep"] = {{"gammas", cfg.sweep.gammas}, {"times", cfg.sweep.times}, {"kinds", cfg.sweep.kinds}};
  j["convergence"] = {{"dts", cfg.convergence.dts},
                      {"fine_dt", cfg.convergence.fine_dt},
                      {"realizations", cfg.convergence.realizations}};
  j["distribution"] = {{"bins", cfg.distribution.bins}, {"times", cfg.distribution.times}};
  j["psd"] = {{"traces", cfg.psd.traces},           {"fine_dt", cfg.psd.fine_dt},
              {"segment_pow", cfg.psd.segment_pow}, {"trace_pow", cfg.psd.trace_pow},
              {"ou_kappa", cfg.psd.ou_kappa},       {"slope_fmin", cfg.psd.slope_fmin},
              {"slope_fmax", cfg.psd.slope_fmax},   {"knee_fmin", cfg.psd.knee_fmin},
              {"knee_fmax", cfg.psd.knee_fmax}};
  j["rb"] = {{"lengths", cfg.rb.lengths},     {"sequences", cfg.rb.sequences},
             {"meas", cfg.rb.meas},           {"composite", cfg.rb.composite},
             {"spam", cfg.rb.spam},           {"rabi_hz", cfg.rb.rabi_hz},
             {"segment_dt", cfg.rb.segment_dt}};
  j["spamfit"] = {{"sim_realizations", cfg.spamfit.sim_realizations},
                  {"grid_step", cfg.spamfit.grid_step},
                  {"refine_step", cfg.spamfit.refine_step},
                  {"bins", cfg.spamfit.bins}};
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  nlohmann::json j = config_to_json(cfg);
  // Only result-affecting fields enter the hash: worker count, output paths and
  // artifact toggles must not change it (byte-identical reruns across threads).
  j["run"].erase("threads");
  j["run"].erase("out");
  j["run"].erase("svg");
  j["run"].erase("export_traces");
  std::uint64_t h = fnv1a64(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace noisefid
