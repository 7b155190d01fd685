#include "noisefid/rb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <omp.h>

#include "noisefid/clifford.hpp"
#include "noisefid/curvefit.hpp"
#include "noisefid/errors.hpp"
#include "noisefid/rng.hpp"
#include "noisefid/scrofulous.hpp"
#include "noisefid/sse.hpp"

namespace noisefid {

RBSequence rb_sequence(int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("rb_sequence: n must be >= 1");
  const auto& group = clifford_group();
  RandomStream rng(seed, 0);
  RBSequence seq;
  seq.gates.resize(n);
  Mat2 total = Mat2::Identity();
  for (int i = 0; i < n; ++i) {
    const int g = static_cast<int>(rng.next_u64() % 24);
    seq.gates[i] = g;
    total = group[g].unitary * total;
  }
  seq.inversion = find_clifford(total.adjoint());
  if (seq.inversion < 0)
    throw std::logic_error("rb_sequence: inverse not found in the group");
  return seq;
}

namespace {

void append_primitive(PulseSchedule& sched, const PrimitiveRotation& prim, double rabi_max,
                      double segment_dt) {
  const int k = std::max(
      1, static_cast<int>(std::ceil(prim.angle / (rabi_max * segment_dt) - 1e-12)));
  const double setpoint = prim.angle / (static_cast<double>(k) * segment_dt) / rabi_max;
  for (int i = 0; i < k; ++i)
    sched.segments.push_back({setpoint, 0.0, prim.phase, segment_dt});
}

std::vector<PrimitiveRotation> expanded_decomposition(const CliffordGate& gate,
                                                      bool composite) {
  if (!composite) return gate.decomposition;
  std::vector<PrimitiveRotation> out;
  for (const auto& prim : gate.decomposition) {
    const auto comp = scrofulous(prim.angle, prim.phase);
    out.insert(out.end(), comp.begin(), comp.end());
  }
  return out;
}

}  // namespace

CompiledSequence compile_sequence(const RBSequence& seq, double rabi_max, double segment_dt,
                                  bool composite) {
  if (!(rabi_max > 0) || !(segment_dt > 0))
    throw std::invalid_argument("compile_sequence: rabi_max and segment_dt must be > 0");
  const auto& group = clifford_group();
  CompiledSequence out;
  out.schedule.segment_dt = segment_dt;

  std::vector<int> order = seq.gates;
  order.push_back(seq.inversion);
  for (int g : order) {
    for (const auto& prim : expanded_decomposition(group[g], composite)) {
      append_primitive(out.schedule, prim, rabi_max, segment_dt);
      out.pulse_area += prim.angle;
    }
  }
  if (out.schedule.segments.empty())  // all-identity sequence: keep one idle segment
    out.schedule.segments.push_back({0.0, 0.0, 0.0, segment_dt});
  out.schedule.noise_duration = out.schedule.total_duration();
  out.schedule.validate();
  return out;
}

double average_clifford_area(bool composite) {
  const auto& group = clifford_group();
  double total = 0;
  for (const auto& g : group)
    for (const auto& prim : expanded_decomposition(g, composite)) total += prim.angle;
  return total / static_cast<double>(group.size());
}

void RBConfig::validate() const {
  if (lengths.empty()) throw std::invalid_argument("rb: lengths must be non-empty");
  for (int n : lengths)
    if (n < 1) throw std::invalid_argument("rb: lengths must all be >= 1");
  if (n_sequences < 1 || n_meas < 1)
    throw std::invalid_argument("rb: n_sequences and n_meas must be >= 1");
  if (!(rabi > 0) || !(segment_dt > 0))
    throw std::invalid_argument("rb: rabi and segment_dt must be > 0");
}

std::vector<RBPoint> run_rb(const RBConfig& config, const std::optional<ArrayModel>& model) {
  config.validate();
  if (model) model->validate();
  const int n_sites = model ? model->n_sites : 1;
  std::vector<double> scales(n_sites, 1.0);
  if (model && !model->site_scales.empty()) scales = model->site_scales;

  AmplitudeCalibration calib = AmplitudeCalibration::linear(config.rabi);
  calib.min_segment = std::min(calib.min_segment, config.segment_dt);

  const bool with_noise = config.noise.gamma > 0;
  const QubitState psi0 = QubitState::ket0();

  std::vector<RBPoint> points(config.lengths.size() * config.n_sequences);
  std::exception_ptr error;
#pragma omp parallel for collapse(2) schedule(dynamic)
  for (std::int64_t li = 0; li < static_cast<std::int64_t>(config.lengths.size()); ++li) {
    for (int s = 0; s < config.n_sequences; ++s) {
      try {
      const int n = config.lengths[li];
      const std::uint64_t job = static_cast<std::uint64_t>(li) * 100000 + s;
      const auto seq = rb_sequence(n, derive_seed(config.seed, "rb-seq", job));
      const auto compiled =
          compile_sequence(seq, config.rabi, config.segment_dt, config.composite);

      NoiseTrace trace;
      if (with_noise) {
        NoiseParams np = config.noise;
        np.fine_dt = config.segment_dt;
        np.duration = compiled.schedule.total_duration();
        np.seed = derive_seed(config.seed, "rb-noise", job);
        trace = generate_trace(np);
      }

      std::vector<double> p0_row(n_sites);
      for (int j = 0; j < n_sites; ++j) {
        QubitState psi =
            with_noise
                ? integrate_sse(compiled.schedule, calib, trace, psi0, scales[j]).state
                : evolve_ideal(compiled.schedule, calib, psi0, scales[j]);
        p0_row[j] = population0(psi);
      }

      double p0;
      if (model) {
        ArrayModel m = *model;
        m.n_meas = config.n_meas;
        const auto meas =
            simulate_measurements(p0_row, m, derive_seed(config.seed, "rb-meas", job));
        p0 = meas.value_or(std::numeric_limits<double>::quiet_NaN());
      } else {
        double mean = 0;
        for (double v : p0_row) mean += v;
        p0 = mean / n_sites;
      }
      points[static_cast<std::size_t>(li) * config.n_sequences + s] =
          RBPoint{n, s, p0};
      } catch (...) {
#pragma omp critical(noisefid_rb_error)
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
  return points;
}

RBFit fit_rb_decay(const std::vector<double>& lengths,
                   const std::vector<double>& probabilities) {
  if (lengths.size() != probabilities.size())
    throw std::invalid_argument("fit_rb_decay: size mismatch");
  std::vector<double> distinct = lengths;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    throw std::invalid_argument("fit_rb_decay: need >= 3 distinct lengths");

  // Linearized start: log(2p - 1) = log(1 - d0) + n log(1 - d).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n_ok = 0;
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const double z = 2.0 * probabilities[i] - 1.0;
    if (z <= 1e-6) continue;
    const double x = lengths[i], y = std::log(z);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n_ok;
  }
  double d0_init = 0.05, d_init = 1e-3;
  if (n_ok >= 2) {
    const double denom = n_ok * sxx - sx * sx;
    if (std::abs(denom) > 1e-12) {
      const double slope = (n_ok * sxy - sx * sy) / denom;
      const double icept = (sy - slope * sx) / n_ok;
      d_init = std::clamp(-std::expm1(slope), 1e-9, 0.9);
      d0_init = std::clamp(-std::expm1(icept), 1e-6, 0.9);
    }
  }

  const auto model = [](double n, const Eigen::VectorXd& p) {
    return 0.5 + 0.5 * (1.0 - p(0)) * std::pow(1.0 - p(1), n);
  };
  Eigen::VectorXd p0(2);
  p0 << d0_init, d_init;
  const CurveFitResult fit = lm_fit(model, lengths, probabilities, p0);
  if (!fit.converged) throw FitFailed("fit_rb_decay: LM did not converge");

  RBFit out;
  out.d0 = fit.params(0);
  out.d = fit.params(1);
  out.f_clifford = 1.0 - 0.5 * out.d;
  out.d0_err = fit.stderrs(0);
  out.d_err = fit.stderrs(1);
  out.f_clifford_err = 0.5 * fit.stderrs(1);
  out.ssr = fit.ssr;
  return out;
}

RBFit fit_rb_decay(const std::vector<RBPoint>& points) {
  std::vector<double> n, p;
  for (const auto& pt : points) {
    if (!std::isfinite(pt.p0)) continue;  // missing measurement (no atoms)
    n.push_back(pt.length);
    p.push_back(pt.p0);
  }
  return fit_rb_decay(n, p);
}

}  // namespace noisefid
