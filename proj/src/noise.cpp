#include "noisefid/noise.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "noisefid/io.hpp"

namespace noisefid {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::white: return "WN";
    case NoiseKind::ou: return "OU";
    case NoiseKind::brownian: return "BM";
  }
  throw std::invalid_argument("unknown NoiseKind");
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "WN" || s == "wn" || s == "white") return NoiseKind::white;
  if (s == "OU" || s == "ou") return NoiseKind::ou;
  if (s == "BM" || s == "bm" || s == "brownian") return NoiseKind::brownian;
  throw std::invalid_argument("unknown noise kind '" + s + "'");
}

void NoiseParams::validate() const {
  if (!(gamma >= 0)) throw std::invalid_argument("noise: gamma must be >= 0");
  if (!(kappa >= 0)) throw std::invalid_argument("noise: kappa must be >= 0");
  if (!(fine_dt > 0)) throw std::invalid_argument("noise: fine_dt must be > 0");
  if (!(duration > 0)) throw std::invalid_argument("noise: duration must be > 0");
  const double ratio = duration / fine_dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio + 1e-9)
    throw std::invalid_argument("noise: duration must be an integer multiple of fine_dt");
}

std::size_t NoiseParams::steps() const {
  return static_cast<std::size_t>(std::llround(duration / fine_dt));
}

double NoiseTrace::total_displacement() const {
  double s = 0;
  for (double v : dx) s += v;
  return s;
}

double NoiseTrace::total_qv() const {
  double s = 0;
  for (double v : dqv) s += v;
  return s;
}

std::vector<double> NoiseTrace::cumulative() const {
  std::vector<double> x(dx.size() + 1, 0.0);
  for (std::size_t k = 0; k < dx.size(); ++k) x[k + 1] = x[k] + dx[k];
  return x;
}

std::vector<double> wiener_increments(std::size_t n, double dt, std::uint64_t seed,
                                      std::uint64_t stream) {
  if (n == 0) throw std::invalid_argument("wiener_increments: n must be >= 1");
  if (!(dt > 0)) throw std::invalid_argument("wiener_increments: dt must be > 0");
  RandomStream rng(seed, stream);
  std::vector<double> dw(n);
  const double s = std::sqrt(dt);
  for (auto& v : dw) v = s * rng.gaussian();
  return dw;
}

NoiseTrace generate_trace(const NoiseParams& p) {
  p.validate();
  const std::size_t n = p.steps();
  NoiseTrace t;
  t.dt = p.fine_dt;
  t.kind = p.kind;
  t.seed = p.seed;
  t.dx.resize(n);
  t.dqv.resize(n);

  RandomStream rng(p.seed, 0);
  const double dt = p.fine_dt;
  const double qv = p.gamma * p.gamma * dt;

  switch (p.kind) {
    case NoiseKind::white: {
      const double s = p.gamma * std::sqrt(dt);
      for (std::size_t k = 0; k < n; ++k) {
        t.dx[k] = s * rng.gaussian();
        t.dqv[k] = qv;
      }
      break;
    }
    case NoiseKind::ou: {
      // Exact discretization of dX = -kappa X dt + gamma dW from X_0 = 0:
      // X_{k+1} = e^{-kappa dt} X_k + gamma sqrt((1 - e^{-2 kappa dt})/(2 kappa)) N_k.
      // kappa -> 0 recovers the WN update.
      const double alpha = std::exp(-p.kappa * dt);
      const double var = (p.kappa > 0)
                             ? -std::expm1(-2.0 * p.kappa * dt) / (2.0 * p.kappa)
                             : dt;
      const double s = p.gamma * std::sqrt(var);
      double x = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double xn = alpha * x + s * rng.gaussian();
        t.dx[k] = xn - x;
        t.dqv[k] = qv;
        x = xn;
      }
      break;
    }
    case NoiseKind::brownian: {
      // X_t = gamma * int_0^t W_s ds, trapezoid on the fine grid. Finite
      // variation, so dQV is identically zero.
      const double s = std::sqrt(dt);
      double w = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const double wn = w + s * rng.gaussian();
        t.dx[k] = p.gamma * dt * 0.5 * (w + wn);
        t.dqv[k] = 0.0;
        w = wn;
      }
      break;
    }
  }
  return t;
}

NoiseTrace coarsen_trace(const NoiseTrace& trace, double coarse_dt) {
  if (trace.size() == 0) throw std::invalid_argument("coarsen_trace: empty trace");
  const double ratio = coarse_dt / trace.dt;
  const auto factor = static_cast<std::size_t>(std::llround(ratio));
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-6 * ratio)
    throw std::invalid_argument("coarsen_trace: coarse_dt must be an integer multiple of dt");
  if (trace.size() % factor != 0)
    throw std::invalid_argument("coarsen_trace: block size must divide the trace length");
  if (factor == 1) return trace;

  NoiseTrace out;
  out.dt = coarse_dt;
  out.kind = trace.kind;
  out.seed = trace.seed;
  const std::size_t m = trace.size() / factor;
  out.dx.resize(m);
  out.dqv.resize(m);
  for (std::size_t b = 0; b < m; ++b) {
    double sx = 0, sq = 0;
    for (std::size_t j = b * factor; j < (b + 1) * factor; ++j) {
      sx += trace.dx[j];
      sq += trace.dqv[j];
    }
    out.dx[b] = sx;
    out.dqv[b] = sq;
  }
  return out;
}

void write_trace_csv(const NoiseTrace& trace, const NoiseParams& params,
                     const std::string& path) {
  nlohmann::json hdr = {
      {"kind", to_string(trace.kind)}, {"gamma", params.gamma},
      {"kappa", params.kappa},         {"fine_dt", params.fine_dt},
      {"duration", params.duration},   {"seed", trace.seed},
      {"dt", trace.dt},
  };
  std::ostringstream os;
  os << "# " << hdr.dump() << "\n";
  os << "index,dX,dQV\n";
  for (std::size_t k = 0; k < trace.size(); ++k)
    os << k << "," << format_double(trace.dx[k]) << "," << format_double(trace.dqv[k]) << "\n";
  write_file(path, os.str());
}

std::pair<NoiseTrace, NoiseParams> read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open trace: " + path);
  std::string line;
  if (!std::getline(in, line) || line.size() < 2 || line[0] != '#')
    throw std::invalid_argument("trace missing JSON header: " + path);
  const auto hdr = nlohmann::json::parse(line.substr(1));

  NoiseParams p;
  p.kind = noise_kind_from_string(hdr.at("kind").get<std::string>());
  p.gamma = hdr.at("gamma").get<double>();
  p.kappa = hdr.at("kappa").get<double>();
  p.fine_dt = hdr.at("fine_dt").get<double>();
  p.duration = hdr.at("duration").get<double>();
  p.seed = hdr.at("seed").get<std::uint64_t>();

  NoiseTrace t;
  t.kind = p.kind;
  t.seed = p.seed;
  t.dt = hdr.at("dt").get<double>();

  if (!std::getline(in, line) || line != "index,dX,dQV")
    throw std::invalid_argument("trace missing column header: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::invalid_argument("malformed trace row in " + path);
    double dx = 0, dqv = 0;
    auto r1 = std::from_chars(line.data() + c1 + 1, line.data() + c2, dx);
    auto r2 = std::from_chars(line.data() + c2 + 1, line.data() + line.size(), dqv);
    if (r1.ec != std::errc{} || r2.ec != std::errc{})
      throw std::invalid_argument("malformed trace row in " + path);
    t.dx.push_back(dx);
    t.dqv.push_back(dqv);
  }
  return {std::move(t), p};
}

}  // namespace noisefid
