#include "noisefid/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "noisefid/io.hpp"

namespace noisefid {
namespace {

constexpr double kWidth = 760, kHeight = 500;
constexpr double kLeft = 80, kRight = 26, kTop = 42, kBottom = 60;

std::string fmt_tick(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double map(double v, double pix_lo, double pix_hi) const {
    double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return pix_lo + t * (pix_hi - pix_lo);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (int e = static_cast<int>(std::ceil(lo - 1e-9)); e <= static_cast<int>(std::floor(hi + 1e-9)); ++e)
        out.push_back(std::pow(10.0, e));
      if (out.size() < 2) out = {std::pow(10.0, lo), std::pow(10.0, hi)};
      return out;
    }
    double span = hi - lo;
    double raw = span / 5.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0})
      if (mag * m >= raw) { step = mag * m; break; }
    double first = std::ceil(lo / step - 1e-9) * step;
    for (double v = first; v <= hi + 0.5 * step; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
  }
};

Axis fit_axis(const std::vector<SvgSeries>& series, bool take_x, bool log) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      double v = take_x ? s.x[i] : s.y[i];
      double other = take_x ? s.y[i] : s.x[i];
      if (!std::isfinite(v) || !std::isfinite(other)) continue;
      if (log && v <= 0) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  Axis ax;
  ax.log = log;
  if (!std::isfinite(lo)) { lo = log ? 1 : 0; hi = log ? 10 : 1; }
  if (log) {
    ax.lo = std::floor(std::log10(lo) - 1e-9);
    ax.hi = std::ceil(std::log10(hi) + 1e-9);
    if (ax.hi - ax.lo < 1) ax.hi = ax.lo + 1;
  } else {
    if (hi <= lo) { hi = lo + 1; }
    double pad = 0.06 * (hi - lo);
    ax.lo = lo - pad;
    ax.hi = hi + pad;
  }
  return ax;
}

}  // namespace

void SvgPlot::write(const std::string& path) const {
  Axis ax = fit_axis(series, true, logx);
  Axis ay = fit_axis(series, false, logy);
  const double px0 = kLeft, px1 = kWidth - kRight;
  const double py0 = kHeight - kBottom, py1 = kTop;  // y grows upward

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << xml_escape(title) << "</text>\n";

  // gridlines + ticks
  for (double tv : ax.ticks()) {
    double x = ax.map(tv, px0, px1);
    if (x < px0 - 0.5 || x > px1 + 0.5) continue;
    s << "<line x1=\"" << x << "\" y1=\"" << py0 << "\" x2=\"" << x << "\" y2=\"" << py1
      << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
      << "<text x=\"" << x << "\" y=\"" << py0 + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_tick(tv) << "</text>\n";
  }
  for (double tv : ay.ticks()) {
    double y = ay.map(tv, py0, py1);
    if (y > py0 + 0.5 || y < py1 - 0.5) continue;
    s << "<line x1=\"" << px0 << "\" y1=\"" << y << "\" x2=\"" << px1 << "\" y2=\"" << y
      << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n"
      << "<text x=\"" << px0 - 6 << "\" y=\"" << y + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt_tick(tv) << "</text>\n";
  }
  s << "<rect x=\"" << px0 << "\" y=\"" << py1 << "\" width=\"" << px1 - px0 << "\" height=\"" << py0 - py1
    << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
    << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << kHeight - 14
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << xml_escape(xlabel) << "</text>\n"
    << "<text x=\"20\" y=\"" << (py0 + py1) / 2 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
    << "font-size=\"13\" transform=\"rotate(-90 20 " << (py0 + py1) / 2 << ")\">" << xml_escape(ylabel)
    << "</text>\n";

  for (const auto& ser : series) {
    if (ser.x.size() != ser.y.size()) throw std::invalid_argument("svg series x/y size mismatch");
    auto usable = [&](size_t i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) return false;
      if (logx && ser.x[i] <= 0) return false;
      if (logy && ser.y[i] <= 0) return false;
      return true;
    };
    if (ser.line) {
      // break polyline where points are unusable
      bool open = false;
      for (size_t i = 0; i < ser.x.size(); ++i) {
        if (!usable(i)) {
          if (open) s << "\"/>\n";
          open = false;
          continue;
        }
        if (!open) {
          s << "<polyline fill=\"none\" stroke=\"" << ser.color << "\" stroke-width=\"1.8\""
            << (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
          open = true;
        }
        s << ax.map(ser.x[i], px0, px1) << ',' << ay.map(ser.y[i], py0, py1) << ' ';
      }
      if (open) s << "\"/>\n";
    }
    if (ser.markers || !ser.line) {
      for (size_t i = 0; i < ser.x.size(); ++i) {
        if (!usable(i)) continue;
        s << "<circle cx=\"" << ax.map(ser.x[i], px0, px1) << "\" cy=\"" << ay.map(ser.y[i], py0, py1)
          << "\" r=\"2.6\" fill=\"" << ser.color << "\"/>\n";
      }
    }
  }

  // legend
  double ly = py1 + 14;
  for (const auto& ser : series) {
    if (ser.label.empty()) continue;
    double lx = px1 - 160;
    s << "<line x1=\"" << lx << "\" y1=\"" << ly - 4 << "\" x2=\"" << lx + 26 << "\" y2=\"" << ly - 4
      << "\" stroke=\"" << ser.color << "\" stroke-width=\"2\""
      << (ser.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n"
      << "<text x=\"" << lx + 32 << "\" y=\"" << ly << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << xml_escape(ser.label) << "</text>\n";
    ly += 16;
  }

  s << "</svg>\n";
  write_file(path, s.str());
}

}  // namespace noisefid
