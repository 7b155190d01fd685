#pragma once
// Minimal self-contained SVG line/scatter plots for quick-look artifacts.
// No external rendering dependencies; linear or log10 axes with simple ticks.

#include <string>
#include <vector>

namespace noisefid {

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
  std::string color = "#1f6fb4";
  bool markers = false;  // draw point markers
  bool line = true;      // connect with a polyline
  bool dashed = false;
};

struct SvgPlot {
  std::string title, xlabel, ylabel;
  bool logx = false, logy = false;
  std::vector<SvgSeries> series;

  void write(const std::string& path) const;
};

}  // namespace noisefid
