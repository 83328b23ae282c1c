#pragma once

#include <string>
#include <vector>

namespace coarse {

/// One x position with a median and an interquartile band.
struct BandPoint {
  double x = 0;
  double median = 0;
  double lower = 0;
  double upper = 0;
};

struct BandSeries {
  std::string label;
  std::vector<BandPoint> points;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;
  bool log_y = false;
};

/// Minimal dependency-free SVG line chart: median polyline per series with a
/// shaded interquartile band.
std::string render_band_chart_svg(const ChartSpec& spec,
                                  const std::vector<BandSeries>& series);

}  // namespace coarse
