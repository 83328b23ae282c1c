#include "coarse/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace coarse {

namespace {

constexpr int kWidth = 640;
constexpr int kHeight = 420;
constexpr int kMarginLeft = 70;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 55;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
                          "#bcbd22"};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace

std::string render_band_chart_svg(const ChartSpec& spec,
                                  const std::vector<BandSeries>& series) {
  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const BandSeries& s : series) {
    for (const BandPoint& p : s.points) {
      x_min = std::min(x_min, p.x);
      x_max = std::max(x_max, p.x);
      y_min = std::min({y_min, p.lower, p.median});
      y_max = std::max({y_max, p.upper, p.median});
    }
  }
  if (!(x_min <= x_max) || !(y_min <= y_max))
    throw std::invalid_argument("render_band_chart_svg: no data points");
  if (y_max == y_min) {
    y_max += 1.0;
    y_min -= 1.0;
  } else {
    double pad = 0.05 * (y_max - y_min);
    y_max += pad;
    y_min -= pad;
  }

  auto x_value = [&](double x) { return spec.log_x ? std::log10(std::max(x, 1e-12)) : x; };
  auto y_value = [&](double y) { return spec.log_y ? std::log10(std::max(y, 1e-12)) : y; };
  double xv_min = x_value(x_min), xv_max = x_value(x_max);
  double yv_min = y_value(y_min), yv_max = y_value(y_max);
  if (xv_max == xv_min) {
    xv_max += 1.0;
    xv_min -= 1.0;
  }
  if (yv_max == yv_min) {
    yv_max += 1.0;
    yv_min -= 1.0;
  }

  auto px = [&](double x) {
    return kMarginLeft + (x_value(x) - xv_min) / (xv_max - xv_min) *
                             (kWidth - kMarginLeft - kMarginRight);
  };
  auto py = [&](double y) {
    return kHeight - kMarginBottom - (y_value(y) - yv_min) / (yv_max - yv_min) *
                                         (kHeight - kMarginTop - kMarginBottom);
  };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"15\">" << spec.title << "</text>\n";

  // Axes.
  svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kHeight - kMarginBottom
      << "\" x2=\"" << kWidth - kMarginRight << "\" y2=\"" << kHeight - kMarginBottom
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << kMarginLeft << "\" y1=\"" << kMarginTop << "\" x2=\""
      << kMarginLeft << "\" y2=\"" << kHeight - kMarginBottom << "\" stroke=\"black\"/>\n";

  // Ticks: decades for log axes, five even steps otherwise.
  auto draw_x_tick = [&](double x, const std::string& label) {
    double p = px(x);
    svg << "<line x1=\"" << p << "\" y1=\"" << kHeight - kMarginBottom << "\" x2=\"" << p
        << "\" y2=\"" << kHeight - kMarginBottom + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << p << "\" y=\"" << kHeight - kMarginBottom + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << label << "</text>\n";
  };
  auto draw_y_tick = [&](double y, const std::string& label) {
    double p = py(y);
    svg << "<line x1=\"" << kMarginLeft - 5 << "\" y1=\"" << p << "\" x2=\"" << kMarginLeft
        << "\" y2=\"" << p << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << p + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label
        << "</text>\n";
  };
  if (spec.log_x) {
    for (int decade = static_cast<int>(std::floor(std::log10(std::max(x_min, 1e-12))));
         decade <= static_cast<int>(std::ceil(std::log10(std::max(x_max, 1e-12))));
         ++decade) {
      double x = std::pow(10.0, decade);
      if (x < x_min * 0.999 || x > x_max * 1.001) continue;
      draw_x_tick(x, "1e" + std::to_string(decade));
    }
  } else {
    for (int i = 0; i <= 5; ++i) draw_x_tick(x_min + (x_max - x_min) * i / 5.0,
                                             fmt(x_min + (x_max - x_min) * i / 5.0));
  }
  for (int i = 0; i <= 5; ++i) {
    double y = y_min + (y_max - y_min) * i / 5.0;
    draw_y_tick(y, fmt(y));
  }

  svg << "<text x=\"" << (kMarginLeft + kWidth - kMarginRight) / 2 << "\" y=\""
      << kHeight - 12 << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">" << spec.x_label << "</text>\n";
  svg << "<text x=\"16\" y=\"" << (kMarginTop + kHeight - kMarginBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << (kMarginTop + kHeight - kMarginBottom) / 2
      << ")\">" << spec.y_label << "</text>\n";

  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    std::vector<BandPoint> pts = series[s].points;
    std::sort(pts.begin(), pts.end(),
              [](const BandPoint& a, const BandPoint& b) { return a.x < b.x; });
    if (pts.empty()) continue;
    // IQR band.
    std::ostringstream polygon;
    for (const BandPoint& p : pts) polygon << px(p.x) << "," << py(p.upper) << " ";
    for (auto it = pts.rbegin(); it != pts.rend(); ++it)
      polygon << px(it->x) << "," << py(it->lower) << " ";
    svg << "<polygon points=\"" << polygon.str() << "\" fill=\"" << color
        << "\" opacity=\"0.15\" stroke=\"none\"/>\n";
    // Median line and markers.
    std::ostringstream polyline;
    for (const BandPoint& p : pts) polyline << px(p.x) << "," << py(p.median) << " ";
    svg << "<polyline points=\"" << polyline.str() << "\" fill=\"none\" stroke=\""
        << color << "\" stroke-width=\"2\"/>\n";
    for (const BandPoint& p : pts)
      svg << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.median)
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    // Legend entry.
    double ly = kMarginTop + 16.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kWidth - kMarginRight - 120 << "\" y1=\"" << ly << "\" x2=\""
        << kWidth - kMarginRight - 100 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << kWidth - kMarginRight - 95 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << series[s].label
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace coarse
