#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgdlab {
namespace svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct ChartOptions {
  std::string title;
  std::string x_label = "iteration";
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Fixed palette; cycles for additional series.
inline const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return palette[i % 8];
}

inline double tx(double v, bool log_scale) {
  return log_scale ? std::log10(v) : v;
}

}  // namespace detail

/// Deterministic standalone SVG line chart. Points with non-positive
/// coordinates on a log axis are dropped. Output depends only on the inputs.
inline std::string line_chart(const std::vector<Series>& series,
                              const ChartOptions& opt) {
  const double ml = 64, mr = 16, mt = 28, mb = 44;  // margins
  const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;

  std::vector<Series> clean;
  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const auto& s : series) {
    Series c{s.label, {}};
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (opt.log_x && x <= 0.0) continue;
      if (opt.log_y && y <= 0.0) continue;
      const double u = detail::tx(x, opt.log_x), v = detail::tx(y, opt.log_y);
      x_lo = std::min(x_lo, u);
      x_hi = std::max(x_hi, u);
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
      c.points.emplace_back(u, v);
    }
    clean.push_back(std::move(c));
  }
  if (x_lo > x_hi) {
    x_lo = 0;
    x_hi = 1;
  }
  if (y_lo > y_hi) {
    y_lo = 0;
    y_hi = 1;
  }
  if (x_hi == x_lo) x_hi = x_lo + 1;
  if (y_hi == y_lo) y_hi = y_lo + 1;

  auto px = [&](double u) { return ml + (u - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double v) { return mt + ph - (v - y_lo) / (y_hi - y_lo) * ph; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opt.width
     << "\" height=\"" << opt.height << "\" font-family=\"monospace\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << ml << "\" y=\"16\" font-size=\"13\">" << opt.title
     << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
     << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";

  // Four ticks per axis, evenly spaced in transformed coordinates.
  for (int k = 0; k <= 4; ++k) {
    const double u = x_lo + (x_hi - x_lo) * k / 4.0;
    const double v = y_lo + (y_hi - y_lo) * k / 4.0;
    const double raw_x = opt.log_x ? std::pow(10.0, u) : u;
    const double raw_y = opt.log_y ? std::pow(10.0, v) : v;
    os << "<line x1=\"" << detail::fmt(px(u)) << "\" y1=\"" << mt + ph
       << "\" x2=\"" << detail::fmt(px(u)) << "\" y2=\"" << mt + ph + 4
       << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << detail::fmt(px(u)) << "\" y=\"" << mt + ph + 16
       << "\" text-anchor=\"middle\">" << detail::fmt(raw_x) << "</text>\n";
    os << "<line x1=\"" << ml - 4 << "\" y1=\"" << detail::fmt(py(v)) << "\" x2=\""
       << ml << "\" y2=\"" << detail::fmt(py(v)) << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << ml - 7 << "\" y=\"" << detail::fmt(py(v) + 4)
       << "\" text-anchor=\"end\">" << detail::fmt(raw_y) << "</text>\n";
  }
  os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << opt.height - 6
     << "\" text-anchor=\"middle\">" << opt.x_label << "</text>\n";
  os << "<text x=\"14\" y=\"" << mt + ph / 2
     << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << mt + ph / 2
     << ")\">" << opt.y_label << "</text>\n";

  for (std::size_t si = 0; si < clean.size(); ++si) {
    const auto& s = clean[si];
    if (s.points.empty()) continue;
    os << "<polyline fill=\"none\" stroke=\"" << detail::color(si)
       << "\" stroke-width=\"1.5\" points=\"";
    for (auto [u, v] : s.points)
      os << detail::fmt(px(u)) << "," << detail::fmt(py(v)) << " ";
    os << "\"/>\n";
    // Legend entry.
    const double ly = mt + 14 + 14 * static_cast<double>(si);
    os << "<line x1=\"" << ml + pw - 120 << "\" y1=\"" << ly << "\" x2=\""
       << ml + pw - 100 << "\" y2=\"" << ly << "\" stroke=\"" << detail::color(si)
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << ml + pw - 95 << "\" y=\"" << ly + 4 << "\">" << s.label
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace svg
}  // namespace sgdlab
