#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "pplab/harness.hpp"

namespace pplab {

struct AxesSpec {
  bool x_log = true;
  bool y_log = true;
};

namespace detail {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (T, regret)
};

inline std::string svg_color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

}  // namespace detail

/// Standalone SVG line chart of regret against the horizon, one series per
/// seller algorithm, log-log axes by default. All rows must share gamma and v.
inline std::string render_plot(const std::vector<SweepRow>& rows, const AxesSpec& axes) {
  if (rows.empty())
    throw ConfigError("emit_plot: no rows given, so there is no seller series to draw");
  for (const SweepRow& r : rows)
    if (r.gamma != rows[0].gamma || r.v != rows[0].v)
      throw ConfigError("emit_plot: rows must share gamma and v");

  std::map<std::string, detail::Series> by_seller;
  for (const SweepRow& r : rows) {
    auto& s = by_seller[r.seller];
    s.label = r.seller;
    s.points.emplace_back(double(r.T), r.regret);
  }
  for (auto& [name, s] : by_seller) std::sort(s.points.begin(), s.points.end());

  const double width = 640, height = 480;
  const double ml = 70, mr = 20, mt = 40, mb = 55;
  auto tx = [&](double x) { return axes.x_log ? std::log10(std::max(x, 1e-12)) : x; };
  auto ty = [&](double y) { return axes.y_log ? std::log10(std::max(y, 1e-12)) : y; };

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& [name, s] : by_seller)
    for (const auto& [x, y] : s.points) {
      xmin = std::min(xmin, tx(x));
      xmax = std::max(xmax, tx(x));
      ymin = std::min(ymin, ty(y));
      ymax = std::max(ymax, ty(y));
    }
  if (xmax - xmin < 1e-9) {
    xmin -= 0.5;
    xmax += 0.5;
  }
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * (width - ml - mr); };
  auto py = [&](double y) {
    return height - mb - (ty(y) - ymin) / (ymax - ymin) * (height - mt - mb);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
     << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  {
    std::ostringstream title;
    title << "regret vs T  (gamma=" << rows[0].gamma << ", v=" << rows[0].v << ")";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
       << "font-family=\"sans-serif\" font-size=\"15\">" << title.str() << "</text>\n";
  }
  // axes
  os << "<line x1=\"" << ml << "\" y1=\"" << height - mb << "\" x2=\"" << width - mr
     << "\" y2=\"" << height - mb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
     << height - mb << "\" stroke=\"black\"/>\n";

  auto tick_label = [&](double t, bool log_scale) {
    std::ostringstream ls;
    if (log_scale)
      ls << "1e" << int(std::lround(t));
    else
      ls << t;
    return ls.str();
  };
  // decade ticks on log axes, five evenly spaced ticks otherwise
  auto ticks_for = [&](double lo, double hi, bool log_scale) {
    std::vector<double> ts;
    if (log_scale) {
      for (double t = std::ceil(lo - 1e-9); t <= hi + 1e-9; t += 1.0) ts.push_back(t);
      if (ts.empty()) ts = {lo, hi};
    } else {
      for (int i = 0; i <= 4; ++i) ts.push_back(lo + (hi - lo) * i / 4.0);
    }
    return ts;
  };
  for (double t : ticks_for(xmin, xmax, axes.x_log)) {
    const double x = ml + (t - xmin) / (xmax - xmin) * (width - ml - mr);
    os << "<line x1=\"" << x << "\" y1=\"" << height - mb << "\" x2=\"" << x << "\" y2=\""
       << height - mb + 5 << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << x << "\" y=\"" << height - mb + 20
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
       << tick_label(t, axes.x_log) << "</text>\n";
  }
  for (double t : ticks_for(ymin, ymax, axes.y_log)) {
    const double y = height - mb - (t - ymin) / (ymax - ymin) * (height - mt - mb);
    os << "<line x1=\"" << ml - 5 << "\" y1=\"" << y << "\" x2=\"" << ml << "\" y2=\"" << y
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << ml - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
       << tick_label(t, axes.y_log) << "</text>\n";
  }
  os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">rounds T"
     << (axes.x_log ? " (log)" : "") << "</text>\n";
  os << "<text x=\"16\" y=\"" << (mt + height - mb) / 2
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
     << "transform=\"rotate(-90 16 " << (mt + height - mb) / 2 << ")\">regret"
     << (axes.y_log ? " (log)" : "") << "</text>\n";

  std::size_t si = 0;
  for (const auto& [name, s] : by_seller) {
    const std::string color = detail::svg_color(si);
    if (s.points.size() > 1) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& [x, y] : s.points) os << px(x) << ',' << py(y) << ' ';
      os << "\"/>\n";
    }
    for (const auto& [x, y] : s.points)
      os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
         << "\"/>\n";
    os << "<rect x=\"" << width - mr - 150 << "\" y=\"" << mt + 8 + 18 * double(si)
       << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
    os << "<text x=\"" << width - mr - 135 << "\" y=\"" << mt + 17 + 18 * double(si)
       << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
    ++si;
  }
  os << "</svg>\n";
  return os.str();
}

inline void emit_plot(const std::vector<SweepRow>& rows, const std::string& path,
                      const AxesSpec& axes = {}) {
  const std::string svg = render_plot(rows, axes);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("emit_plot: cannot open " + path);
  out << svg;
  if (!out) throw IoError("emit_plot: write failed for " + path);
}

}  // namespace pplab
