#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace polyvem::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  bool dashed = false;
};

/// Reference slope drawn as a triangle: y ~ x^slope.
struct ReferenceSlope {
  double slope = -0.5;
  std::string label;
};

struct LogLogPlot {
  std::string title;
  std::string xlabel = "ndof";
  std::string ylabel;
  std::vector<Series> series;
  std::vector<ReferenceSlope> references;
};

namespace detail {

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

}  // namespace detail

/// Hand-written SVG of log10(x) against log10(y) with decade grid lines.
inline void write_svg(std::ostream& out, const LogLogPlot& plot) {
  constexpr double W = 640, H = 480, left = 80, right = 180, top = 40, bottom = 60;
  const double pw = W - left - right;
  const double ph = H - top - bottom;

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, std::log10(s.x[i]));
      xmax = std::max(xmax, std::log10(s.x[i]));
      ymin = std::min(ymin, std::log10(s.y[i]));
      ymax = std::max(ymax, std::log10(s.y[i]));
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 1.0;
  }
  xmin = std::floor(xmin);
  xmax = std::max(std::ceil(xmax), xmin + 1.0);
  ymin = std::floor(ymin);
  ymax = std::max(std::ceil(ymax), ymin + 1.0);
  auto px = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * ph; };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << detail::escape(plot.title) << "</text>\n";

  for (double d = xmin; d <= xmax + 1e-9; d += 1.0) {
    out << "<line x1=\"" << px(d) << "\" y1=\"" << top << "\" x2=\"" << px(d) << "\" y2=\"" << top + ph
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << px(d) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
  }
  for (double d = ymin; d <= ymax + 1e-9; d += 1.0) {
    out << "<line x1=\"" << left << "\" y1=\"" << py(d) << "\" x2=\"" << left + pw << "\" y2=\"" << py(d)
        << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << left - 6 << "\" y=\"" << py(d) + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
  }
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">"
      << detail::escape(plot.xlabel) << "</text>\n";
  out << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << top + ph / 2 << ")\">" << detail::escape(plot.ylabel) << "</text>\n";

  double legend_y = top + 10;
  for (const auto& s : plot.series) {
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      pts << detail::fmt(px(std::log10(s.x[i]))) << ',' << detail::fmt(py(std::log10(s.y[i]))) << ' ';
    }
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6,3\"" : "") << " points=\"" << pts.str() << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0) || !std::isfinite(s.y[i])) continue;
      out << "<circle cx=\"" << detail::fmt(px(std::log10(s.x[i]))) << "\" cy=\""
          << detail::fmt(py(std::log10(s.y[i]))) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    }
    out << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << legend_y << "\" x2=\"" << left + pw + 36 << "\" y2=\""
        << legend_y << "\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"6,3\"" : "") << "/>\n";
    out << "<text x=\"" << left + pw + 42 << "\" y=\"" << legend_y + 4 << "\">" << detail::escape(s.label)
        << "</text>\n";
    legend_y += 18;
  }

  // slope triangles in the lower left of the plot area
  double anchor_x = xmin + 0.15 * (xmax - xmin);
  for (const auto& ref : plot.references) {
    const double run = 0.2 * (xmax - xmin);
    const double ly0 = ymin + 0.25 * (ymax - ymin) - ref.slope * run;
    const double ly1 = ly0 + ref.slope * run;
    const double x0 = px(anchor_x), x1 = px(anchor_x + run), y0 = py(ly0), y1 = py(ly1);
    out << "<polygon points=\"" << detail::fmt(x0) << ',' << detail::fmt(y0) << ' ' << detail::fmt(x1) << ','
        << detail::fmt(y1) << ' ' << detail::fmt(x1) << ',' << detail::fmt(y0)
        << "\" fill=\"none\" stroke=\"#555555\"/>\n";
    out << "<text x=\"" << detail::fmt(x1 + 4) << "\" y=\"" << detail::fmt(0.5 * (y0 + y1) + 4) << "\" fill=\"#555555\">"
        << detail::escape(ref.label) << "</text>\n";
    anchor_x += 0.3 * (xmax - xmin);
  }
  out << "</svg>\n";
}

}  // namespace polyvem::plot
