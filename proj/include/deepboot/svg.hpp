#pragma once

// Minimal static SVG charts: stacked line-chart panels and a scatter with a
// y = x diagonal. Output is a pure function of the inputs (fixed number
// formatting, no timestamps).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace deepboot::svg {

struct Series {
  std::string label;
  std::string color = "#1f77b4";
  std::vector<std::pair<double, double>> points;
  // Points with x beyond this value are drawn faded and dashed.
  std::optional<double> fade_after_x;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  std::optional<double> reference_y;  // horizontal guide line
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

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

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finalize() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

struct Frame {
  double x0, y0, w, h;
  Range xr, yr;
  double px(double x) const { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * w; }
  double py(double y) const { return y0 + h - (y - yr.lo) / (yr.hi - yr.lo) * h; }
};

inline std::string axes(const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
  std::string s;
  s += "<rect x=\"" + num(f.x0) + "\" y=\"" + num(f.y0) + "\" width=\"" + num(f.w) + "\" height=\"" + num(f.h) +
       "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
  s += "<text x=\"" + num(f.x0 + f.w / 2) + "\" y=\"" + num(f.y0 - 8) +
       "\" text-anchor=\"middle\" font-size=\"13\">" + escape(title) + "</text>\n";
  s += "<text x=\"" + num(f.x0 + f.w / 2) + "\" y=\"" + num(f.y0 + f.h + 32) +
       "\" text-anchor=\"middle\" font-size=\"11\">" + escape(xl) + "</text>\n";
  s += "<text x=\"" + num(f.x0 - 48) + "\" y=\"" + num(f.y0 + f.h / 2) + "\" text-anchor=\"middle\" font-size=\"11\" transform=\"rotate(-90 " +
       num(f.x0 - 48) + " " + num(f.y0 + f.h / 2) + ")\">" + escape(yl) + "</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * i / 4.0;
    const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * i / 4.0;
    s += "<text x=\"" + num(f.px(xv)) + "\" y=\"" + num(f.y0 + f.h + 14) + "\" text-anchor=\"middle\" font-size=\"9\">" +
         tick(xv) + "</text>\n";
    s += "<text x=\"" + num(f.x0 - 4) + "\" y=\"" + num(f.py(yv) + 3) + "\" text-anchor=\"end\" font-size=\"9\">" +
         tick(yv) + "</text>\n";
  }
  return s;
}

inline std::string polyline(const Frame& f, const std::vector<std::pair<double, double>>& pts, const std::string& color,
                            bool faded) {
  if (pts.empty()) return {};
  std::string s = "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.6\"";
  if (faded) s += " stroke-opacity=\"0.3\" stroke-dasharray=\"4 3\"";
  s += " points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += num(f.px(pts[i].first)) + "," + num(f.py(pts[i].second));
  }
  return s + "\"/>\n";
}

}  // namespace detail

// Panels stacked vertically, each with its own axes and legend.
inline std::string line_chart(const std::vector<Panel>& panels, double width = 720, double panel_height = 260) {
  const double margin_l = 70, margin_r = 150, margin_t = 30, gap = 60;
  const double height = margin_t + panels.size() * (panel_height + gap);
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(width) + "\" height=\"" +
                  detail::num(height) + "\" viewBox=\"0 0 " + detail::num(width) + " " + detail::num(height) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& panel = panels[p];
    detail::Frame f{margin_l, margin_t + p * (panel_height + gap), width - margin_l - margin_r, panel_height, {}, {}};
    for (const auto& ser : panel.series)
      for (const auto& [x, y] : ser.points) {
        f.xr.add(x);
        f.yr.add(y);
      }
    if (panel.reference_y) f.yr.add(*panel.reference_y);
    f.xr.finalize();
    f.yr.finalize();
    s += "<g class=\"panel\">\n" + detail::axes(f, panel.title, panel.x_label, panel.y_label);
    if (panel.reference_y)
      s += "<line x1=\"" + detail::num(f.x0) + "\" x2=\"" + detail::num(f.x0 + f.w) + "\" y1=\"" +
           detail::num(f.py(*panel.reference_y)) + "\" y2=\"" + detail::num(f.py(*panel.reference_y)) +
           "\" stroke=\"#999\" stroke-dasharray=\"2 2\"/>\n";
    for (std::size_t k = 0; k < panel.series.size(); ++k) {
      const Series& ser = panel.series[k];
      std::vector<std::pair<double, double>> solid, faded;
      for (const auto& pt : ser.points) {
        if (ser.fade_after_x && pt.first > *ser.fade_after_x) {
          if (faded.empty() && !solid.empty()) faded.push_back(solid.back());
          faded.push_back(pt);
        } else {
          solid.push_back(pt);
        }
      }
      s += detail::polyline(f, solid, ser.color, false);
      s += detail::polyline(f, faded, ser.color, true);
      const double ly = f.y0 + 14 + 16 * k;
      s += "<line x1=\"" + detail::num(f.x0 + f.w + 10) + "\" x2=\"" + detail::num(f.x0 + f.w + 30) + "\" y1=\"" +
           detail::num(ly) + "\" y2=\"" + detail::num(ly) + "\" stroke=\"" + ser.color + "\" stroke-width=\"2\"/>\n";
      s += "<text x=\"" + detail::num(f.x0 + f.w + 34) + "\" y=\"" + detail::num(ly + 4) + "\" font-size=\"11\">" +
           detail::escape(ser.label) + "</text>\n";
    }
    s += "</g>\n";
  }
  return s + "</svg>\n";
}

struct ScatterPoint {
  double x = 0.0;
  double y = 0.0;
  std::string label;
};

// Square scatter with shared axis range and the y = x diagonal.
inline std::string scatter(const std::vector<ScatterPoint>& points, const std::string& title, const std::string& x_label,
                           const std::string& y_label, double size = 480) {
  detail::Range r;
  for (const auto& p : points) {
    r.add(p.x);
    r.add(p.y);
  }
  r.finalize();
  const double pad = 0.05 * (r.hi - r.lo);
  r.lo -= pad;
  r.hi += pad;
  const double margin = 70;
  detail::Frame f{margin, 40, size - 2 * margin + 30, size - 2 * margin + 30, r, r};
  const double total = size + 20;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::num(total) + "\" height=\"" +
                  detail::num(total) + "\" viewBox=\"0 0 " + detail::num(total) + " " + detail::num(total) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += detail::axes(f, title, x_label, y_label);
  s += "<line class=\"diagonal\" x1=\"" + detail::num(f.px(r.lo)) + "\" y1=\"" + detail::num(f.py(r.lo)) + "\" x2=\"" +
       detail::num(f.px(r.hi)) + "\" y2=\"" + detail::num(f.py(r.hi)) + "\" stroke=\"#888\" stroke-dasharray=\"5 4\"/>\n";
  for (const auto& p : points)
    s += "<circle cx=\"" + detail::num(f.px(p.x)) + "\" cy=\"" + detail::num(f.py(p.y)) +
         "\" r=\"3.5\" fill=\"#d62728\" fill-opacity=\"0.8\"><title>" + detail::escape(p.label) + "</title></circle>\n";
  return s + "</svg>\n";
}

}  // namespace deepboot::svg
