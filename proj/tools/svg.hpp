#pragma once

// Minimal static line plots: stacked panels sharing the time axis.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace svg {

struct Series {
  std::string label;
  const std::vector<double>* y = nullptr;
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct Panel {
  using Spans = std::vector<std::pair<std::pair<double, double>, std::string>>;
  Panel(std::string label, std::vector<Series> s, Spans sp = {})
      : ylabel(std::move(label)), series(std::move(s)), spans(std::move(sp)) {}

  std::string ylabel;
  std::vector<Series> series;
  // Shaded spans [t0, t1) with a fill colour, drawn under the lines.
  std::vector<std::pair<std::pair<double, double>, std::string>> spans;
};

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Keeps min and max of every bucket so spikes survive decimation.
inline std::vector<std::pair<double, double>> decimate(const std::vector<double>& t,
                                                       const std::vector<double>& y,
                                                       std::size_t buckets) {
  std::vector<std::pair<double, double>> out;
  const std::size_t n = std::min(t.size(), y.size());
  if (n <= 2 * buckets) {
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(t[i], y[i]);
    return out;
  }
  const std::size_t per = (n + buckets - 1) / buckets;
  for (std::size_t b = 0; b < n; b += per) {
    const std::size_t e = std::min(n, b + per);
    std::size_t lo = b;
    std::size_t hi = b;
    for (std::size_t i = b; i < e; ++i) {
      if (y[i] < y[lo]) lo = i;
      if (y[i] > y[hi]) hi = i;
    }
    if (lo > hi) std::swap(lo, hi);
    out.emplace_back(t[lo], y[lo]);
    if (hi != lo) out.emplace_back(t[hi], y[hi]);
  }
  return out;
}

inline std::string render(const std::string& title, const std::vector<double>& t,
                          const std::vector<Panel>& panels) {
  const double width = 960;
  const double panel_h = 200;
  const double left = 80;
  const double right = 150;
  const double top = 40;
  const double gap = 30;
  const double height = top + panels.size() * (panel_h + gap) + 30;
  const double plot_w = width - left - right;
  const double t0 = t.empty() ? 0.0 : t.front();
  const double t1 = t.empty() ? 1.0 : std::max(t.back(), t0 + 1e-9);

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
       "\" height=\"" + num(height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(left) + "\" y=\"22\" font-size=\"15\">" + title + "</text>\n";

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& pan = panels[p];
    const double y0 = top + p * (panel_h + gap);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& se : pan.series) {
      for (double v : *se.y) {
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    if (!(lo < hi)) {
      lo = (std::isfinite(lo) ? lo : 0.0) - 1.0;
      hi = lo + 2.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto px = [&](double tv) { return left + (tv - t0) / (t1 - t0) * plot_w; };
    auto py = [&](double v) { return y0 + panel_h - (v - lo) / (hi - lo) * panel_h; };

    for (const auto& [span, fill] : pan.spans) {
      const double a = std::clamp(span.first, t0, t1);
      const double b = std::clamp(span.second, t0, t1);
      s += "<rect x=\"" + num(px(a)) + "\" y=\"" + num(y0) + "\" width=\"" +
           num(px(b) - px(a)) + "\" height=\"" + num(panel_h) + "\" fill=\"" + fill + "\"/>\n";
    }
    s += "<rect x=\"" + num(left) + "\" y=\"" + num(y0) + "\" width=\"" + num(plot_w) +
         "\" height=\"" + num(panel_h) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      const double v = lo + (hi - lo) * k / 4.0;
      s += "<text x=\"" + num(left - 6) + "\" y=\"" + num(py(v) + 4) +
           "\" text-anchor=\"end\">" + tick(v) + "</text>\n";
    }
    s += "<text transform=\"translate(16," + num(y0 + panel_h / 2) +
         ") rotate(-90)\" text-anchor=\"middle\">" + pan.ylabel + "</text>\n";

    for (std::size_t i = 0; i < pan.series.size(); ++i) {
      const auto& se = pan.series[i];
      s += "<polyline fill=\"none\" stroke=\"" + se.color + "\" stroke-width=\"1\"";
      if (se.dashed) s += " stroke-dasharray=\"5,3\"";
      s += " points=\"";
      for (const auto& [tv, v] : decimate(t, *se.y, 1500)) {
        s += num(px(tv)) + "," + num(py(v)) + " ";
      }
      s += "\"/>\n";
      const double ly = y0 + 14 + 16 * i;
      s += "<line x1=\"" + num(left + plot_w + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" +
           num(left + plot_w + 30) + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + se.color +
           "\"" + (se.dashed ? " stroke-dasharray=\"5,3\"" : "") + "/>\n";
      s += "<text x=\"" + num(left + plot_w + 34) + "\" y=\"" + num(ly) + "\">" + se.label +
           "</text>\n";
    }
  }
  const double axis_y = top + panels.size() * (panel_h + gap) - gap + 16;
  for (int k = 0; k <= 6; ++k) {
    const double tv = t0 + (t1 - t0) * k / 6.0;
    s += "<text x=\"" + num(left + (tv - t0) / (t1 - t0) * plot_w) + "\" y=\"" +
         num(axis_y) + "\" text-anchor=\"middle\">" + tick(tv) + "</text>\n";
  }
  s += "<text x=\"" + num(left + plot_w / 2) + "\" y=\"" + num(axis_y + 16) +
       "\" text-anchor=\"middle\">time [s]</text>\n";
  s += "</svg>\n";
  return s;
}

}  // namespace svg
