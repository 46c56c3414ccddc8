#pragma once
// Minimal SVG chart emitters for the experiment reports: line plots, grouped
// bars, and histogram small-multiples. Output is plain text with fixed
// decimal formatting, so identical inputs give identical bytes.

#include "aan/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace aan::svg {

inline const char* palette(std::size_t i) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                  "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
                                  "#bcbd22", "#e377c2"};
  return kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
}

inline std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

// Round limits outward to a tidy tick step; returns {lo, hi, step}.
inline std::array<double, 3> nice_range(double lo, double hi) {
  if (!(hi > lo)) hi = lo + 1.0;
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (raw <= m * mag) { step = m * mag; break; }
  }
  return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

struct Series {
  std::string label;
  std::vector<double> x, y;
};

class Canvas {
 public:
  Canvas(int w, int h) : w_(w), h_(h) {
    body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(w) +
             "\" height=\"" + std::to_string(h) + "\" viewBox=\"0 0 " + std::to_string(w) +
             " " + std::to_string(h) + "\">\n";
    body_ += "<rect width=\"" + std::to_string(w) + "\" height=\"" + std::to_string(h) +
             "\" fill=\"#ffffff\"/>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& color,
            double width = 1.0) {
    body_ += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) +
             "\" y2=\"" + fmt(y2) + "\" stroke=\"" + color + "\" stroke-width=\"" +
             fmt(width, 1) + "\"/>\n";
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color) {
    if (pts.empty()) return;
    body_ += "<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.8\" points=\"";
    for (const auto& [x, y] : pts) body_ += fmt(x) + "," + fmt(y) + " ";
    body_ += "\"/>\n";
  }

  void circle(double x, double y, double r, const std::string& color) {
    body_ += "<circle cx=\"" + fmt(x) + "\" cy=\"" + fmt(y) + "\" r=\"" + fmt(r, 1) +
             "\" fill=\"" + color + "\"/>\n";
  }

  void rect(double x, double y, double w, double h, const std::string& fill) {
    body_ += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) +
             "\" height=\"" + fmt(h) + "\" fill=\"" + fill + "\"/>\n";
  }

  // anchor: start | middle | end
  void text(double x, double y, const std::string& s, int size = 11,
            const std::string& anchor = "start", const std::string& color = "#222222",
            double rotate = 0.0) {
    body_ += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-size=\"" +
             std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
             "\" fill=\"" + color + "\"";
    if (rotate != 0.0)
      body_ += " transform=\"rotate(" + fmt(rotate, 1) + " " + fmt(x) + " " + fmt(y) + ")\"";
    body_ += ">" + escape(s) + "</text>\n";
  }

  void raw(const std::string& fragment) { body_ += fragment; }

  void save(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << body_ << "</svg>\n";
  }

  int width() const { return w_; }
  int height() const { return h_; }

 private:
  int w_, h_;
  std::string body_;
};

struct Frame {
  double x0, y0, x1, y1;   // pixel corners of the plot area (y0 = top)
  double lo_x, hi_x, lo_y, hi_y;
  double px(double x) const { return x0 + (x - lo_x) / (hi_x - lo_x) * (x1 - x0); }
  double py(double y) const { return y0 + (hi_y - y) / (hi_y - lo_y) * (y0_flip() - y0); }
  double y0_flip() const { return y1; }
};

inline Frame draw_frame(Canvas& cv, const std::string& title, const std::string& xlabel,
                        const std::string& ylabel, double lo_x, double hi_x, double lo_y,
                        double hi_y) {
  Frame f;
  f.x0 = 62; f.y0 = 34; f.x1 = cv.width() - 16.0; f.y1 = cv.height() - 44.0;
  auto [nlx, nhx, sx] = nice_range(lo_x, hi_x);
  auto [nly, nhy, sy] = nice_range(lo_y, hi_y);
  f.lo_x = nlx; f.hi_x = nhx; f.lo_y = nly; f.hi_y = nhy;
  cv.text(cv.width() / 2.0, 18, title, 13, "middle");
  cv.line(f.x0, f.y1, f.x1, f.y1, "#444444");
  cv.line(f.x0, f.y0, f.x0, f.y1, "#444444");
  for (double t = f.lo_x; t <= f.hi_x + sx * 0.5; t += sx) {
    const double px = f.px(t);
    cv.line(px, f.y1, px, f.y1 + 4, "#444444");
    cv.text(px, f.y1 + 16, fmt(t, sx < 1.0 ? 2 : 0), 10, "middle");
  }
  for (double t = f.lo_y; t <= f.hi_y + sy * 0.5; t += sy) {
    const double py = f.py(t);
    cv.line(f.x0 - 4, py, f.x0, py, "#444444");
    cv.line(f.x0, py, f.x1, py, "#eeeeee");
    cv.text(f.x0 - 7, py + 3.5, fmt(t, sy < 1.0 ? 2 : 0), 10, "end");
  }
  cv.text((f.x0 + f.x1) / 2.0, cv.height() - 10.0, xlabel, 11, "middle");
  cv.text(16, (f.y0 + f.y1) / 2.0, ylabel, 11, "middle", "#222222", -90.0);
  return f;
}

inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel,
                             const std::vector<Series>& series, int w = 680, int h = 420) {
  double lo_x = 0, hi_x = 1, lo_y = 0, hi_y = 1;
  bool any = false;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!any) { lo_x = hi_x = s.x[i]; lo_y = hi_y = s.y[i]; any = true; }
      lo_x = std::min(lo_x, s.x[i]); hi_x = std::max(hi_x, s.x[i]);
      lo_y = std::min(lo_y, s.y[i]); hi_y = std::max(hi_y, s.y[i]);
    }
  Canvas cv(w, h);
  Frame f = draw_frame(cv, title, xlabel, ylabel, lo_x, hi_x, lo_y, hi_y);
  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      pts.emplace_back(f.px(s.x[i]), f.py(s.y[i]));
    cv.polyline(pts, palette(si));
    for (const auto& [x, y] : pts) cv.circle(x, y, 2.4, palette(si));
    cv.rect(f.x0 + 10, f.y0 + 8 + 16.0 * si, 14, 4, palette(si));
    cv.text(f.x0 + 30, f.y0 + 14 + 16.0 * si, s.label, 10);
  }
  cv.save(path);
}

struct BarGroup {
  std::string label;                // series label (legend)
  std::vector<double> values;       // one per category
};

inline void write_bar_chart(const std::string& path, const std::string& title,
                            const std::vector<std::string>& categories,
                            const std::vector<BarGroup>& groups, const std::string& ylabel,
                            int w = 680, int h = 420) {
  double hi_y = 1.0;
  for (const auto& g : groups)
    for (double v : g.values) hi_y = std::max(hi_y, v);
  Canvas cv(w, h);
  Frame f = draw_frame(cv, title, "", ylabel, 0, 1, 0, hi_y);
  const std::size_t nc = categories.size(), ng = std::max<std::size_t>(groups.size(), 1);
  const double slot = (f.x1 - f.x0) / std::max<std::size_t>(nc, 1);
  const double bw = slot * 0.8 / ng;
  for (std::size_t ci = 0; ci < nc; ++ci) {
    const double cx = f.x0 + slot * (ci + 0.5);
    cv.text(cx, f.y1 + 16, categories[ci], 10, "middle");
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      if (ci >= groups[gi].values.size()) continue;
      const double v = groups[gi].values[ci];
      const double x = cx - slot * 0.4 + bw * gi;
      const double y = f.py(v);
      cv.rect(x, y, bw * 0.92, f.y1 - y, palette(gi));
    }
  }
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    cv.rect(f.x0 + 10, f.y0 + 8 + 16.0 * gi, 14, 8, palette(gi));
    cv.text(f.x0 + 30, f.y0 + 16 + 16.0 * gi, groups[gi].label, 10);
  }
  cv.save(path);
}

struct HistPanel {
  std::string title;
  std::vector<std::pair<std::string, const Histogram*>> traces;  // label, hist
};

// Small multiples, `cols` panels per row, each drawing its traces as
// semi-transparent bars over a shared [lo,hi] x-axis.
inline void write_histogram_grid(const std::string& path, const std::string& title,
                                 const std::vector<HistPanel>& panels, int cols = 3,
                                 int panel_w = 240, int panel_h = 170) {
  const int rows = static_cast<int>((panels.size() + cols - 1) / cols);
  Canvas cv(cols * panel_w + 20, rows * panel_h + 40);
  cv.text(cv.width() / 2.0, 18, title, 13, "middle");
  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const auto& pan = panels[pi];
    const int r = static_cast<int>(pi) / cols, c = static_cast<int>(pi) % cols;
    const double ox = 10 + c * panel_w, oy = 30 + r * panel_h;
    const double x0 = ox + 26, x1 = ox + panel_w - 10;
    const double y0 = oy + 18, y1 = oy + panel_h - 24;
    cv.text(ox + panel_w / 2.0, oy + 12, pan.title, 10, "middle");
    cv.line(x0, y1, x1, y1, "#444444");
    cv.line(x0, y0, x0, y1, "#444444");
    std::uint64_t peak = 1;
    for (const auto& [label, hs] : pan.traces)
      for (std::size_t b = 0; b < hs->bins.size(); ++b)
        peak = std::max(peak, hs->bins[b]);
    for (std::size_t ti = 0; ti < pan.traces.size(); ++ti) {
      const auto* hs = pan.traces[ti].second;
      const double bw = (x1 - x0) / hs->bins.size();
      for (std::size_t b = 0; b < hs->bins.size(); ++b) {
        if (hs->bins[b] == 0) continue;
        const double bh = (y1 - y0) * (double(hs->bins[b]) / double(peak));
        cv.raw("<rect x=\"" + fmt(x0 + bw * b) + "\" y=\"" + fmt(y1 - bh) +
               "\" width=\"" + fmt(bw) + "\" height=\"" + fmt(bh) + "\" fill=\"" +
               palette(ti) + "\" fill-opacity=\"0.55\"/>\n");
      }
      cv.rect(x0 + 4, y0 + 2 + 12.0 * ti, 10, 6, palette(ti));
      cv.text(x0 + 18, y0 + 8 + 12.0 * ti, pan.traces[ti].first, 9);
    }
    cv.text(x0, y1 + 12, fmt(pan.traces.empty() ? 0.0 : pan.traces[0].second->lo, 1), 9, "middle");
    cv.text(x1, y1 + 12, fmt(pan.traces.empty() ? 1.0 : pan.traces[0].second->hi, 1), 9, "middle");
  }
  cv.save(path);
}

}  // namespace aan::svg
