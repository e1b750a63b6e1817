// Small dependency-free SVG charts: line/marker plots on linear or log axes
// and grouped bar charts.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

namespace cext::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

enum class Style { Lines, Markers, Bars };

struct Plot {
  std::string file;  // file name inside the output directory
  std::string title, xlabel, ylabel;
  Style style = Style::Lines;
  bool logx = false, logy = false;
  std::vector<std::string> categories;  // bar groups; series x values index into them
  std::vector<Series> series;
  std::vector<std::string> annotations;
};

namespace detail {

inline std::string esc(const std::string& s) {
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

inline std::string num(double v, const char* fmt = "%.2f") {
  char buf[48];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

inline const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"};
  return palette[i % 8];
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo)) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      const double a = std::log10(lo), b = std::log10(hi);
      if (b - a >= 1.0) {
        for (double e = std::ceil(a - 1e-12); e <= b + 1e-12; e += 1.0) out.push_back(std::pow(10.0, e));
      }
      if (out.size() < 2) {
        out.clear();
        for (int i = 0; i <= 4; ++i) out.push_back(std::pow(10.0, a + (b - a) * i / 4.0));
      }
      return out;
    }
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
      if (raw <= m * mag) {
        step = m * mag;
        break;
      }
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
    return out;
  }
};

/// Padded range of the values; degenerate ranges are widened.
inline Axis make_axis(const std::vector<double>& v, bool log, bool include_zero = false) {
  Axis a;
  a.log = log;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  if (include_zero && !log) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
  }
  if (!(lo <= hi)) {
    lo = log ? 1.0 : 0.0;
    hi = log ? 10.0 : 1.0;
  }
  if (log) {
    if (hi / lo < 1.0 + 1e-9) {
      lo /= 2.0;
      hi *= 2.0;
    } else {
      const double pad = std::pow(hi / lo, 0.05);
      lo /= pad;
      hi *= pad;
    }
  } else {
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(hi))) {
      const double w = std::abs(hi) > 0 ? 0.1 * std::abs(hi) : 1.0;
      lo -= w;
      hi += w;
    } else {
      const double pad = 0.05 * (hi - lo);
      if (!(include_zero && lo == 0.0)) lo -= pad;
      hi += pad;
    }
  }
  a.lo = lo;
  a.hi = hi;
  return a;
}

}  // namespace detail

inline std::string render(const Plot& p) {
  using detail::esc;
  using detail::num;
  const double W = 720, H = 440, L = 84, R = 190, T = 44, B = 64;
  const double x0 = L, x1 = W - R, y0 = H - B, y1 = T;
  std::vector<std::string> notes = p.annotations;
  std::vector<Series> kept;
  for (const Series& s : p.series) {
    Series c{s.label, {}, {}};
    std::size_t dropped = 0;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      const bool ok = std::isfinite(s.x[i]) && std::isfinite(s.y[i]) && !(p.logx && s.x[i] <= 0) && !(p.logy && s.y[i] <= 0);
      if (ok) {
        c.x.push_back(s.x[i]);
        c.y.push_back(s.y[i]);
      } else {
        ++dropped;
      }
    }
    if (dropped) notes.push_back(std::to_string(dropped) + " point(s) of '" + s.label + "' not drawable on these axes");
    if (c.x.empty()) {
      notes.push_back("skipped empty series '" + s.label + "'");
      continue;
    }
    kept.push_back(std::move(c));
  }

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W, "%.0f") + "\" height=\"" + num(H, "%.0f") +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" + esc(p.title) + "</text>\n";

  std::vector<double> xs, ys;
  for (const Series& s : kept) {
    xs.insert(xs.end(), s.x.begin(), s.x.end());
    ys.insert(ys.end(), s.y.begin(), s.y.end());
  }
  const bool bars = p.style == Style::Bars;
  detail::Axis ax = bars ? detail::Axis{-0.5, std::max<double>(0.5, static_cast<double>(p.categories.size()) - 0.5), false}
                         : detail::make_axis(xs, p.logx);
  const detail::Axis ay = detail::make_axis(ys, p.logy, bars);

  out += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" + num(y0 - y1) +
         "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ay.ticks()) {
    const double y = ay.map(t, y0, y1);
    out += "<line x1=\"" + num(x0 - 4) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y) +
           "\" stroke=\"#dddddd\"/>\n";
    out += "<text x=\"" + num(x0 - 7) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + num(t, "%.3g") + "</text>\n";
  }
  if (bars) {
    for (std::size_t i = 0; i < p.categories.size(); ++i) {
      const double x = ax.map(static_cast<double>(i), x0, x1);
      out += "<text x=\"" + num(x) + "\" y=\"" + num(y0 + 17) + "\" text-anchor=\"middle\">" + esc(p.categories[i]) + "</text>\n";
    }
  } else {
    for (double t : ax.ticks()) {
      const double x = ax.map(t, x0, x1);
      out += "<line x1=\"" + num(x) + "\" y1=\"" + num(y0 + 4) + "\" x2=\"" + num(x) + "\" y2=\"" + num(y1) +
             "\" stroke=\"#dddddd\"/>\n";
      out += "<text x=\"" + num(x) + "\" y=\"" + num(y0 + 17) + "\" text-anchor=\"middle\">" + num(t, "%.3g") + "</text>\n";
    }
  }
  out += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(H - 22) + "\" text-anchor=\"middle\">" + esc(p.xlabel) + "</text>\n";
  out += "<text transform=\"translate(18," + num((y0 + y1) / 2) + ") rotate(-90)\" text-anchor=\"middle\">" + esc(p.ylabel) +
         "</text>\n";

  const std::size_t ns = kept.size();
  for (std::size_t si = 0; si < ns; ++si) {
    const Series& s = kept[si];
    const char* col = detail::color(si);
    if (bars) {
      const double group = (ax.map(1.0, x0, x1) - ax.map(0.0, x0, x1)) * 0.8;
      const double bw = group / static_cast<double>(ns);
      const double base = ay.map(std::max(ay.lo, 0.0), y0, y1);
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double xc = ax.map(s.x[i], x0, x1) - group / 2 + bw * static_cast<double>(si);
        const double y = ay.map(s.y[i], y0, y1);
        out += "<rect x=\"" + num(xc) + "\" y=\"" + num(std::min(y, base)) + "\" width=\"" + num(bw * 0.92) + "\" height=\"" +
               num(std::abs(base - y)) + "\" fill=\"" + col + "\"/>\n";
      }
    } else {
      std::vector<std::size_t> order(s.x.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.x[a] < s.x[b]; });
      if (p.style == Style::Lines && s.x.size() > 1) {
        std::string pts;
        for (std::size_t i : order) pts += num(ax.map(s.x[i], x0, x1)) + "," + num(ay.map(s.y[i], y0, y1)) + " ";
        out += "<polyline fill=\"none\" stroke=\"" + std::string(col) + "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
      }
      for (std::size_t i : order)
        out += "<circle cx=\"" + num(ax.map(s.x[i], x0, x1)) + "\" cy=\"" + num(ay.map(s.y[i], y0, y1)) + "\" r=\"3.5\" fill=\"" +
               col + "\"/>\n";
    }
    const double ly = y1 + 14 + 18 * static_cast<double>(si);
    out += "<rect x=\"" + num(x1 + 12) + "\" y=\"" + num(ly - 9) + "\" width=\"12\" height=\"10\" fill=\"" + col + "\"/>\n";
    out += "<text x=\"" + num(x1 + 30) + "\" y=\"" + num(ly) + "\">" + esc(s.label) + "</text>\n";
  }
  if (kept.empty()) notes.push_back("no data");
  for (std::size_t i = 0; i < notes.size(); ++i)
    out += "<text x=\"" + num(x0 + 8) + "\" y=\"" + num(y1 + 16 + 15 * static_cast<double>(i)) + "\" fill=\"#555555\">" +
           esc(notes[i]) + "</text>\n";
  out += "</svg>\n";
  return out;
}

}  // namespace cext::svg
