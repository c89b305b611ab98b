#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "bubbleflow/io/csv.hpp"

namespace bubbleflow::io {

struct Series {
  std::string name;
  std::vector<double> x, y;
};

struct Plot {
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  bool stacked = false;  ///< fill between consecutive series (y already cumulative)
  std::vector<Series> series;
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  return colours[i % 6];
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

inline std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

} // namespace detail

/// Plain line chart; points that cannot be drawn on a log axis are skipped.
inline void write_svg(std::ostream& os, const Plot& p) {
  const double W = 640, H = 420, L = 84, R = 20, T = 40, B = 50;
  auto tx = [&](double v) { return p.log_x ? std::log10(v) : v; };
  auto ty = [&](double v) { return p.log_y ? std::log10(v) : v; };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!p.log_x || x > 0) && (!p.log_y || y > 0);
  };
  double x0 = infinity, x1 = -infinity, y0 = infinity, y1 = -infinity;
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i])) {
        x0 = std::min(x0, tx(s.x[i]));
        x1 = std::max(x1, tx(s.x[i]));
        y0 = std::min(y0, ty(s.y[i]));
        y1 = std::max(y1, ty(s.y[i]));
      }
  if (!(x1 >= x0)) x0 = 0, x1 = 1;
  if (!(y1 >= y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return L + (tx(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (ty(v) - y0) / (y1 - y0) * (H - T - B); };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::escape(p.title) << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double vx = p.log_x ? std::pow(10.0, fx) : fx, vy = p.log_y ? std::pow(10.0, fy) : fy;
    os << "<text x=\"" << fmt(px(vx)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << detail::tick(vx) << "</text>\n";
    os << "<text x=\"" << L - 6 << "\" y=\"" << fmt(py(vy) + 4) << "\" text-anchor=\"end\">" << detail::tick(vy) << "</text>\n";
  }
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << detail::escape(p.xlabel) << "</text>\n";
  os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2 << ")\" text-anchor=\"middle\">" << detail::escape(p.ylabel) << "</text>\n";
  for (std::size_t k = 0; k < p.series.size(); ++k) {
    const auto& s = p.series[k];
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i])) pts += fmt(px(s.x[i])) + "," + fmt(py(s.y[i])) + " ";
    if (pts.empty()) continue;
    if (p.stacked) {
      std::string base;
      if (k == 0) {
        const double zero = p.log_y ? H - B : std::clamp(py(0.0), T, H - B);
        base = fmt(px(s.x.back())) + "," + fmt(zero) + " " + fmt(px(s.x.front())) + "," + fmt(zero);
      } else {
        const auto& prev = p.series[k - 1];
        for (std::size_t i = prev.x.size(); i-- > 0;)
          if (ok(prev.x[i], prev.y[i])) base += fmt(px(prev.x[i])) + "," + fmt(py(prev.y[i])) + " ";
      }
      os << "<polygon points=\"" << pts << base << "\" fill=\"" << detail::palette(k) << "\" fill-opacity=\"0.35\" stroke=\"none\"/>\n";
    }
    os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << detail::palette(k) << "\" stroke-width=\"1.5\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (ok(s.x[i], s.y[i]))
        os << "<circle cx=\"" << fmt(px(s.x[i])) << "\" cy=\"" << fmt(py(s.y[i])) << "\" r=\"2\" fill=\"" << detail::palette(k) << "\"/>\n";
    os << "<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1) << "\" text-anchor=\"end\" fill=\"" << detail::palette(k) << "\">" << detail::escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
}

inline Plot distance_plot(const ResolutionTimeline& tl) {
  Plot p{"d(t)", "t", "d", false, true, false, {}};
  Series s{"d", {}, {}};
  for (const auto& r : tl.rows) {
    s.x.push_back(r.t);
    s.y.push_back(r.d);
  }
  p.series.push_back(std::move(s));
  return p;
}

inline Plot scales_plot(const ResolutionTimeline& tl) {
  Plot p{"fitted scales", "t", "lambda_j", false, true, false, {}};
  for (std::size_t j = 0; j < tl.n_max; ++j) {
    Series s{"lambda_" + std::to_string(j + 1), {}, {}};
    for (const auto& r : tl.rows)
      if (j < r.fitted.size()) {
        s.x.push_back(r.t);
        s.y.push_back(r.fitted.scales[j]);
      }
    if (!s.x.empty()) p.series.push_back(std::move(s));
  }
  return p;
}

/// Cumulative E_inner, + E_annulus, + E_outer.
inline Plot energy_partition_plot(const ResolutionTimeline& tl) {
  Plot p{"energy partition", "t", "E", false, false, true, {}};
  Series a{"E_inner", {}, {}}, b{"+ E_annulus", {}, {}}, c{"+ E_outer", {}, {}};
  for (const auto& r : tl.rows) {
    a.x.push_back(r.t);
    b.x.push_back(r.t);
    c.x.push_back(r.t);
    a.y.push_back(r.e_inner);
    b.y.push_back(r.e_inner + r.e_annulus);
    c.y.push_back(r.e_inner + r.e_annulus + r.e_outer);
  }
  p.series = {a, b, c};
  return p;
}

} // namespace bubbleflow::io
