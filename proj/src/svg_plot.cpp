#include "tscopf/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace tscopf {

namespace {

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double base = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0}) {
    if (m * base >= raw) return m * base;
  }
  return 10.0 * base;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  const double left = 70, right = 160, top = 40, bottom = 50;
  const double w = spec.width - left - right;
  const double h = spec.height - top - bottom;

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * h; };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(spec.width) + "\" height=\"" +
         std::to_string(spec.height) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + fmt("%.1f", left + w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" +
         escape(spec.title) + "</text>\n";

  const double xs = nice_step(x1 - x0, 8);
  for (double t = std::ceil(x0 / xs) * xs; t <= x1 + 1e-9 * xs; t += xs) {
    const std::string X = fmt("%.2f", px(t));
    out += "<line x1=\"" + X + "\" y1=\"" + fmt("%.2f", top) + "\" x2=\"" + X + "\" y2=\"" + fmt("%.2f", top + h) +
           "\" stroke=\"#e0e0e0\"/>\n";
    out += "<text x=\"" + X + "\" y=\"" + fmt("%.2f", top + h + 16) + "\" text-anchor=\"middle\">" +
           fmt("%g", std::abs(t) < 1e-12 * xs ? 0.0 : t) + "</text>\n";
  }
  const double ys = nice_step(y1 - y0, 6);
  for (double v = std::ceil(y0 / ys) * ys; v <= y1 + 1e-9 * ys; v += ys) {
    const std::string Y = fmt("%.2f", py(v));
    out += "<line x1=\"" + fmt("%.2f", left) + "\" y1=\"" + Y + "\" x2=\"" + fmt("%.2f", left + w) + "\" y2=\"" + Y +
           "\" stroke=\"#e0e0e0\"/>\n";
    out += "<text x=\"" + fmt("%.2f", left - 6) + "\" y=\"" + Y + "\" text-anchor=\"end\" dy=\"4\">" +
           fmt("%g", std::abs(v) < 1e-12 * ys ? 0.0 : v) + "</text>\n";
  }
  out += "<rect x=\"" + fmt("%.2f", left) + "\" y=\"" + fmt("%.2f", top) + "\" width=\"" + fmt("%.2f", w) +
         "\" height=\"" + fmt("%.2f", h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  out += "<text x=\"" + fmt("%.1f", left + w / 2) + "\" y=\"" + fmt("%.1f", spec.height - 12.0) +
         "\" text-anchor=\"middle\">" + escape(spec.x_label) + "</text>\n";
  out += "<text transform=\"translate(16," + fmt("%.1f", top + h / 2) + ") rotate(-90)\" text-anchor=\"middle\">" +
         escape(spec.y_label) + "</text>\n";

  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& s = spec.series[k];
    const char* color = palette[k % (sizeof palette / sizeof palette[0])];
    std::string points;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (!points.empty()) points += ' ';
      points += fmt("%.2f", px(s.x[i])) + "," + fmt("%.2f", py(s.y[i]));
    }
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.2\" points=\"" + points +
           "\"/>\n";
    const double ly = top + 10 + 18.0 * static_cast<double>(k);
    out += "<line x1=\"" + fmt("%.2f", left + w + 10) + "\" y1=\"" + fmt("%.2f", ly) + "\" x2=\"" +
           fmt("%.2f", left + w + 30) + "\" y2=\"" + fmt("%.2f", ly) + "\" stroke=\"" + color +
           "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + fmt("%.2f", left + w + 34) + "\" y=\"" + fmt("%.2f", ly) + "\" dy=\"4\">" +
           escape(s.label) + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace tscopf
