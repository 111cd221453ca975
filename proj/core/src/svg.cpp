#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "spinfid/error.hpp"
#include "spinfid/io.hpp"

namespace spinfid::io {
namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 450.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;  // room for the legend
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double x, int decimals) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed, decimals);
  std::string s(buf, res.ptr);
  if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) s = decimals > 0 ? "0." + std::string(decimals, '0') : "0";
  return s;
}

std::string coord(double x) { return fixed(x, 2); }

std::string escape(std::string_view s) {
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

struct Axis {
  double lo, hi, step;
  int decimals;
};

Axis nice_axis(double lo, double hi) {
  if (lo == hi) {
    const double pad = lo == 0.0 ? 1.0 : 0.1 * std::abs(lo);
    lo -= pad;
    hi += pad;
  }
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  const double step = nice * mag;
  Axis a;
  a.step = step;
  a.lo = std::floor(lo / step) * step;
  a.hi = std::ceil(hi / step) * step;
  a.decimals = std::max(0, -static_cast<int>(std::floor(std::log10(step) + 1e-9)));
  return a;
}

}  // namespace

std::string render_svg(const PlotPanel& panel) {
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  std::size_t n_points = 0;
  for (const auto& s : panel.series) {
    if (s.x.size() != s.y.size()) throw ValidationError("plot series '" + s.label + "': x and y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
      ++n_points;
    }
  }
  if (n_points == 0) throw ValidationError("plot '" + panel.title + "' has no data to draw");

  const Axis ax = nice_axis(xmin, xmax);
  const Axis ay = nice_axis(ymin, ymax);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
  auto py = [&](double y) { return kTop + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

  std::string o;
  o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(kWidth) + "\" height=\"" + coord(kHeight) +
       "\" viewBox=\"0 0 " + coord(kWidth) + " " + coord(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o += "<text x=\"" + coord(kLeft + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
       escape(panel.title) + "</text>\n";

  // Grid and ticks.
  o += "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const int nx = static_cast<int>(std::lround((ax.hi - ax.lo) / ax.step));
  const int ny = static_cast<int>(std::lround((ay.hi - ay.lo) / ay.step));
  for (int i = 0; i <= nx; ++i) {
    const double x = px(ax.lo + i * ax.step);
    o += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(kTop) + "\" x2=\"" + coord(x) + "\" y2=\"" + coord(kTop + ph) +
         "\"/>\n";
  }
  for (int i = 0; i <= ny; ++i) {
    const double y = py(ay.lo + i * ay.step);
    o += "<line x1=\"" + coord(kLeft) + "\" y1=\"" + coord(y) + "\" x2=\"" + coord(kLeft + pw) + "\" y2=\"" + coord(y) +
         "\"/>\n";
  }
  o += "</g>\n";
  o += "<rect x=\"" + coord(kLeft) + "\" y=\"" + coord(kTop) + "\" width=\"" + coord(pw) + "\" height=\"" + coord(ph) +
       "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= nx; ++i) {
    const double v = ax.lo + i * ax.step;
    o += "<text x=\"" + coord(px(v)) + "\" y=\"" + coord(kTop + ph + 18) + "\" text-anchor=\"middle\">" +
         fixed(v, ax.decimals) + "</text>\n";
  }
  for (int i = 0; i <= ny; ++i) {
    const double v = ay.lo + i * ay.step;
    o += "<text x=\"" + coord(kLeft - 6) + "\" y=\"" + coord(py(v) + 4) + "\" text-anchor=\"end\">" +
         fixed(v, ay.decimals) + "</text>\n";
  }
  o += "<text x=\"" + coord(kLeft + pw / 2) + "\" y=\"" + coord(kHeight - 16) + "\" text-anchor=\"middle\">" +
       escape(panel.x_label) + "</text>\n";
  o += "<text x=\"18\" y=\"" + coord(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       coord(kTop + ph / 2) + ")\">" + escape(panel.y_label) + "</text>\n";

  // Data.
  for (std::size_t k = 0; k < panel.series.size(); ++k) {
    const auto& s = panel.series[k];
    const char* color = kPalette[k % kPalette.size()];
    if (s.style == SeriesStyle::line) {
      o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
      bool first = true;
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        if (!first) o += ' ';
        o += coord(px(s.x[i])) + "," + coord(py(s.y[i]));
        first = false;
      }
      o += "\"/>\n";
    } else {
      o += "<g fill=\"" + std::string(color) + "\">\n";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
        o += "<circle cx=\"" + coord(px(s.x[i])) + "\" cy=\"" + coord(py(s.y[i])) + "\" r=\"2.5\"/>\n";
      }
      o += "</g>\n";
    }
  }

  // Legend.
  const double lx = kLeft + pw + 14;
  for (std::size_t k = 0; k < panel.series.size(); ++k) {
    const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
    const char* color = kPalette[k % kPalette.size()];
    if (panel.series[k].style == SeriesStyle::line) {
      o += "<line x1=\"" + coord(lx) + "\" y1=\"" + coord(ly) + "\" x2=\"" + coord(lx + 20) + "\" y2=\"" + coord(ly) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    } else {
      o += "<circle cx=\"" + coord(lx + 10) + "\" cy=\"" + coord(ly) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    }
    o += "<text x=\"" + coord(lx + 26) + "\" y=\"" + coord(ly + 4) + "\">" + escape(panel.series[k].label) +
         "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

void emit_plot(const PlotPanel& panel, const std::filesystem::path& path) { write_atomic(path, render_svg(panel)); }

}  // namespace spinfid::io
