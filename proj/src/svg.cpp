#include "fef/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace fef::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Axis {
  double lo = 0, hi = 1;
  bool log = false;

  double map(double v) const {
    const double a = log ? std::log10(v) : v;
    return (a - lo) / (hi - lo);
  }
};

Axis fit_axis(std::vector<double> values, bool log) {
  Axis ax;
  ax.log = log;
  for (double& v : values) v = log ? std::log10(v) : v;
  if (values.empty()) return ax;
  const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  ax.lo = *mn;
  ax.hi = *mx;
  if (ax.hi - ax.lo < 1e-12 * std::max(1.0, std::abs(ax.hi))) {
    ax.lo -= 0.5;
    ax.hi += 0.5;
  }
  const double pad = 0.04 * (ax.hi - ax.lo);
  ax.lo -= pad;
  ax.hi += pad;
  return ax;
}

bool usable(double v, bool log) { return std::isfinite(v) && (!log || v > 0); }

}  // namespace

std::string line_plot(const std::vector<Line>& lines, const PlotOptions& options) {
  std::vector<double> xs, ys;
  for (const Line& l : lines) {
    for (std::size_t i = 0; i < std::min(l.x.size(), l.y.size()); ++i) {
      if (usable(l.x[i], options.log_x) && usable(l.y[i], options.log_y)) {
        xs.push_back(l.x[i]);
        ys.push_back(l.y[i]);
      }
    }
  }
  const Axis ax = fit_axis(xs, options.log_x);
  const Axis ay = fit_axis(ys, options.log_y);

  const double left = 70, right = 20, top = 34, bottom = 48;
  const double w = options.width - left - right, h = options.height - top - bottom;
  auto px = [&](double x) { return left + ax.map(x) * w; };
  auto py = [&](double y) { return top + (1 - ay.map(y)) * h; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(left + w / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">"
     << escape(options.title) << "</text>\n";
  os << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
     << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = ax.lo + (ax.hi - ax.lo) * i / 4, fy = ay.lo + (ay.hi - ay.lo) * i / 4;
    const double gx = left + w * i / 4, gy = top + h * (1 - i / 4.0);
    os << "<line x1=\"" << num(gx) << "\" y1=\"" << num(top + h) << "\" x2=\"" << num(gx) << "\" y2=\""
       << num(top + h + 4) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(gx) << "\" y=\"" << num(top + h + 16) << "\" text-anchor=\"middle\">"
       << tick_label(ax.log ? std::pow(10, fx) : fx) << "</text>\n";
    os << "<line x1=\"" << num(left - 4) << "\" y1=\"" << num(gy) << "\" x2=\"" << num(left) << "\" y2=\"" << num(gy)
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << num(left - 6) << "\" y=\"" << num(gy + 4) << "\" text-anchor=\"end\">"
       << tick_label(ay.log ? std::pow(10, fy) : fy) << "</text>\n";
  }
  os << "<text x=\"" << num(left + w / 2) << "\" y=\"" << num(options.height - 10.0)
     << "\" text-anchor=\"middle\">" << escape(options.x_label) << "</text>\n";
  os << "<text transform=\"translate(14," << num(top + h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(options.y_label) << "</text>\n";

  for (std::size_t k = 0; k < lines.size(); ++k) {
    const Line& l = lines[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\""
       << (l.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
    for (std::size_t i = 0; i < std::min(l.x.size(), l.y.size()); ++i) {
      if (usable(l.x[i], options.log_x) && usable(l.y[i], options.log_y)) {
        os << num(px(l.x[i])) << ',' << num(py(l.y[i])) << ' ';
      }
    }
    os << "\"/>\n";
    os << "<text x=\"" << num(left + 8) << "\" y=\"" << num(top + 14 + 13.0 * k) << "\" fill=\"" << colour << "\">"
       << escape(l.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string curve_plot(const std::vector<Snapshot>& curves, const std::string& title, int size) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const Snapshot& s : curves) {
    lo = std::min(lo, s.curve.points().minCoeff());
    hi = std::max(hi, s.curve.points().maxCoeff());
  }
  if (!(hi > lo)) {
    lo = -1;
    hi = 1;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double margin = 30, inner = size - 2 * margin;
  auto map = [&](double v) { return (v - lo) / (hi - lo) * inner; };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
     << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(size / 2.0) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << escape(title)
     << "</text>\n";
  for (std::size_t k = 0; k < curves.size(); ++k) {
    const Curve& c = curves[k].curve;
    const char* colour = kPalette[k % std::size(kPalette)];
    os << "<polygon fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.2\" points=\"";
    for (Index i = 0; i < c.size(); ++i) {
      os << num(margin + map(c.point(i).x())) << ',' << num(margin + inner - map(c.point(i).y())) << ' ';
    }
    os << "\"/>\n";
    os << "<text x=\"" << num(margin) << "\" y=\"" << num(margin + 12 + 13.0 * k) << "\" fill=\"" << colour << "\">"
       << escape(curves[k].label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace fef::svg
