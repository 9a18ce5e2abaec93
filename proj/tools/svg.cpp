#include "svg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <limits>

namespace chainqfi::cli {
namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 84, kRight = 150, kTop = 46, kBottom = 62;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
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

std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  if (!(span > 0)) return {lo};
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) t.push_back(v);
  return t;
}

std::vector<double> log_ticks(double lo, double hi) {
  std::vector<double> t;
  for (double e = std::floor(std::log10(lo)); e <= std::ceil(std::log10(hi)); e += 1.0) {
    for (double m : {1.0, 2.0, 5.0}) {
      const double v = m * std::pow(10.0, e);
      if (v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12)) t.push_back(v);
    }
  }
  return t;
}

// Blue to yellow ramp for heat maps.
std::string ramp(double f) {
  f = std::clamp(f, 0.0, 1.0);
  const double stops[5][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  const double p = f * 4.0;
  const int i = std::min(3, static_cast<int>(p));
  const double w = p - i;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + w * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + w * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + w * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

}  // namespace

SvgPlot::SvgPlot(std::string title, std::string xlabel, std::string ylabel)
    : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

void SvgPlot::x_range(double lo, double hi) {
  fixed_x_ = true;
  xlo_ = lo;
  xhi_ = hi;
}

void SvgPlot::y_range(double lo, double hi) {
  fixed_y_ = true;
  ylo_ = lo;
  yhi_ = hi;
}

void SvgPlot::add_vline(double x, std::string label, std::string color) {
  vlines_.push_back({x, std::move(label), std::move(color)});
}

void SvgPlot::autoscale(double& xlo, double& xhi, double& ylo, double& yhi) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  xlo = inf, xhi = -inf, ylo = inf, yhi = -inf;
  auto take = [&](double x, double y) {
    if (!std::isfinite(x) || !std::isfinite(y)) return;
    if (log_x_ && !(x > 0)) return;
    if (log_y_ && !(y > 0)) return;
    xlo = std::min(xlo, x), xhi = std::max(xhi, x);
    ylo = std::min(ylo, y), yhi = std::max(yhi, y);
  };
  for (const auto& s : series_)
    for (std::size_t i = 0; i < s.x.size(); ++i) take(s.x[i], s.y[i]);
  for (const auto& m : markers_)
    for (std::size_t i = 0; i < m.x.size(); ++i) {
      const double e = m.yerr.empty() ? 0.0 : m.yerr[i];
      take(m.x[i], m.y[i] - e);
      take(m.x[i], m.y[i] + e);
    }
  for (const auto& a : areas_)
    for (std::size_t i = 0; i < a.x.size(); ++i) take(a.x[i], a.y[i]);
  for (const auto& c : cells_) {
    take(c.x0, c.y0);
    take(c.x1, c.y1);
  }
  if (!(xlo < xhi)) xlo = xlo == inf ? 0.0 : xlo - 1.0, xhi = xhi == -inf ? 1.0 : xhi + 1.0;
  if (!(ylo < yhi)) ylo = ylo == inf ? 0.0 : ylo - 1.0, yhi = yhi == -inf ? 1.0 : yhi + 1.0;
  if (log_y_) {
    ylo /= 1.5, yhi *= 1.5;
  } else if (cells_.empty()) {
    const double pad = 0.05 * (yhi - ylo);
    ylo -= pad, yhi += pad;
  }
  if (fixed_x_) xlo = xlo_, xhi = xhi_;
  if (fixed_y_) ylo = ylo_, yhi = yhi_;
}

std::string SvgPlot::render(bool deterministic) const {
  double xlo, xhi, ylo, yhi;
  autoscale(xlo, xhi, ylo, yhi);
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto fx = [&](double x) {
    const double u = log_x_ ? (std::log10(x) - std::log10(xlo)) / (std::log10(xhi) - std::log10(xlo))
                            : (x - xlo) / (xhi - xlo);
    return kLeft + u * pw;
  };
  auto fy = [&](double y) {
    const double u = log_y_ ? (std::log10(y) - std::log10(ylo)) / (std::log10(yhi) - std::log10(ylo))
                            : (y - ylo) / (yhi - ylo);
    return kTop + (1.0 - u) * ph;
  };
  auto ok = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_x_ || x > 0) && (!log_y_ || y > 0);
  };

  std::string s;
  s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\">\n";
  if (!deterministic) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    s += std::string("<!-- generated ") + buf + " -->\n";
  }
  s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s += "<defs><clipPath id=\"plot\"><rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) +
       "\" height=\"" + num(ph) + "\"/></clipPath></defs>\n";
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"26\" text-anchor=\"middle\" font-size=\"16\">" +
       escape(title_) + "</text>\n";

  if (!cells_.empty()) {
    double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
    for (const auto& c : cells_)
      if (std::isfinite(c.value)) vmin = std::min(vmin, c.value), vmax = std::max(vmax, c.value);
    if (!(vmax > vmin)) vmax = vmin + 1.0;
    s += "<g clip-path=\"url(#plot)\" shape-rendering=\"crispEdges\">\n";
    for (const auto& c : cells_) {
      const double x0 = fx(c.x0), x1 = fx(c.x1), y0 = fy(c.y1), y1 = fy(c.y0);
      s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
           num(y1 - y0) + "\" fill=\"" + ramp((c.value - vmin) / (vmax - vmin)) + "\"/>\n";
    }
    s += "</g>\n";
  }

  s += "<g clip-path=\"url(#plot)\">\n";
  for (const auto& a : areas_) {
    std::string pts;
    const double base = log_y_ ? fy(ylo) : fy(std::clamp(0.0, ylo, yhi));
    bool any = false;
    double first = 0, last = 0;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
      if (!ok(a.x[i], a.y[i])) continue;
      if (!any) first = fx(a.x[i]);
      last = fx(a.x[i]);
      pts += num(fx(a.x[i])) + "," + num(fy(a.y[i])) + " ";
      any = true;
    }
    if (any)
      s += "<polygon points=\"" + num(first) + "," + num(base) + " " + pts + num(last) + "," + num(base) +
           "\" fill=\"" + a.color + "\" fill-opacity=\"" + num(a.opacity) + "\" stroke=\"none\"/>\n";
  }
  for (const auto& ser : series_) {
    std::string pts;
    for (std::size_t i = 0; i < ser.x.size(); ++i)
      if (ok(ser.x[i], ser.y[i])) pts += num(fx(ser.x[i])) + "," + num(fy(ser.y[i])) + " ";
    if (pts.empty()) continue;
    pts.pop_back();
    s += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + ser.color + "\" stroke-width=\"" +
         num(ser.width) + "\"" + (ser.dashed ? " stroke-dasharray=\"6,4\"" : "") + "/>\n";
  }
  for (const auto& m : markers_) {
    for (std::size_t i = 0; i < m.x.size(); ++i) {
      if (!ok(m.x[i], m.y[i])) continue;
      const double cx = fx(m.x[i]), cy = fy(m.y[i]);
      if (!m.yerr.empty() && m.yerr[i] > 0) {
        const double lo = m.y[i] - m.yerr[i], hi = m.y[i] + m.yerr[i];
        if (ok(m.x[i], lo) && ok(m.x[i], hi))
          s += "<line x1=\"" + num(cx) + "\" y1=\"" + num(fy(lo)) + "\" x2=\"" + num(cx) + "\" y2=\"" +
               num(fy(hi)) + "\" stroke=\"" + m.color + "\" stroke-width=\"0.8\"/>\n";
      }
      s += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"2.5\" fill=\"" + m.color + "\"/>\n";
    }
  }
  for (const auto& v : vlines_) {
    if (!std::isfinite(v.x) || (log_x_ && !(v.x > 0))) continue;
    const double x = fx(v.x);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x) + "\" y2=\"" + num(kTop + ph) +
         "\" stroke=\"" + v.color + "\" stroke-dasharray=\"3,3\"/>\n";
    s += "<text x=\"" + num(x + 4) + "\" y=\"" + num(kTop + 14) + "\" font-size=\"11\" fill=\"" + v.color +
         "\">" + escape(v.label) + "</text>\n";
  }
  s += "</g>\n";

  // Frame, ticks and labels.
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(pw) + "\" height=\"" + num(ph) +
       "\" fill=\"none\" stroke=\"#000000\"/>\n";
  for (double t : log_x_ ? log_ticks(xlo, xhi) : linear_ticks(xlo, xhi)) {
    const double x = fx(t);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop + ph) + "\" x2=\"" + num(x) + "\" y2=\"" +
         num(kTop + ph + 5) + "\" stroke=\"#000000\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(kTop + ph + 19) + "\" text-anchor=\"middle\" font-size=\"11\">" +
         tick_label(t) + "</text>\n";
  }
  for (double t : log_y_ ? log_ticks(ylo, yhi) : linear_ticks(ylo, yhi)) {
    const double y = fy(t);
    s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(y) +
         "\" stroke=\"#000000\"/>\n";
    s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
         tick_label(t) + "</text>\n";
  }
  s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 18) +
       "\" text-anchor=\"middle\" font-size=\"13\">" + escape(xlabel_) + "</text>\n";
  s += "<text x=\"20\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 20 " +
       num(kTop + ph / 2) + ")\">" + escape(ylabel_) + "</text>\n";

  // Legend and notes in the right margin.
  double ly = kTop + 12;
  const double lx = kLeft + pw + 12;
  auto legend = [&](const std::string& label, const std::string& color) {
    if (label.empty()) return;
    s += "<rect x=\"" + num(lx) + "\" y=\"" + num(ly - 8) + "\" width=\"12\" height=\"8\" fill=\"" + color + "\"/>\n";
    s += "<text x=\"" + num(lx + 16) + "\" y=\"" + num(ly) + "\" font-size=\"11\">" + escape(label) + "</text>\n";
    ly += 16;
  };
  for (const auto& m : markers_) legend(m.label, m.color);
  for (const auto& ser : series_) legend(ser.label, ser.color);
  for (const auto& a : areas_) legend(a.label, a.color);
  ly += 6;
  for (const auto& n : notes_) {
    s += "<text x=\"" + num(lx) + "\" y=\"" + num(ly) + "\" font-size=\"10\">" + escape(n) + "</text>\n";
    ly += 14;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace chainqfi::cli
