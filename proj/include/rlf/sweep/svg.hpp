#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rlf::sweep::svg {

struct Series {
  std::string label;
  std::vector<double> x, y;
  std::vector<double> err;  ///< optional symmetric error bars
  bool markers = false;     ///< points instead of a line
  std::string color = "#1f77b4";
};

struct LinePlot {
  std::string title, x_label, y_label;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
  std::vector<double> vlines;  ///< dashed vertical guides (phase boundaries)
  std::optional<double> y_min, y_max;  ///< override the data range; lines are clipped
};

struct Heatmap {
  std::string title, x_label, y_label;
  std::vector<double> xs, ys;          ///< cell centres
  std::vector<std::vector<double>> z;  ///< z[iy][ix]; +inf cells are drawn as divergent
  bool log_x = false, log_y = false, log_z = false;
  bool phase_boundaries = true;  ///< overlay alpha_p = 1, alpha_f = 1, alpha_f = alpha_p
};

namespace detail {

inline constexpr double kWidth = 640, kHeight = 440;
inline constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 55;

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
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

/// Maps data to pixels on one axis, linear or log10.
struct Scale {
  double lo = 0, hi = 1, p0 = 0, p1 = 1;
  bool log = false;
  double t(double v) const { return log ? std::log10(v) : v; }
  double operator()(double v) const {
    const double a = t(lo), b = t(hi);
    return p0 + (t(v) - a) / (b - a) * (p1 - p0);
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (int e = static_cast<int>(std::floor(std::log10(lo))); e <= static_cast<int>(std::ceil(std::log10(hi))); ++e) {
        const double v = std::pow(10.0, e);
        if (v >= lo * (1 - 1e-9) && v <= hi * (1 + 1e-9)) out.push_back(v);
      }
      if (out.size() < 2) out = {lo, hi};
      return out;
    }
    const double raw = (hi - lo) / 5;
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

inline void range_of(const std::vector<double>& v, bool log, double& lo, double& hi) {
  for (double x : v) {
    if (!std::isfinite(x) || (log && x <= 0)) continue;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
}

inline void pad(double& lo, double& hi, bool log) {
  if (!(lo <= hi)) {
    lo = log ? 0.1 : 0.0;
    hi = 1.0;
  }
  if (lo == hi) {
    lo = log ? lo / 2 : lo - 0.5;
    hi = log ? hi * 2 : hi + 0.5;
  }
}

inline std::string header(const std::string& title) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(kWidth) + "\" height=\"" +
       num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
       "</text>\n";
  return s;
}

inline std::string axes(const Scale& sx, const Scale& sy, const std::string& xl, const std::string& yl) {
  std::string s;
  s += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" + num(kWidth - kLeft - kRight) +
       "\" height=\"" + num(kHeight - kTop - kBottom) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double v : sx.ticks()) {
    const double x = sx(v);
    s += "<line x1=\"" + num(x) + "\" y1=\"" + num(kHeight - kBottom) + "\" x2=\"" + num(x) + "\" y2=\"" +
         num(kHeight - kBottom + 5) + "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(x) + "\" y=\"" + num(kHeight - kBottom + 18) + "\" text-anchor=\"middle\">" +
         label_num(v) + "</text>\n";
  }
  for (double v : sy.ticks()) {
    const double y = sy(v);
    s += "<line x1=\"" + num(kLeft - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\"/>\n";
    s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + label_num(v) +
         "</text>\n";
  }
  s += "<text x=\"" + num((kLeft + kWidth - kRight) / 2) + "\" y=\"" + num(kHeight - 12) +
       "\" text-anchor=\"middle\">" + escape(xl) + "</text>\n";
  s += "<text x=\"16\" y=\"" + num((kTop + kHeight - kBottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num((kTop + kHeight - kBottom) / 2) + ")\">" + escape(yl) + "</text>\n";
  return s;
}

/// Viridis-like ramp, t in [0, 1].
inline std::string color(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops = {
      {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  const double f = t - i;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(stops[i][0] + f * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + f * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + f * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

}  // namespace detail

/// Lines break at non-finite values; markers skip them.
inline std::string render(const LinePlot& p) {
  using namespace detail;
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : p.series) {
    range_of(s.x, p.log_x, xlo, xhi);
    range_of(s.y, p.log_y, ylo, yhi);
  }
  pad(xlo, xhi, p.log_x);
  pad(ylo, yhi, p.log_y);
  if (!p.log_y) {
    const double m = 0.05 * (yhi - ylo);
    ylo -= m;
    yhi += m;
  }
  if (p.y_min) ylo = *p.y_min;
  if (p.y_max) yhi = *p.y_max;
  if (!(yhi > ylo)) yhi = ylo + 1.0;
  const Scale sx{xlo, xhi, kLeft, kWidth - kRight, p.log_x};
  const Scale sy{ylo, yhi, kHeight - kBottom, kTop, p.log_y};
  auto inside = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!p.log_x || x > 0) && (!p.log_y || y > 0) && y >= ylo && y <= yhi;
  };

  std::string s = header(p.title) + axes(sx, sy, p.x_label, p.y_label);
  s += "<clipPath id=\"plot\"><rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
       num(kWidth - kLeft - kRight) + "\" height=\"" + num(kHeight - kTop - kBottom) + "\"/></clipPath>\n";
  s += "<g clip-path=\"url(#plot)\">\n";
  for (double v : p.vlines) {
    if (v < xlo || v > xhi) continue;
    s += "<line x1=\"" + num(sx(v)) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(sx(v)) + "\" y2=\"" +
         num(kHeight - kBottom) + "\" stroke=\"black\" stroke-dasharray=\"5,4\"/>\n";
  }
  for (const auto& se : p.series) {
    if (se.markers) {
      for (std::size_t i = 0; i < se.x.size(); ++i) {
        if (!inside(se.x[i], se.y[i])) continue;
        const double x = sx(se.x[i]), y = sy(se.y[i]);
        if (i < se.err.size() && std::isfinite(se.err[i]) && se.err[i] > 0) {
          const double lo = std::max(se.y[i] - se.err[i], p.log_y ? ylo : -1e300);
          s += "<line x1=\"" + num(x) + "\" y1=\"" + num(sy(std::max(lo, ylo))) + "\" x2=\"" + num(x) + "\" y2=\"" +
               num(sy(std::min(se.y[i] + se.err[i], yhi))) + "\" stroke=\"" + se.color + "\"/>\n";
        }
        s += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"3\" fill=\"" + se.color + "\"/>\n";
      }
      continue;
    }
    std::string path;
    bool pen = false;
    for (std::size_t i = 0; i < se.x.size(); ++i) {
      const bool ok = std::isfinite(se.x[i]) && std::isfinite(se.y[i]) && (!p.log_x || se.x[i] > 0) &&
                      (!p.log_y || se.y[i] > 0);
      if (!ok) {
        pen = false;
        continue;
      }
      const double yv = std::clamp(se.y[i], ylo, yhi);
      path += (pen ? " L" : " M") + num(sx(se.x[i])) + " " + num(sy(yv));
      pen = true;
    }
    if (!path.empty())
      s += "<path d=\"" + path.substr(1) + "\" fill=\"none\" stroke=\"" + se.color + "\" stroke-width=\"1.5\"/>\n";
  }
  s += "</g>\n";
  double ly = kTop + 10;
  for (const auto& se : p.series) {
    const double lx = kWidth - kRight + 12;
    if (se.markers)
      s += "<circle cx=\"" + num(lx + 10) + "\" cy=\"" + num(ly - 4) + "\" r=\"3\" fill=\"" + se.color + "\"/>\n";
    else
      s += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(lx + 20) + "\" y2=\"" + num(ly - 4) +
           "\" stroke=\"" + se.color + "\" stroke-width=\"1.5\"/>\n";
    s += "<text x=\"" + num(lx + 26) + "\" y=\"" + num(ly) + "\">" + escape(se.label) + "</text>\n";
    ly += 18;
  }
  return s + "</svg>\n";
}

/// Cells are drawn between midpoints of neighbouring centres; +inf cells grey.
inline std::string render(const Heatmap& h) {
  using namespace detail;
  if (h.xs.empty() || h.ys.empty()) return header(h.title) + "</svg>\n";
  auto edges = [](const std::vector<double>& c, bool log) {
    std::vector<double> e(c.size() + 1);
    auto t = [&](double v) { return log ? std::log10(v) : v; };
    auto inv = [&](double v) { return log ? std::pow(10.0, v) : v; };
    for (std::size_t i = 1; i < c.size(); ++i) e[i] = inv(0.5 * (t(c[i - 1]) + t(c[i])));
    const double step0 = c.size() > 1 ? t(c[1]) - t(c[0]) : 1.0;
    const double step1 = c.size() > 1 ? t(c.back()) - t(c[c.size() - 2]) : 1.0;
    e.front() = inv(t(c.front()) - 0.5 * step0);
    e.back() = inv(t(c.back()) + 0.5 * step1);
    return e;
  };
  const auto ex = edges(h.xs, h.log_x), ey = edges(h.ys, h.log_y);
  const Scale sx{ex.front(), ex.back(), kLeft, kWidth - kRight, h.log_x};
  const Scale sy{ey.front(), ey.back(), kHeight - kBottom, kTop, h.log_y};

  double zlo = std::numeric_limits<double>::infinity(), zhi = -zlo;
  for (const auto& row : h.z) range_of(row, h.log_z, zlo, zhi);
  pad(zlo, zhi, h.log_z);
  auto zt = [&](double v) { return h.log_z ? std::log10(v) : v; };

  std::string s = header(h.title);
  s += "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t iy = 0; iy < h.ys.size(); ++iy)
    for (std::size_t ix = 0; ix < h.xs.size(); ++ix) {
      const double v = iy < h.z.size() && ix < h.z[iy].size() ? h.z[iy][ix] : std::nan("");
      std::string fill;
      if (std::isinf(v) && v > 0) fill = "#808080";
      else if (!std::isfinite(v) || (h.log_z && v <= 0)) fill = "#ffffff";
      else fill = color((zt(v) - zt(zlo)) / (zt(zhi) - zt(zlo)));
      const double x0 = sx(ex[ix]), x1 = sx(ex[ix + 1]), y0 = sy(ey[iy + 1]), y1 = sy(ey[iy]);
      s += "<rect x=\"" + num(x0) + "\" y=\"" + num(y0) + "\" width=\"" + num(x1 - x0 + 0.3) + "\" height=\"" +
           num(y1 - y0 + 0.3) + "\" fill=\"" + fill + "\"/>\n";
    }
  s += "</g>\n";
  if (h.phase_boundaries) {
    auto seg = [&](double xa, double ya, double xb, double yb) {
      xa = std::clamp(xa, sx.lo, sx.hi);
      xb = std::clamp(xb, sx.lo, sx.hi);
      ya = std::clamp(ya, sy.lo, sy.hi);
      yb = std::clamp(yb, sy.lo, sy.hi);
      s += "<line x1=\"" + num(sx(xa)) + "\" y1=\"" + num(sy(ya)) + "\" x2=\"" + num(sx(xb)) + "\" y2=\"" +
           num(sy(yb)) + "\" stroke=\"black\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
    };
    // x is alpha_p, y is alpha_f.
    if (sx.lo < 1 && sx.hi > 1 && sy.hi > 1) seg(1, std::max(1.0, sy.lo), 1, sy.hi);
    if (sy.lo < 1 && sy.hi > 1 && sx.hi > 1) seg(std::max(1.0, sx.lo), 1, sx.hi, 1);
    const double dlo = std::max(sx.lo, sy.lo), dhi = std::min({sx.hi, sy.hi, 1.0});
    if (dlo < dhi) seg(dlo, dlo, dhi, dhi);
  }
  s += axes(sx, sy, h.x_label, h.y_label);
  // Colour bar.
  const double bx = kWidth - kRight + 20, by0 = kTop, by1 = kHeight - kBottom;
  constexpr int kSteps = 64;
  for (int i = 0; i < kSteps; ++i) {
    const double y = by1 - (by1 - by0) * (i + 1) / kSteps;
    s += "<rect x=\"" + num(bx) + "\" y=\"" + num(y) + "\" width=\"16\" height=\"" + num((by1 - by0) / kSteps + 0.3) +
         "\" fill=\"" + color((i + 0.5) / kSteps) + "\"/>\n";
  }
  s += "<text x=\"" + num(bx + 22) + "\" y=\"" + num(by1) + "\">" + label_num(zlo) + "</text>\n";
  s += "<text x=\"" + num(bx + 22) + "\" y=\"" + num(by0 + 10) + "\">" + label_num(zhi) + "</text>\n";
  s += "<rect x=\"" + num(bx) + "\" y=\"" + num(by1 + 12) + "\" width=\"16\" height=\"10\" fill=\"#808080\"/>\n";
  s += "<text x=\"" + num(bx + 22) + "\" y=\"" + num(by1 + 21) + "\">inf</text>\n";
  return s + "</svg>\n";
}

}  // namespace rlf::sweep::svg
