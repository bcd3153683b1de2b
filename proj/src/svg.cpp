#include "nhmetal/svg.hpp"

#include <algorithm>
#include <limits>

#include <fmt/format.h>

namespace nhm::svg {

namespace {

constexpr int kMargin = 60;
constexpr int kColourbar = 70;

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

std::string header(const PlotSpec& s) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      s.width, s.height, s.width / 2, escape(s.title));
}

std::string hex(const std::array<int, 3>& c) { return fmt::format("#{:02x}{:02x}{:02x}", c[0], c[1], c[2]); }

std::string num(double v) { return fmt::format("{:.2f}", v); }

struct Frame {
  double x0, y0, w, h;  // pixel box
  double xlo, xhi, ylo, yhi;
  double px(double x) const { return x0 + (x - xlo) / (xhi - xlo) * w; }
  double py(double y) const { return y0 + h - (y - ylo) / (yhi - ylo) * h; }
};

std::string axes(const Frame& f, const PlotSpec& s) {
  std::string out = fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                                num(f.x0), num(f.y0), num(f.w), num(f.h));
  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    const double xv = f.xlo + t * (f.xhi - f.xlo), yv = f.ylo + t * (f.yhi - f.ylo);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", num(f.px(xv)),
                       num(f.y0 + f.h + 16), xv);
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", num(f.x0 - 6),
                       num(f.py(yv) + 4), yv);
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(f.x0 + f.w / 2),
                     num(f.y0 + f.h + 36), escape(s.xLabel));
  out += fmt::format("<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
                     num(f.y0 + f.h / 2), escape(s.yLabel));
  return out;
}

}  // namespace

std::array<int, 3> colour(const std::string& ramp, double t) {
  t = std::clamp(std::isfinite(t) ? t : 0.0, 0.0, 1.0);
  if (ramp == "diverging") {
    // blue - white - red
    const double a = t < 0.5 ? t / 0.5 : (1.0 - t) / 0.5;
    if (t < 0.5) return {static_cast<int>(59 + a * 196), static_cast<int>(76 + a * 179), static_cast<int>(192 + a * 63)};
    return {static_cast<int>(180 + a * 75), static_cast<int>(4 + a * 251), static_cast<int>(38 + a * 217)};
  }
  static const std::array<std::array<double, 3>, 5> stops{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  const double x = t * 4.0;
  const auto i = std::min<std::size_t>(3, static_cast<std::size_t>(x));
  const double u = x - static_cast<double>(i);
  std::array<int, 3> c{};
  for (std::size_t k = 0; k < 3; ++k) c[k] = static_cast<int>(std::lround(stops[i][k] + u * (stops[i + 1][k] - stops[i][k])));
  return c;
}

std::string heatmap(const PlotSpec& spec, const GridSpec& g, const std::vector<double>& values,
                    const std::vector<PolyCurve>& curves, const std::vector<Momentum>& points) {
  if (g.dim != 2) throw Error(Errc::DimensionMismatch, "heatmap needs a 2D grid");
  if (values.size() != g.size()) throw Error(Errc::DimensionMismatch, "heatmap values do not match the grid");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(hi > lo)) {
    lo = std::isfinite(lo) ? lo - 0.5 : 0.0;
    hi = lo + 1.0;
  }
  if (spec.ramp == "diverging") {
    const double m = std::max(std::abs(lo), std::abs(hi));
    lo = -m;
    hi = m;
  }
  const double side = std::min(spec.width - 2 * kMargin - kColourbar, spec.height - 2 * kMargin);
  Frame f{kMargin, kMargin - 10.0, side, side, g.lo[0], g.periodic[0] ? g.hi[0] : g.hi[0], g.lo[1], g.hi[1]};
  const int nx = g.n[0], ny = g.n[1];
  const double cw = f.w / nx, ch = f.h / ny;

  std::string out = header(spec);
  // Quantized colours, merged into horizontal runs.
  constexpr int levels = 64;
  auto level = [&](double v) {
    if (!std::isfinite(v)) return -1;
    return std::clamp(static_cast<int>((v - lo) / (hi - lo) * levels), 0, levels - 1);
  };
  for (int j = 0; j < ny; ++j) {
    int i = 0;
    while (i < nx) {
      const int lv = level(values[g.flat(i, j)]);
      int e = i + 1;
      while (e < nx && level(values[g.flat(e, j)]) == lv) ++e;
      const std::string fill = lv < 0 ? "#cccccc" : hex(colour(spec.ramp, (lv + 0.5) / levels));
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", num(f.x0 + i * cw),
                         num(f.y0 + f.h - (j + 1) * ch), num((e - i) * cw + 0.3), num(ch + 0.3), fill);
      i = e;
    }
  }
  for (const auto& c : curves) {
    // Fold into the zone and break the polyline where it wraps.
    std::string path;
    Momentum prev;
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      const Momentum k = c.points[i].canonical();
      const bool jump = i == 0 || std::abs(k[0] - prev[0]) > kPi || std::abs(k[1] - prev[1]) > kPi;
      path += fmt::format("{}{},{} ", jump ? "M" : "L", num(f.px(k[0])), num(f.py(k[1])));
      prev = k;
    }
    out += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"#e41a1c\" stroke-width=\"2\"/>\n", path);
  }
  for (const auto& p : points) {
    const Momentum k = p.canonical();
    out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#e41a1c\" stroke=\"black\"/>\n", num(f.px(k[0])),
                       num(f.py(k[1])));
  }
  out += axes(f, spec);
  // Colour bar.
  const double bx = f.x0 + f.w + 20, bw = 16;
  for (int s = 0; s < levels; ++s) {
    const double t = (s + 0.5) / levels;
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", num(bx),
                       num(f.y0 + f.h * (1.0 - (s + 1.0) / levels)), num(bw), num(f.h / levels + 0.3),
                       hex(colour(spec.ramp, t)));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\">{:.3g}</text>\n", num(bx + bw + 4), num(f.y0 + 10), hi);
  out += fmt::format("<text x=\"{}\" y=\"{}\">{:.3g}</text>\n", num(bx + bw + 4), num(f.y0 + f.h), lo);
  out += "</svg>\n";
  return out;
}

std::string section1d(const PlotSpec& spec, const std::vector<Series>& series) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) continue;
      const double e = s.err.empty() || !std::isfinite(s.err[i]) ? 0.0 : s.err[i];
      xlo = std::min(xlo, s.x[i]);
      xhi = std::max(xhi, s.x[i]);
      ylo = std::min(ylo, s.y[i] - e);
      yhi = std::max(yhi, s.y[i] + e);
    }
  }
  if (!(xhi > xlo)) {
    xlo = std::isfinite(xlo) ? xlo - 0.5 : 0.0;
    xhi = xlo + 1.0;
  }
  if (!(yhi > ylo)) {
    ylo = std::isfinite(ylo) ? ylo - 0.5 : 0.0;
    yhi = ylo + 1.0;
  }
  const double pad = 0.05 * (yhi - ylo);
  ylo -= pad;
  yhi += pad;
  Frame f{kMargin, kMargin - 10.0, spec.width - 2.0 * kMargin, spec.height - 2.0 * kMargin, xlo, xhi, ylo, yhi};
  std::string out = header(spec);
  if (ylo < 0.0 && yhi > 0.0)
    out += fmt::format("<line x1=\"{0}\" x2=\"{1}\" y1=\"{2}\" y2=\"{2}\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n",
                       num(f.x0), num(f.x0 + f.w), num(f.py(0.0)));
  for (std::size_t n = 0; n < series.size(); ++n) {
    const auto& s = series[n];
    std::string path;
    bool pen = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.y[i])) {
        pen = false;
        continue;
      }
      path += fmt::format("{}{},{} ", pen ? "L" : "M", num(f.px(s.x[i])), num(f.py(s.y[i])));
      pen = true;
      if (!s.err.empty() && std::isfinite(s.err[i]) && s.err[i] > 0.0)
        out += fmt::format("<line x1=\"{0}\" x2=\"{0}\" y1=\"{1}\" y2=\"{2}\" stroke=\"{3}\"/>\n", num(f.px(s.x[i])),
                           num(f.py(s.y[i] - s.err[i])), num(f.py(s.y[i] + s.err[i])), s.colour);
      out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{}\"/>\n", num(f.px(s.x[i])), num(f.py(s.y[i])),
                         s.colour);
    }
    out += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>\n", path, s.colour);
    out += fmt::format("<text x=\"{}\" y=\"{}\" fill=\"{}\">{}</text>\n", num(f.x0 + 10), num(f.y0 + 16 + 16.0 * n),
                       s.colour, escape(s.name));
  }
  out += axes(f, spec);
  out += "</svg>\n";
  return out;
}

std::string curves3d(const PlotSpec& spec, const std::vector<PolyCurve>& curves, const Vec3& view,
                     const std::vector<Momentum>& markers) {
  const Vec3 u = view.normalized();
  Vec3 e1 = std::abs(u[2]) < 0.9 ? Vec3::UnitZ().cross(u) : Vec3::UnitX().cross(u);
  e1.normalize();
  const Vec3 e2 = u.cross(e1);
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo, zlo = xlo, zhi = -xlo;
  auto scan = [&](const Vec3& p) {
    xlo = std::min(xlo, p.dot(e1));
    xhi = std::max(xhi, p.dot(e1));
    ylo = std::min(ylo, p.dot(e2));
    yhi = std::max(yhi, p.dot(e2));
    zlo = std::min(zlo, p.dot(u));
    zhi = std::max(zhi, p.dot(u));
  };
  for (const auto& c : curves)
    for (const auto& p : c.points) scan(p.vec());
  for (const auto& m : markers) scan(m.vec());
  if (!(xhi > xlo) || !(yhi > ylo)) {
    xlo = ylo = -kPi;
    xhi = yhi = kPi;
  }
  if (!(zhi > zlo)) zhi = zlo + 1.0;
  const double span = std::max(xhi - xlo, yhi - ylo) * 1.05;
  const double cx = 0.5 * (xlo + xhi), cy = 0.5 * (ylo + yhi);
  const double side = std::min(spec.width, spec.height) - 2.0 * kMargin;
  Frame f{(spec.width - side) / 2, kMargin - 10.0, side, side, cx - span / 2, cx + span / 2, cy - span / 2, cy + span / 2};

  static const char* palette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628"};
  struct Seg {
    double depth;
    std::string svg;
  };
  std::vector<Seg> segs;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    const auto& pts = curves[c].points;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const Vec3 a = pts[i].vec(), b = pts[i + 1].vec();
      const double depth = 0.5 * (a + b).dot(u);
      const double shade = (depth - zlo) / (zhi - zlo);
      segs.push_back({depth, fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"{}\" "
                                         "stroke-linecap=\"round\" opacity=\"{:.2f}\"/>\n",
                                         num(f.px(a.dot(e1))), num(f.py(a.dot(e2))), num(f.px(b.dot(e1))),
                                         num(f.py(b.dot(e2))), palette[c % 6], num(1.5 + 2.5 * shade), 0.45 + 0.55 * shade)});
    }
  }
  for (const auto& m : markers) {
    const Vec3 p = m.vec();
    segs.push_back({p.dot(u), fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"1.6\" fill=\"#555\" opacity=\"0.5\"/>\n",
                                          num(f.px(p.dot(e1))), num(f.py(p.dot(e2))))});
  }
  std::stable_sort(segs.begin(), segs.end(), [](const Seg& a, const Seg& b) { return a.depth < b.depth; });
  std::string out = header(spec);
  for (const auto& s : segs) out += s.svg;
  out += fmt::format("<text x=\"10\" y=\"{}\">view ({:.3f}, {:.3f}, {:.3f})</text>\n", spec.height - 10, u[0], u[1], u[2]);
  out += "</svg>\n";
  return out;
}

}  // namespace nhm::svg
