#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <tuple>

#include "stabhom/cli.hpp"
#include "stabhom/sampling.hpp"
#include "stabhom/sphere.hpp"

namespace stabhom::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kSize = 480.0;
constexpr double kMargin = 30.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '"') out += "&quot;";
    else out += c;
  }
  return out;
}

std::string header(const std::string& title) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kSize) + "\" height=\"" +
                  num(kSize) + "\" viewBox=\"0 0 " + num(kSize) + " " + num(kSize) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kSize / 2) + "\" y=\"18\" font-family=\"sans-serif\" font-size=\"13\" "
       "text-anchor=\"middle\">" + escape(title) + "</text>\n";
  return s;
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const char* stroke, double width) {
  std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" stroke-width=\"" + num(width) +
                  "\" points=\"";
  for (std::size_t i = 0; i < pts.size(); ++i) s += (i ? " " : "") + num(pts[i].first) + "," + num(pts[i].second);
  return s + "\"/>\n";
}

// Triangle at the end of a polyline pointing along its last segment.
std::string arrowhead(const std::vector<std::pair<double, double>>& pts, const char* fill) {
  if (pts.size() < 2) return "";
  const auto [x1, y1] = pts[pts.size() - 2];
  const auto [x2, y2] = pts.back();
  const double dx = x2 - x1, dy = y2 - y1, len = std::hypot(dx, dy);
  if (len == 0.0) return "";
  const double ux = dx / len, uy = dy / len, a = 5.0;
  const double bx = x2 - a * ux, by = y2 - a * uy;
  return "<polygon fill=\"" + std::string(fill) + "\" points=\"" + num(x2) + "," + num(y2) + " " +
         num(bx - 0.5 * a * uy) + "," + num(by + 0.5 * a * ux) + " " + num(bx + 0.5 * a * uy) + "," +
         num(by - 0.5 * a * ux) + "\"/>\n";
}

// RK4 on the unit-speed field, stopping at rest points, singular evaluations or the box edge.
std::vector<Vec> streamline(const FieldDescription& field, Vec x, double arc, double h, double box) {
  const auto unit = [&](const Vec& y) -> Vec {
    const Vec v = field.evaluator(y);
    const double n = v.norm();
    if (!(n > 1e-12) || !std::isfinite(n)) return Vec();
    return v / n;
  };
  std::vector<Vec> pts{x};
  for (double travelled = 0.0; travelled < arc; travelled += h) {
    try {
      const Vec k1 = unit(x);
      if (k1.size() == 0) break;
      const Vec k2 = unit(x + 0.5 * h * k1);
      if (k2.size() == 0) break;
      const Vec k3 = unit(x + 0.5 * h * k2);
      if (k3.size() == 0) break;
      const Vec k4 = unit(x + h * k3);
      if (k4.size() == 0) break;
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const Error&) {
      break;
    }
    pts.push_back(x);
    if (x.cwiseAbs().maxCoeff() > box) break;
  }
  return pts;
}

std::vector<Vec> seeds(const FrameStyle& style, double extent) {
  sampling::SplitMix64 rng(style.seed);
  std::vector<Vec> out;
  for (int i = 0; i < style.streamlines; ++i) {
    Vec x(2);
    x << rng.uniform(-extent, extent), rng.uniform(-extent, extent);
    out.push_back(x);
  }
  return out;
}

std::string frame_title(const HomotopyPath& path, double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s = %.4f", s);
  return path.name + "   " + buf;
}

}  // namespace

std::string render_streamlines_svg(const FieldDescription& field, const std::string& title, const FrameStyle& style) {
  if (field.dim != 2) throw Error(ErrorKind::UnsupportedDimension, "streamlines need a planar field");
  const double L = style.extent;
  const double scale = (kSize - 2 * kMargin) / (2 * L);
  const auto to_px = [&](const Vec& x) {
    return std::pair<double, double>{kSize / 2 + scale * x(0), kSize / 2 - scale * x(1)};
  };
  std::string s = header(title);
  s += "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(kSize - 2 * kMargin) +
       "\" height=\"" + num(kSize - 2 * kMargin) + "\" fill=\"none\" stroke=\"#bbbbbb\"/>\n";
  for (const Vec& seed : seeds(style, L)) {
    std::vector<std::pair<double, double>> px;
    for (const Vec& p : streamline(field, seed, 0.6 * L, L / 200.0, L)) px.push_back(to_px(p));
    s += polyline(px, "#1f5fa8", 1.0);
    s += arrowhead(px, "#1f5fa8");
  }
  const auto eq = to_px(field.eq());
  s += "<circle cx=\"" + num(eq.first) + "\" cy=\"" + num(eq.second) + "\" r=\"3\" fill=\"#c0392b\"/>\n";
  return s + "</svg>\n";
}

std::string render_graph_svg(const std::function<double(double)>& g, const std::string& title, const FrameStyle& style) {
  const double L = style.graph_extent;
  const int n = 801;
  std::vector<double> xs(n), ys(n);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int i = 0; i < n; ++i) {
    xs[i] = -L + 2 * L * i / (n - 1);
    ys[i] = g(xs[i]);
    lo = std::min(lo, ys[i]);
    hi = std::max(hi, ys[i]);
  }
  if (!(hi > lo)) hi = lo + 1.0;
  const double w = kSize - 2 * kMargin;
  const auto to_px = [&](double x, double y) {
    return std::pair<double, double>{kMargin + w * (x + L) / (2 * L), kSize - kMargin - w * (y - lo) / (hi - lo)};
  };
  std::string s = header(title);
  const auto x_axis = std::clamp(0.0, lo, hi);
  s += polyline({to_px(-L, x_axis), to_px(L, x_axis)}, "#999999", 0.8);
  s += polyline({to_px(0, lo), to_px(0, hi)}, "#999999", 0.8);
  std::vector<std::pair<double, double>> px;
  for (int i = 0; i < n; ++i) px.push_back(to_px(xs[i], ys[i]));
  s += polyline(px, "#1f5fa8", 1.5);
  return s + "</svg>\n";
}

std::string render_sphere_svg(const FieldDescription& chart_field, const std::string& title, const FrameStyle& style) {
  if (chart_field.dim != 2) throw Error(ErrorKind::UnsupportedDimension, "sphere frames need a chart field");
  // Camera tilted so that the South Pole faces the viewer.
  const double tilt = 2.0;
  const double c = std::cos(tilt), sn = std::sin(tilt);
  const double R = (kSize - 2 * kMargin) / 2;
  const auto view = [&](const Vec& p) {
    const double y = c * p(1) - sn * p(2);
    const double depth = sn * p(1) + c * p(2);
    return std::make_tuple(kSize / 2 + R * p(0), kSize / 2 - R * y, depth);
  };
  std::string s = header(title);
  s += "<circle cx=\"" + num(kSize / 2) + "\" cy=\"" + num(kSize / 2) + "\" r=\"" + num(R) +
       "\" fill=\"#f4f6fa\" stroke=\"#888888\"/>\n";
  for (const Vec& seed : seeds(style, style.extent)) {
    std::vector<std::pair<double, double>> run;
    const auto flush = [&] {
      if (run.size() > 1) s += polyline(run, "#1f5fa8", 1.0) + arrowhead(run, "#1f5fa8");
      run.clear();
    };
    for (const Vec& x : streamline(chart_field, seed, 0.6 * style.extent, style.extent / 200.0, 50.0)) {
      const auto [u, v, depth] = view(stereo_inv(x));
      // Points on the far hemisphere are hidden.
      if (depth < 0.0) {
        flush();
        continue;
      }
      run.emplace_back(u, v);
    }
    flush();
  }
  const auto [su, sv, sd] = view(south_pole());
  if (sd >= 0.0) s += "<circle cx=\"" + num(su) + "\" cy=\"" + num(sv) + "\" r=\"3\" fill=\"#c0392b\"/>\n";
  return s + "</svg>\n";
}

std::vector<fs::path> export_frames(const HomotopyPath& path, bool on_sphere, const PotentialFn& potential, int K,
                                    const fs::path& dir, const FrameStyle& style) {
  if (K < 1) throw Error(ErrorKind::InvalidArgument, "need at least one frame");
  if (path.dim != 1 && path.dim != 2)
    throw Error(ErrorKind::UnsupportedDimension,
                "frames exist for scalar and planar fields only, got dimension " + std::to_string(path.dim));
  if (on_sphere && path.dim != 2) throw Error(ErrorKind::UnsupportedDimension, "sphere frames need a chart path");
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (int k = 0; k < K; ++k) {
    const double s = K == 1 ? 0.0 : static_cast<double>(k) / (K - 1);
    const std::string title = frame_title(path, s);
    std::string svg;
    if (path.dim == 1) {
      if (potential) {
        svg = render_graph_svg([&](double x) { return potential(s, x); }, title, style);
      } else {
        const FieldDescription f = path.field_at(s);
        svg = render_graph_svg([&](double x) { return f.evaluator(Vec::Constant(1, x))(0); }, title, style);
      }
    } else if (on_sphere) {
      svg = render_sphere_svg(path.field_at(s), title, style);
    } else {
      svg = render_streamlines_svg(path.field_at(s), title, style);
    }
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03d.svg", k);
    const fs::path file = dir / name;
    std::ofstream os(file, std::ios::binary);
    if (!os) throw Error(ErrorKind::InvalidArgument, "cannot write " + file.string());
    os << svg;
    written.push_back(file);
  }
  return written;
}

}  // namespace stabhom::cli
