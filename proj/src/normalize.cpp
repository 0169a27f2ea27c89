#include "stabhom/normalize.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "stabhom/sampling.hpp"

namespace stabhom {

namespace {

void newton_polish(const LyapunovPair& pair, Vec& x, double target) {
  const Vec g = pair.gradient(x);
  const double gg = g.squaredNorm();
  if (gg > 0.0) x += ((target - pair.V(x)) / gg) * g;
}

Vec reflect_last(Vec u) {
  u(u.size() - 1) = -u(u.size() - 1);
  return u;
}

}  // namespace

NormalizerData make_normalizer(LyapunovPair pair, int dim, double c, ClassKFn gamma,
                               std::optional<bool> orientation_flip) {
  if (dim < 1) throw Error(ErrorKind::DimensionMismatch, "normalizer dimension must be positive");
  if (!(c > 0.0)) throw Error(ErrorKind::InvalidArgument, "reference level must be positive");
  NormalizerData nd;
  nd.pair = std::move(pair);
  nd.dim = dim;
  nd.c = c;
  nd.gamma = std::move(gamma);
  check_star_shaped(nd);
  if (orientation_flip) {
    nd.orientation_flip = *orientation_flip;
  } else {
    const Vec ref = level_point(nd, Vec::Unit(dim, 0));
    const VectorMap T = [nd](const Vec& x) { return build_T(nd, x); };
    nd.orientation_flip = orientation_sign(T, ref) < 0;
  }
  return nd;
}

void check_star_shaped(const NormalizerData& nd, int directions) {
  constexpr int kRadii = 400;
  const double r_lo = 1e-6;
  const double log_span = std::log(nd.r_max / r_lo);
  for (const Vec& u : sampling::directions(nd.dim, directions)) {
    int crossings = 0;
    double prev = nd.pair.V(r_lo * u) - nd.c;
    for (int k = 1; k < kRadii; ++k) {
      const double r = r_lo * std::exp(log_span * k / (kRadii - 1));
      const double cur = nd.pair.V(r * u) - nd.c;
      if ((prev < 0.0) != (cur < 0.0)) ++crossings;
      prev = cur;
    }
    if (crossings != 1)
      throw Error(ErrorKind::StarShapeViolated,
                  "ray crosses the reference level set " + std::to_string(crossings) + " times");
  }
}

Vec psi_flow(const LyapunovPair& pair, const Vec& x, double tau, const IntegratorConfig& cfg) {
  if (tau == 0.0) return x;
  if (x.norm() == 0.0) throw Error(ErrorKind::InvalidArgument, "psi flow is undefined at the origin");
  if (!(pair.V(x) + tau > 0.0))
    throw Error(ErrorKind::InvalidArgument, "psi flow would reach the minimum of V");
  const double dir = tau > 0.0 ? 1.0 : -1.0;
  const TimeRhs rhs = [&pair, dir](double, const Vec& z) -> Vec {
    const Vec g = pair.gradient(z);
    const double gg = g.squaredNorm();
    if (!(std::sqrt(gg) >= 1e-10))
      throw Error(ErrorKind::GradientVanished, "grad V vanishes away from the origin");
    return (dir / gg) * g;
  };
  return solve_ode(rhs, x, 0.0, std::abs(tau), cfg).final_state();
}

Vec project_to_level(const NormalizerData& nd, const Vec& x) {
  Vec y = psi_flow(nd.pair, x, nd.c - nd.pair.V(x), nd.cfg);
  newton_polish(nd.pair, y, nd.c);
  return y;
}

Vec level_point(const NormalizerData& nd, const Vec& u_in) {
  const Vec u = u_in / u_in.norm();
  auto f = [&](double r) { return nd.pair.V(r * u) - nd.c; };
  double lo = 0.0, hi = 1.0;
  while (f(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 2.0 * nd.r_max)
      throw Error(ErrorKind::StarShapeViolated, "level set not reached along the ray");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi) * u;
}

Vec sphere_map(const NormalizerData& nd, const Vec& x) {
  const Vec z = project_to_level(nd, x);
  const Vec q = z / z.norm();
  return nd.orientation_flip ? reflect_last(q) : q;
}

Vec build_T(const NormalizerData& nd, const Vec& x) {
  if (x.size() != nd.dim) throw Error(ErrorKind::DimensionMismatch, "build_T dimension");
  if (x.norm() == 0.0) return Vec::Zero(nd.dim);
  return nd.gamma.inv(nd.pair.V(x)) * sphere_map(nd, x);
}

Vec invert_T(const NormalizerData& nd, const Vec& y) {
  if (y.size() != nd.dim) throw Error(ErrorKind::DimensionMismatch, "invert_T dimension");
  const double r = y.norm();
  if (r == 0.0) return Vec::Zero(nd.dim);
  Vec u = y / r;
  if (nd.orientation_flip) u = reflect_last(u);
  const double target = nd.gamma(r);
  Vec x = psi_flow(nd.pair, level_point(nd, u), target - nd.c, nd.cfg);
  newton_polish(nd.pair, x, target);
  return x;
}

int orientation_sign(const VectorMap& map, const Vec& x) {
  const Eigen::Index n = x.size();
  const double h = 1e-5 * std::max(1.0, x.norm());
  Mat J(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Vec e = Vec::Unit(n, j) * h;
    J.col(j) = (map(x + e) - map(x - e)) / (2.0 * h);
  }
  const double det = J.determinant();
  if (!(std::abs(det) >= 1e-10))
    throw Error(ErrorKind::DegenerateJacobian, "Jacobian determinant is (numerically) zero");
  return det > 0.0 ? 1 : -1;
}

Vec conjugated_field(const NormalizerData& nd, const Vec& y) {
  if (y.norm() == 0.0) return Vec::Zero(nd.dim);
  const Vec x = invert_T(nd, y);
  const Vec g = nd.pair.gradient(x);
  const double gn = g.norm();
  if (!(gn >= 1e-10)) throw Error(ErrorKind::GradientVanished, "grad V vanishes at T^{-1}(y)");
  const Vec dir = g / gn;
  const double h = 1e-5 * std::max(1.0, x.norm());
  const Vec dT = (build_T(nd, x + h * dir) - build_T(nd, x - h * dir)) / (2.0 * h);
  return -gn * dT;
}

FieldDescription conjugated_field_description(const NormalizerData& nd) {
  return make_field("conjugated[" + nd.pair.label + "]", nd.dim,
                    [nd](const Vec& y) { return conjugated_field(nd, y); },
                    Regularity::LipschitzOffOrigin);
}

double transported_decrement(const NormalizerData& nd, const Vec& y) {
  return nd.pair.gradient(invert_T(nd, y)).squaredNorm();
}

LyapunovPair gamma_pair(const NormalizerData& nd) {
  LyapunovPair p;
  p.label = "gamma(|y|)";
  p.V = [g = nd.gamma](const Vec& y) { return g(y.norm()); };
  p.gradV = [g = nd.gamma](const Vec& y) -> Vec {
    const double r = y.norm();
    if (r == 0.0) return Vec::Zero(y.size());
    return (g.deriv(r) / r) * y;
  };
  p.W = [nd](const Vec& y) { return nd.decrease_fraction * transported_decrement(nd, y); };
  return p;
}

LyapunovPair canonical_pair(const NormalizerData& nd) {
  LyapunovPair p;
  p.label = "|y|^2/2";
  p.V = [](const Vec& y) { return 0.5 * y.squaredNorm(); };
  p.gradV = [](const Vec& y) -> Vec { return y; };
  p.W = [nd](const Vec& y) {
    const double r = y.norm();
    if (r == 0.0) return 0.0;
    const double a = r / nd.gamma.deriv(r);
    return a * nd.decrease_fraction * transported_decrement(nd, y);
  };
  return p;
}

void write_warp_grid(const NormalizerData& nd, double extent, int per_axis, std::ostream& out) {
  if (nd.dim > 2) throw Error(ErrorKind::UnsupportedDimension, "warp grid supports n <= 2");
  if (per_axis < 2) throw Error(ErrorKind::InvalidArgument, "warp grid needs >= 2 points per axis");
  auto coord = [&](int k) { return -extent + 2.0 * extent * k / (per_axis - 1); };
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out << buf;
  };
  if (nd.dim == 1) {
    out << "x1,T1\n";
    for (int i = 0; i < per_axis; ++i) {
      const Vec x = Vec::Constant(1, coord(i));
      put(x(0));
      out << ',';
      put(build_T(nd, x)(0));
      out << '\n';
    }
    return;
  }
  out << "x1,x2,T1,T2\n";
  for (int i = 0; i < per_axis; ++i)
    for (int j = 0; j < per_axis; ++j) {
      Vec x(2);
      x << coord(i), coord(j);
      const Vec t = build_T(nd, x);
      put(x(0)); out << ','; put(x(1)); out << ','; put(t(0)); out << ','; put(t(1)); out << '\n';
    }
}

}  // namespace stabhom
