#include "stabhom/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stabhom/sampling.hpp"

namespace stabhom {

const char* to_string(Regularity r) {
  switch (r) {
    case Regularity::Smooth: return "Smooth";
    case Regularity::LipschitzOffOrigin: return "LipschitzOffOrigin";
    case Regularity::SetValuedAtOrigin: return "SetValuedAtOrigin";
  }
  return "Unknown";
}

Vec FieldDescription::eq() const {
  if (equilibrium.size() == dim) return equilibrium;
  return Vec::Zero(dim);
}

FieldDescription make_field(std::string name, int dim, VectorMap evaluator, Regularity regularity,
                            std::vector<double> discontinuities) {
  if (dim < 1) throw Error(ErrorKind::DimensionMismatch, "field dimension must be positive");
  FieldDescription f;
  f.name = std::move(name);
  f.dim = dim;
  f.evaluator = std::move(evaluator);
  f.regularity = regularity;
  f.equilibrium = Vec::Zero(dim);
  f.discontinuities = std::move(discontinuities);
  return f;
}

bool equilibrium_is_rest_point(const FieldDescription& field) {
  if (field.regularity == Regularity::SetValuedAtOrigin) return true;
  return field.evaluator(field.eq()).norm() <= 1e-12;
}

SetValuedSample single_valued_sample(const FieldDescription& field, const Vec& x) {
  return SetValuedSample{x, {eval_field(field, x)}};
}

double ClassKFn::deriv(double r) const {
  if (derivative) return derivative(r);
  const double h = 1e-6 * std::max(1.0, r);
  if (r < h) return (forward(r + h) - forward(r)) / h;
  return (forward(r + h) - forward(r - h)) / (2.0 * h);
}

double ClassKFn::inv(double y) const {
  if (inverse) return inverse(y);
  return classk_inverse(*this, y, 1e-13 * std::max(1.0, y));
}

namespace classk {

ClassKFn power(double p, double coeff) {
  if (!(p > 0.0) || !(coeff > 0.0))
    throw Error(ErrorKind::InvalidArgument, "power gauge needs positive exponent and coefficient");
  ClassKFn g;
  std::ostringstream label;
  label << coeff << "*r^" << p;
  g.label = label.str();
  g.forward = [p, coeff](double r) { return coeff * std::pow(r, p); };
  g.derivative = [p, coeff](double r) {
    if (r == 0.0 && p < 1.0) return std::numeric_limits<double>::infinity();
    return coeff * p * std::pow(r, p - 1.0);
  };
  g.inverse = [p, coeff](double y) { return std::pow(y / coeff, 1.0 / p); };
  g.is_kinfty = true;
  return g;
}

ClassKFn piecewise_linear(std::vector<double> r, std::vector<double> values, std::string label) {
  if (r.empty() || r.size() != values.size())
    throw Error(ErrorKind::InvalidArgument, "piecewise_linear needs matching non-empty nodes");
  r.insert(r.begin(), 0.0);
  values.insert(values.begin(), 0.0);
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (!(r[i] > r[i - 1]) || !(values[i] > values[i - 1]))
      throw Error(ErrorKind::NotInvertible, "piecewise_linear nodes must be strictly increasing");
  }
  auto eval = [](const std::vector<double>& xs, const std::vector<double>& ys, double x) {
    if (x <= 0.0) return 0.0;
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    if (hi >= xs.size()) hi = xs.size() - 1;
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return ys[lo] + w * (ys[hi] - ys[lo]);
  };
  ClassKFn g;
  g.label = std::move(label);
  g.forward = [=](double x) { return eval(r, values, x); };
  g.inverse = [=](double y) { return eval(values, r, y); };
  g.derivative = [=](double x) {
    auto it = std::upper_bound(r.begin(), r.end(), std::max(x, 0.0));
    std::size_t hi = static_cast<std::size_t>(it - r.begin());
    if (hi >= r.size()) hi = r.size() - 1;
    return (values[hi] - values[hi - 1]) / (r[hi] - r[hi - 1]);
  };
  g.is_kinfty = true;
  return g;
}

ClassKFn scaled(const ClassKFn& g, double factor) {
  if (!(factor > 0.0)) throw Error(ErrorKind::InvalidArgument, "scale factor must be positive");
  ClassKFn s;
  s.label = std::to_string(factor) + "*(" + g.label + ")";
  s.forward = [g, factor](double r) { return factor * g.forward(r); };
  s.derivative = [g, factor](double r) { return factor * g.deriv(r); };
  s.inverse = [g, factor](double y) { return g.inv(y / factor); };
  s.is_kinfty = g.is_kinfty;
  return s;
}

}  // namespace classk

bool is_classk_on_grid(const ClassKFn& g, const std::vector<double>& grid) {
  if (std::abs(g(0.0)) > 1e-14) return false;
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  double prev = g(0.0);
  double prev_r = 0.0;
  for (double r : sorted) {
    if (r <= prev_r) continue;
    const double v = g(r);
    if (!std::isfinite(v) || !(v > prev)) return false;
    prev = v;
    prev_r = r;
  }
  return true;
}

bool kinfty_growth_check(const ClassKFn& g) {
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 6; ++k) {
    const double v = g(std::pow(10.0, k));
    if (!std::isfinite(v) || !(v > prev)) return false;
    prev = v;
  }
  return prev >= 2.0 * g(10.0);
}

Vec fd_gradient(const ScalarMap& V, const Vec& x) {
  const double h = 1e-5 * std::max(1.0, x.norm());
  Vec g(x.size());
  Vec xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    const double fp = V(xp);
    xp(i) = x(i) - h;
    const double fm = V(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vec LyapunovPair::gradient(const Vec& x) const {
  if (gradV) return gradV(x);
  return fd_gradient(V, x);
}

bool pair_positive_on_annulus(const LyapunovPair& pair, int dim, int samples, double rmin,
                              double rmax) {
  if (std::abs(pair.V(Vec::Zero(dim))) > 1e-14) return false;
  for (const Vec& x : sampling::annulus(dim, samples, rmin, rmax)) {
    if (!(pair.V(x) > 0.0) || !(pair.W(x) > 0.0)) return false;
  }
  return true;
}

bool sublevel_proxy_increasing(const LyapunovPair& pair, int dim, const std::vector<double>& radii,
                               int directions) {
  const auto dirs = sampling::directions(dim, directions);
  std::vector<double> sorted = radii;
  std::sort(sorted.begin(), sorted.end());
  double prev = -std::numeric_limits<double>::infinity();
  for (double R : sorted) {
    double inf = std::numeric_limits<double>::infinity();
    for (const Vec& u : dirs) inf = std::min(inf, pair.V(R * u));
    if (!(inf > prev)) return false;
    prev = inf;
  }
  return true;
}

Vec eval_field(const FieldDescription& field, const Vec& x) {
  if (x.size() != field.dim) {
    std::ostringstream msg;
    msg << "field '" << field.name << "' has dimension " << field.dim << ", got " << x.size();
    throw Error(ErrorKind::DimensionMismatch, msg.str());
  }
  if (field.regularity == Regularity::SetValuedAtOrigin && x == field.eq())
    throw Error(ErrorKind::UndefinedAtPoint,
                "field '" + field.name + "' is set-valued at its equilibrium");
  Vec v = field.evaluator(x);
  if (v.size() != field.dim)
    throw Error(ErrorKind::DimensionMismatch, "evaluator of '" + field.name + "' returned wrong size");
  return v;
}

SetValuedSample filippov_hull_1d(const FieldDescription& field, double x, double delta) {
  if (field.dim != 1) throw Error(ErrorKind::DimensionMismatch, "filippov_hull_1d needs n = 1");
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidArgument, "delta must be positive");
  constexpr int kGrid = 1001;
  std::vector<double> excluded = field.discontinuities;
  if (field.regularity == Regularity::SetValuedAtOrigin) excluded.push_back(field.eq()(0));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  Vec p(1);
  for (int i = 0; i < kGrid; ++i) {
    const double t = x - delta + 2.0 * delta * static_cast<double>(i) / (kGrid - 1);
    const bool skip = std::any_of(excluded.begin(), excluded.end(), [t](double d) {
      return std::abs(t - d) <= 1e-14 * std::max(1.0, std::abs(d));
    });
    if (skip) continue;
    p(0) = t;
    const double v = field.evaluator(p)(0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  SetValuedSample sample;
  sample.x = Vec::Constant(1, x);
  sample.vertices.push_back(Vec::Constant(1, lo));
  if (hi - lo > 1e-14 * std::max(1.0, std::abs(hi))) sample.vertices.push_back(Vec::Constant(1, hi));
  return sample;
}

double classk_inverse(const ClassKFn& g, double y, double tol) {
  if (!g.is_kinfty) throw Error(ErrorKind::NotInvertible, "gauge '" + g.label + "' is not K-infinity");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");
  if (!(y >= 0.0)) throw Error(ErrorKind::InvalidArgument, "class-K inverse needs y >= 0");
  if (y == 0.0) return 0.0;

  double lo = 0.0;
  double flo = g(0.0);
  double hi = 1.0;
  double fhi = g(hi);
  for (int k = 0; fhi < y; ++k) {
    if (k >= 60 || !std::isfinite(fhi) || fhi < flo)
      throw Error(ErrorKind::NotInvertible, "no bracket found for '" + g.label + "'");
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    fhi = g(hi);
  }
  if (!std::isfinite(fhi)) throw Error(ErrorKind::NotInvertible, "non-finite gauge value");

  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = g(mid);
    if (!std::isfinite(fm) || fm < flo || fm > fhi)
      throw Error(ErrorKind::NotInvertible, "monotonicity violated on bracket of '" + g.label + "'");
    if (std::abs(fm - y) <= tol && (hi - lo) <= tol * std::max(1.0, mid)) return mid;
    if (fm < y) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  const double r = 0.5 * (lo + hi);
  if (std::abs(g(r) - y) > tol)
    throw Error(ErrorKind::NotInvertible, "bisection stalled for '" + g.label + "'");
  return r;
}

double simpson(const RealFn& f, double a, double b, int panels) {
  if (panels < 2) panels = 2;
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

ClassKFn gamma_from_alpha(const ClassKFn& alpha, int quad_steps) {
  if (quad_steps < 64) throw Error(ErrorKind::InvalidArgument, "gamma_from_alpha needs >= 64 steps");
  auto h = [alpha, quad_steps](double r) {
    if (r <= 0.0) return 0.0;
    const double v = simpson(
        [&alpha](double t) {
          const double a = alpha(t);
          if (!std::isfinite(a))
            throw Error(ErrorKind::QuadratureFailure, "non-finite integrand in alpha");
          return a;
        },
        0.0, r, quad_steps);
    if (!std::isfinite(v)) throw Error(ErrorKind::QuadratureFailure, "non-finite h(r)");
    return v;
  };
  (void)h(1.0);  // surface quadrature failures at construction

  ClassKFn hfn;
  hfn.label = "int_0^r(" + alpha.label + ")";
  hfn.forward = h;
  hfn.is_kinfty = true;

  ClassKFn gamma;
  gamma.label = "inverse of " + hfn.label;
  gamma.forward = [hfn](double y) {
    return classk_inverse(hfn, y, 1e-13 * std::max(1.0, y));
  };
  gamma.derivative = [gamma_fwd = gamma.forward, alpha](double y) {
    return 1.0 / alpha(gamma_fwd(y));
  };
  gamma.inverse = h;
  gamma.is_kinfty = true;
  return gamma;
}

double gamma_capital(const ClassKFn& gamma, double r, int quad_steps) {
  if (!(r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "Gamma needs r >= 0");
  if (r == 0.0) return 0.0;
  // rho = r u^2 clusters nodes at the origin where 1/gamma' behaves like rho^{1/2}.
  auto integrand = [&gamma, r](double u) {
    if (u == 0.0) return 0.0;
    const double rho = r * u * u;
    const double v = 2.0 * r * u / gamma.deriv(rho);
    if (!std::isfinite(v)) throw Error(ErrorKind::QuadratureFailure, "non-finite 1/gamma'");
    return v;
  };
  return simpson(integrand, 0.0, 1.0, quad_steps);
}

ClassKFn gamma_capital_fn(const ClassKFn& gamma, int quad_steps) {
  (void)gamma_capital(gamma, 1.0, quad_steps);
  ClassKFn G;
  G.label = "Gamma[" + gamma.label + "]";
  G.forward = [gamma, quad_steps](double r) { return gamma_capital(gamma, r, quad_steps); };
  G.derivative = [gamma](double r) { return 1.0 / gamma.deriv(r); };
  G.is_kinfty = true;
  return G;
}

}  // namespace stabhom
