#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stabhom/error.hpp"

namespace stabhom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

using VectorMap = std::function<Vec(const Vec&)>;
using ScalarMap = std::function<double(const Vec&)>;
using RealFn = std::function<double(double)>;

enum class Regularity { Smooth, LipschitzOffOrigin, SetValuedAtOrigin };

[[nodiscard]] const char* to_string(Regularity r);

/// A vector field on R^n. Discontinuity points are declared, never detected,
/// and are only meaningful for n = 1.
struct FieldDescription {
  std::string name;
  int dim = 1;
  VectorMap evaluator;
  Regularity regularity = Regularity::Smooth;
  Vec equilibrium;  // empty means the origin
  std::vector<double> discontinuities;

  [[nodiscard]] Vec eq() const;
};

[[nodiscard]] FieldDescription make_field(std::string name, int dim, VectorMap evaluator,
                                          Regularity regularity = Regularity::Smooth,
                                          std::vector<double> discontinuities = {});

/// Checks evaluator(equilibrium) = 0 within 1e-12 unless the field is set-valued there.
[[nodiscard]] bool equilibrium_is_rest_point(const FieldDescription& field);

/// Sampled convex hull of a (possibly set-valued) field at a point.
struct SetValuedSample {
  Vec x;
  std::vector<Vec> vertices;
};

/// Single-vertex sample for a field that is single valued at x.
[[nodiscard]] SetValuedSample single_valued_sample(const FieldDescription& field, const Vec& x);

/// Class-K gauge. `derivative` and `inverse` are optional closed forms; when absent
/// finite differences and bisection are used.
struct ClassKFn {
  std::string label;
  RealFn forward;
  RealFn derivative;
  RealFn inverse;
  bool is_kinfty = true;

  double operator()(double r) const { return forward(r); }
  [[nodiscard]] double deriv(double r) const;
  [[nodiscard]] double inv(double y) const;
};

namespace classk {
/// r -> coeff * r^p.
[[nodiscard]] ClassKFn power(double p, double coeff = 1.0);
[[nodiscard]] inline ClassKFn sqrt_gauge() { return power(0.5); }
/// Piecewise-linear interpolant through (0,0) and the given nodes, extended linearly
/// with the last slope. Nodes must be strictly increasing in both coordinates.
[[nodiscard]] ClassKFn piecewise_linear(std::vector<double> r, std::vector<double> values,
                                        std::string label = "piecewise_linear");
[[nodiscard]] ClassKFn scaled(const ClassKFn& g, double factor);
}  // namespace classk

/// forward(0) = 0 and strictly increasing on the sampled grid.
[[nodiscard]] bool is_classk_on_grid(const ClassKFn& g, const std::vector<double>& grid);
/// forward(10^k), k = 1..6, strictly increasing and at least doubling from 10 to 10^6.
[[nodiscard]] bool kinfty_growth_check(const ClassKFn& g);

/// Candidate Lyapunov pair. An empty `gradV` falls back to central differences.
struct LyapunovPair {
  std::string label;
  ScalarMap V;
  VectorMap gradV;
  ScalarMap W;

  [[nodiscard]] Vec gradient(const Vec& x) const;
};

/// Central differences with step 1e-5 * max(1, |x|).
[[nodiscard]] Vec fd_gradient(const ScalarMap& V, const Vec& x);

/// V, W > 0 on quasi-random points of the annulus rmin <= |x| <= rmax, and V(0) = 0.
[[nodiscard]] bool pair_positive_on_annulus(const LyapunovPair& pair, int dim, int samples,
                                            double rmin, double rmax);
/// Sublevel compactness proxy: inf{V(x) : |x| = R} strictly increasing over radii.
[[nodiscard]] bool sublevel_proxy_increasing(const LyapunovPair& pair, int dim,
                                             const std::vector<double>& radii,
                                             int directions = 256);

[[nodiscard]] Vec eval_field(const FieldDescription& field, const Vec& x);

[[nodiscard]] SetValuedSample filippov_hull_1d(const FieldDescription& field, double x,
                                               double delta);

[[nodiscard]] double classk_inverse(const ClassKFn& g, double y, double tol);

/// gamma = h^{-1} with h(r) = int_0^r alpha by composite Simpson.
[[nodiscard]] ClassKFn gamma_from_alpha(const ClassKFn& alpha, int quad_steps);

/// Gamma(r) = int_0^r 1/gamma'(rho) drho on a mesh graded quadratically towards 0.
[[nodiscard]] double gamma_capital(const ClassKFn& gamma, double r, int quad_steps);
/// Gamma as a K-infinity gauge (inverse by bisection).
[[nodiscard]] ClassKFn gamma_capital_fn(const ClassKFn& gamma, int quad_steps);

/// Composite Simpson rule; `panels` is rounded up to an even number.
[[nodiscard]] double simpson(const RealFn& f, double a, double b, int panels);

}  // namespace stabhom
