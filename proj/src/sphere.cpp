#include "stabhom/sphere.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "stabhom/homotopies.hpp"

namespace stabhom {

namespace {

constexpr double kPoleCap = 1e-6;

void require_sphere_point(const Vec& p) {
  if (p.size() != 3) throw Error(ErrorKind::DimensionMismatch, "sphere points live in R^3");
}

// Chart image of a point of R^3 near the sphere (the formula extends off the sphere).
Vec chart(const Vec& p) {
  const double denom = 1.0 - p(2);
  if (!(std::abs(denom) > 0.0)) throw Error(ErrorKind::AtProjectionPole, "point is the North Pole");
  Vec x(2);
  x << p(0) / denom, p(1) / denom;
  return x;
}

TimeRhs sphere_rhs(const FieldDescription& field) {
  return [field](double, const Vec& z) { return pushforward(field, z / z.norm()); };
}

SolverHooks sphere_hooks() {
  SolverHooks hooks;
  hooks.project = [](Vec& z) { z /= z.norm(); };
  hooks.guard = [](double, const Vec& z) {
    if ((z - north_pole()).norm() < kPoleCap)
      throw Error(ErrorKind::NearProjectionPole, "trajectory entered the cap around the North Pole");
  };
  return hooks;
}

// The planar field seen through the chart: x -> D(stereo_fwd)(p) v(p), p = stereo_inv(x).
FieldDescription pulled_back(const FieldDescription& field) {
  return make_field(field.name + " (sphere, chart view)", 2, [field](const Vec& x) -> Vec {
    const Vec p = stereo_inv(x);
    const Vec v = pushforward(field, p);
    const double vn = v.norm();
    if (vn == 0.0) return Vec::Zero(2);
    const Vec u = v / vn;
    const double h = 1e-6;
    return vn * (chart(p + h * u) - chart(p - h * u)) / (2.0 * h);
  });
}

}  // namespace

Vec north_pole() { return Vec::Unit(3, 2); }
Vec south_pole() { return -Vec::Unit(3, 2); }

Vec stereo_fwd(const Vec& p) {
  require_sphere_point(p);
  if ((p - north_pole()).norm() == 0.0)
    throw Error(ErrorKind::AtProjectionPole, "stereographic projection is undefined at the North Pole");
  return chart(p);
}

Vec stereo_inv(const Vec& x) {
  if (x.size() != 2) throw Error(ErrorKind::DimensionMismatch, "chart points live in R^2");
  const double q = x.squaredNorm();
  Vec p(3);
  p << 2.0 * x(0), 2.0 * x(1), q - 1.0;
  return p / (q + 1.0);
}

Mat stereo_inv_jacobian(const Vec& x) {
  const double q = x.squaredNorm();
  const double a = 1.0 + q;
  Mat J(3, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) J(i, j) = (i == j ? 2.0 / a : 0.0) - 4.0 * x(i) * x(j) / (a * a);
  for (int j = 0; j < 2; ++j) J(2, j) = 4.0 * x(j) / (a * a);
  return J;
}

Vec pushforward(const FieldDescription& field, const Vec& p) {
  if (field.dim != 2) throw Error(ErrorKind::DimensionMismatch, "pushforward needs a planar field");
  const Vec x = stereo_fwd(p);
  return stereo_inv_jacobian(x) * field.evaluator(x);
}

Trajectory simulate_on_sphere(const FieldDescription& field2d, const Vec& p0, double t_end,
                              const IntegratorConfig& cfg) {
  require_sphere_point(p0);
  if (std::abs(p0.norm() - 1.0) > 1e-10) throw Error(ErrorKind::InvalidArgument, "p0 is not a unit vector");
  if ((p0 - north_pole()).norm() < kPoleCap)
    throw Error(ErrorKind::NearProjectionPole, "initial point lies in the cap around the North Pole");
  return solve_ode(sphere_rhs(field2d), p0, 0.0, t_end, cfg, sphere_hooks());
}

Trajectory simulate_on_sphere_at(const FieldDescription& field2d, const Vec& p0,
                                 const std::vector<double>& times, const IntegratorConfig& cfg) {
  require_sphere_point(p0);
  if (times.empty()) throw Error(ErrorKind::InvalidArgument, "no output times");
  if ((p0 - north_pole()).norm() < kPoleCap)
    throw Error(ErrorKind::NearProjectionPole, "initial point lies in the cap around the North Pole");
  SolverHooks hooks = sphere_hooks();
  hooks.output_times = times;
  return solve_ode(sphere_rhs(field2d), p0, 0.0, times.back(), cfg, hooks);
}

FieldDescription sphere_example_X() {
  return make_field("ex3_7_X", 2, [](const Vec& x) {
    Vec v(2);
    v << -0.1 * x(0) - x(1), x(0) - 0.1 * x(1);
    return v;
  });
}

FieldDescription sphere_example_Y() {
  return make_field("ex3_7_Y", 2, [](const Vec& x) {
    Vec v(2);
    v << -x(0) - x(0) * x(1) * x(1), -x(1) + x(0) * x(0) * x(1);
    return v;
  });
}

HomotopyPath sphere_chart_path() {
  const ScalarMap V = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  const VectorMap gradV = [](const Vec& x) -> Vec { return x; };
  const FieldDescription X = sphere_example_X(), Y = sphere_example_Y();
  const auto to_canonical = straight_line(X, half_decrement_pair("|x|^2/2", V, gradV, X.evaluator));
  const auto from_canonical =
      reverse(straight_line(Y, half_decrement_pair("|x|^2/2", V, gradV, Y.evaluator)));
  HomotopyPath path = concatenate({to_canonical, from_canonical});
  path.name = "ex3_7 chart path X -> -x -> Y";
  path.endpoints_label = {"ex3_7_X", "ex3_7_Y"};
  return path;
}

Certificate check_sphere_path(const HomotopyPath& chart_path, const std::vector<double>& s_grid,
                              Annulus annulus, int N) {
  if (chart_path.dim != 2) throw Error(ErrorKind::DimensionMismatch, "sphere paths are planar in the chart");
  HomotopyPath pulled = chart_path;
  pulled.name = chart_path.name + " (pushed to the sphere)";
  pulled.field_at = [chart_path](double s) { return pulled_back(chart_path.field_at(s)); };
  return check_path(pulled, s_grid, annulus, N);
}

void write_sphere_csv(const Trajectory& traj, std::ostream& out) {
  out << "t,p1,p2,p3\n";
  char buf[128];
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    const Vec& p = traj.states[k];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", traj.times[k], p(0), p(1), p(2));
    out << buf;
  }
}

}  // namespace stabhom
