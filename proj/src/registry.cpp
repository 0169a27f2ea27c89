#include "stabhom/registry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "stabhom/homotopies.hpp"
#include "stabhom/index.hpp"
#include "stabhom/iss.hpp"
#include "stabhom/normalize.hpp"
#include "stabhom/sampling.hpp"
#include "stabhom/sphere.hpp"

namespace stabhom {

namespace examples {

namespace {
double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace

FieldDescription canonical(int n) {
  return make_field("canonical", n, [](const Vec& x) -> Vec { return -x; });
}

FieldDescription neg_sign() {
  return make_field("ex1_3_sign", 1, [](const Vec& x) { return Vec::Constant(1, -sgn(x(0))); },
                    Regularity::SetValuedAtOrigin, {0.0});
}

FieldDescription radial_sqrt() {
  return make_field(
      "ex1_4_radial", 2,
      [](const Vec& x) -> Vec {
        const double r = x.norm();
        if (r == 0.0) return Vec::Zero(x.size());
        return -x / (2.0 * std::pow(r, 1.5));
      },
      Regularity::LipschitzOffOrigin);
}

FieldDescription polynomial_x1() {
  return make_field("ex3_3_X1", 2, [](const Vec& x) {
    Vec v(2);
    v << -x(0) + x(0) * x(1), -x(1);
    return v;
  });
}

LyapunovPair log_pair() {
  return half_decrement_pair(
      "V1", [](const Vec& x) { return 0.5 * std::log1p(x(0) * x(0)) + 0.5 * x(1) * x(1); },
      [](const Vec& x) -> Vec {
        Vec g(2);
        g << x(0) / (1.0 + x(0) * x(0)), x(1);
        return g;
      },
      polynomial_x1().evaluator);
}

LyapunovPair quadratic() {
  return quadratic_pair([](const Vec& x) { return 0.5 * x.squaredNorm(); }, "Vq");
}

LyapunovPair sqrt_radial_pair() {
  LyapunovPair p;
  p.label = "sqrt|x|";
  p.V = [](const Vec& x) { return std::sqrt(x.norm()); };
  p.gradV = [](const Vec& x) -> Vec {
    const double r = x.norm();
    if (r == 0.0) return Vec::Zero(x.size());
    return x / (2.0 * std::pow(r, 1.5));
  };
  p.W = [g = p.gradV](const Vec& x) { return 0.5 * g(x).squaredNorm(); };
  return p;
}

}  // namespace examples

Certificate oracle_certificate(std::string property, const std::vector<std::pair<double, Vec>>& errors,
                               double tol) {
  Certificate c;
  c.property = std::move(property);
  c.sample_count = static_cast<int>(errors.size());
  c.tolerance = tol;
  c.worst_margin = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Vec>> failing;
  for (const auto& [err, x] : errors) {
    const double m = std::isfinite(err) ? err - tol : std::numeric_limits<double>::infinity();
    c.worst_margin = std::max(c.worst_margin, m);
    if (!(err <= tol)) failing.push_back({m, x});
  }
  std::stable_sort(failing.begin(), failing.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; i < failing.size() && i < 10; ++i) c.witnesses.push_back(failing[i].second);
  c.pass = failing.empty();
  return c;
}

namespace {

const Annulus kAnnulus{1e-2, 10.0};

Vec v2(double a, double b) {
  Vec x(2);
  x << a, b;
  return x;
}

std::string format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

Certificate combine(std::string property, const std::vector<Certificate>& parts) {
  Certificate c;
  c.property = std::move(property);
  c.worst_margin = -std::numeric_limits<double>::infinity();
  c.pass = true;
  for (const auto& p : parts) {
    c.sample_count += p.sample_count;
    c.worst_margin = std::max(c.worst_margin, p.worst_margin);
    c.tolerance = std::max(c.tolerance, p.tolerance);
    c.pass = c.pass && p.pass;
    for (const auto& w : p.witnesses)
      if (c.witnesses.size() < 10) c.witnesses.push_back(w);
  }
  return c;
}

std::string csv_of(const Trajectory& traj) {
  std::ostringstream os;
  write_csv(traj, os);
  return os.str();
}

std::string samples_of(const HomotopyPath& path, int steps, int points) {
  std::ostringstream os;
  const auto pts = sampling::annulus(path.dim, points, 0.1, 3.0);
  write_path_samples(path, uniform_grid(steps), pts, os);
  return os.str();
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
  return out;
}

FieldDescription sign_blend(double s) {
  return make_field(
      "blend", 1,
      [s](const Vec& x) {
        const double sg = x(0) > 0 ? 1.0 : (x(0) < 0 ? -1.0 : 0.0);
        return Vec::Constant(1, -(1.0 - s) * sg - s * x(0));
      },
      s < 1.0 ? Regularity::SetValuedAtOrigin : Regularity::Smooth,
      s < 1.0 ? std::vector<double>{0.0} : std::vector<double>{});
}

LyapunovPair sign_pair() {
  return half_decrement_pair(
      "x^2/2", [](const Vec& x) { return 0.5 * x.squaredNorm(); }, [](const Vec& x) -> Vec { return x; },
      examples::neg_sign().evaluator);
}

HomotopyPath ex3_3_path() {
  return concatenate({straight_line(examples::polynomial_x1(), examples::log_pair()),
                      gradient_interpolation(examples::log_pair(), examples::quadratic(), 2)});
}

HomotopyPath ex1_4_path() {
  return gradient_interpolation(examples::sqrt_radial_pair(), examples::quadratic(), 2);
}

// ---------------------------------------------------------------------------

Outcome run_canonical(const RunOptions& o) {
  Outcome out;
  const auto f = examples::canonical(2);
  out.checks.push_back({"decrease", check_decrease_grid(f, examples::quadratic(), kAnnulus, o.samples)});
  const auto traj = integrate(f, v2(1.0, 1.0), 10.0, o.cfg);
  out.checks.push_back({"trajectory decrease", check_traj_decrease(traj, examples::quadratic().V)});
  out.artifacts.push_back({"trajectory.csv", csv_of(traj)});
  return out;
}

Outcome run_ex1_1(const RunOptions& o) {
  Outcome out;
  const std::vector<std::pair<double, double>> spectra = {{0.0, -1.0}, {1.0, -1.0}, {0.5, 4.0}};
  std::vector<std::pair<double, Vec>> errs;
  for (const auto& [s, expect] : spectra)
    errs.push_back({std::abs(hurwitz_check({naive_linear_matrix(s)}).max_real_part - expect),
                    Vec::Constant(1, s)});
  out.checks.push_back({"spectral abscissa of A(0), A(1), A(1/2)",
                        oracle_certificate("max Re eig equals -1, -1, 4", errs, 1e-9)});
  const auto grid = uniform_grid(o.s_steps);
  out.checks.push_back({"patched path", check_path(patched_linear_path(), grid, kAnnulus, o.samples)});
  out.checks.push_back({"naive convex combination (negative control)",
                        check_path(naive_linear_path(), grid, kAnnulus, o.samples), false});
  out.artifacts.push_back({"path_samples.csv", samples_of(patched_linear_path(), o.s_steps, 8)});
  return out;
}

Outcome run_ex1_3(const RunOptions& o) {
  Outcome out;
  const auto times = linspace(0.0, 10.0, 201);
  std::vector<std::pair<double, Vec>> errs;
  for (double s : {0.0, 1e-6, 0.1, 0.5, 0.9, 1.0}) {
    const auto field = s == 0.0 ? examples::neg_sign() : sign_blend(s);
    for (int k = 0; k <= 20; ++k) {
      const double x0 = -5.0 + 0.5 * k;
      const auto traj = integrate_at(field, Vec::Constant(1, x0), times, o.cfg);
      double worst = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double ref = s == 0.0 ? closed_semiflow_sign(x0, times[i]) : closed_semiflow_blend(x0, times[i], s);
        worst = std::max(worst, std::abs(traj.states[i](0) - ref));
      }
      Vec tag(2);
      tag << s, x0;
      errs.push_back({worst, tag});
    }
  }
  out.checks.push_back({"integrator vs closed-form semiflows",
                        oracle_certificate("sup |x(t) - phi(t, x0; s)| over t in [0, 10]", errs, 1e-6)});
  std::vector<SetValuedSample> hulls;
  for (double x : linspace(-5.0, 5.0, 41)) hulls.push_back(filippov_hull_1d(examples::neg_sign(), x, 1e-6));
  out.checks.push_back({"strong pair on Filippov hulls", check_strong_pair(examples::neg_sign(), sign_pair(), hulls)});
  const auto path = straight_line(examples::neg_sign(), sign_pair());
  out.checks.push_back({"sign to canonical blend", check_path(path, uniform_grid(o.s_steps), kAnnulus, o.samples)});
  out.artifacts.push_back({"trajectory.csv", csv_of(integrate(examples::neg_sign(), Vec::Constant(1, 2.0), 4.0, o.cfg))});
  return out;
}

Outcome run_ex1_4(const RunOptions& o) {
  Outcome out;
  const auto gamma = classk::sqrt_gauge();
  const Vec x0 = v2(0.6, 0.8);
  const auto traj = integrate(examples::radial_sqrt(), x0, 2.0, o.cfg);
  const double expect = gamma_capital(gamma, 1.0, 256);
  const auto te = traj.event_time(EventTag::Extinction);
  out.checks.push_back({"extinction time",
                        oracle_certificate("|t_ext - Gamma(1)|",
                                           {{te ? std::abs(*te - expect) : std::numeric_limits<double>::infinity(), x0}},
                                           1e-3)});
  std::vector<std::pair<double, Vec>> errs;
  for (const Vec& start : {v2(1, 0), v2(0.6, 0.8), v2(-0.3, 0.4), v2(1.5, -2.0)}) {
    const double t_ext = gamma_capital(gamma, start.norm(), 256);
    std::vector<double> times;
    for (double t : linspace(0.0, 1.3, 27))
      if (t < t_ext) times.push_back(t);
    const auto tr = integrate_at(examples::radial_sqrt(), start, times, o.cfg);
    for (std::size_t i = 0; i < times.size(); ++i)
      errs.push_back({(tr.states[i] - closed_semiflow_radial(start, times[i], gamma)).norm(), start});
  }
  out.checks.push_back({"closed-form radial semiflow",
                        oracle_certificate("|x(t) - closed form| before extinction", errs, 1e-4)});
  out.checks.push_back({"radial gauge to canonical", check_path(ex1_4_path(), uniform_grid(o.s_steps), kAnnulus, o.samples)});
  out.notes.push_back("extinction_time: " + format("%.9f", te.value_or(-1.0)));
  out.artifacts.push_back({"trajectory.csv", csv_of(traj)});
  return out;
}

Outcome run_ex3_3(const RunOptions& o) {
  Outcome out;
  const auto path = ex3_3_path();
  out.checks.push_back({"concatenated path", check_path(path, uniform_grid(o.s_steps), kAnnulus, o.samples)});
  std::vector<Certificate> spot;
  const auto starts = sampling::annulus(2, 10, 0.5, 3.0);
  for (int k = 0; k < 10; ++k) {
    const double s = k / 9.0;
    const auto traj = extended_flow(path, s, starts[k], 10.0, o.cfg);
    spot.push_back(check_traj_decrease(traj, path.lyap_at(s).V));
  }
  out.checks.push_back({"spot trajectories", combine("V(.; s) decreasing along 10 frozen-s trajectories", spot)});
  std::vector<std::pair<double, Vec>> errs;
  const auto end = path.field_at(1.0);
  for (const Vec& x : sampling::annulus(2, 20, 0.1, 5.0)) errs.push_back({(end.evaluator(x) + x).norm(), x});
  out.checks.push_back({"endpoint is canonical", oracle_certificate("|H(1, x) + x|", errs, 1e-12)});
  out.artifacts.push_back({"path_samples.csv", samples_of(path, o.s_steps, 8)});
  std::ostringstream warp;
  write_warp_grid(make_normalizer(examples::log_pair(), 2), 3.0, 21, warp);
  out.artifacts.push_back({"warp_grid.csv", warp.str()});
  out.artifacts.push_back({"trajectory.csv", csv_of(integrate(examples::polynomial_x1(), v2(1.0, 1.0), 10.0, o.cfg))});
  return out;
}

Outcome run_ex3_4(const RunOptions& o) {
  Outcome out;
  std::vector<std::pair<double, Vec>> ident, id_end;
  for (double x : linspace(-10.0, 10.0, 1000)) {
    ident.push_back({std::abs(invex_function(x) - std::sqrt(std::abs(invex_family(0.0, x)))), Vec::Constant(1, x)});
    id_end.push_back({std::abs(invex_family(1.0, x) - x), Vec::Constant(1, x)});
  }
  out.checks.push_back({"v_i = sqrt|H_i(0, .)|", oracle_certificate("|v_i(x) - sqrt|H_i(0, x)||", ident, 1e-10)});
  out.checks.push_back({"H_i(1, .) = id", oracle_certificate("|H_i(1, x) - x|", id_end, 0.0)});
  std::vector<std::pair<double, Vec>> argmins;
  for (double s : uniform_grid(o.s_steps)) {
    double best = std::numeric_limits<double>::infinity(), arg = 0.0;
    for (double x : linspace(-10.0, 10.0, 4097)) {
      const double v = invex_potential(s, x);
      if (v < best) best = v, arg = x;
    }
    argmins.push_back({std::abs(arg), Vec::Constant(1, s)});
  }
  out.checks.push_back({"minimizer fixed at 0", oracle_certificate("|argmin P(s, .)| on a 4097-point grid", argmins, 0.0)});
  out.checks.push_back({"descent path", check_path(invex_descent_path(), uniform_grid(o.s_steps), kAnnulus, o.samples)});
  std::string counts = "derivative_sign_changes:";
  for (double s : {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0})
    counts += " " + std::to_string(derivative_sign_changes([s](double x) { return invex_potential(s, x); }, -10.0, 10.0, 4097));
  out.notes.push_back(counts);
  std::ostringstream csv;
  csv << "x,P0,P1/3,P2/3,P1\n";
  for (double x : linspace(-10.0, 10.0, 401)) {
    csv << format("%.12g", x);
    for (double s : {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}) csv << format(",%.12g", invex_potential(s, x));
    csv << '\n';
  }
  out.artifacts.push_back({"potentials.csv", csv.str()});
  return out;
}

Outcome run_ex3_7(const RunOptions& o, bool y_first) {
  Outcome out;
  const FieldDescription X = sphere_example_X(), Y = sphere_example_Y();
  const FieldDescription& start = y_first ? Y : X;
  std::vector<std::pair<double, Vec>> tangency;
  for (const Vec& x : sampling::annulus(2, 500, 1e-2, 50.0)) {
    const Vec p = stereo_inv(x);
    tangency.push_back({std::abs(pushforward(start, p).dot(p)), p});
  }
  out.checks.push_back({"pushforward tangency", oracle_certificate("|<v(p), p>|", tangency, 1e-9)});
  std::vector<std::pair<double, Vec>> conj;
  const auto times = linspace(0.25, 5.0, 20);
  for (const Vec& x0 : {v2(1.0, 0.0), v2(-0.7, 1.6), v2(2.5, 2.0)}) {
    const auto sph = simulate_on_sphere_at(start, stereo_inv(x0), times, o.cfg);
    const auto pl = integrate_at(start, x0, times, o.cfg);
    for (std::size_t i = 0; i < times.size(); ++i)
      conj.push_back({(stereo_fwd(sph.states[i]) - pl.states[i]).norm(), x0});
  }
  out.checks.push_back({"chart conjugacy", oracle_certificate("|stereo_fwd(p(t)) - x(t)| for t <= 5", conj, 1e-5)});
  Vec p0(3);
  p0 << 1.0, 0.0, 0.0;
  const auto traj = simulate_on_sphere(start, p0, 20.0, o.cfg);
  out.checks.push_back({"chart Lyapunov decrease on the sphere",
                        check_traj_decrease(traj, [](const Vec& p) { return 0.5 * stereo_fwd(p).squaredNorm(); },
                                            south_pole())});
  const auto path = y_first ? reverse(sphere_chart_path()) : sphere_chart_path();
  out.checks.push_back({"pushed-forward path", check_sphere_path(path, uniform_grid(o.s_steps), kAnnulus, o.samples)});
  out.notes.push_back("distance_to_south_pole_at_t20: " + format("%.9e", (traj.final_state() - south_pole()).norm()));
  std::ostringstream csv;
  write_sphere_csv(traj, csv);
  out.artifacts.push_back({"sphere_trajectory.csv", csv.str()});
  return out;
}

Outcome run_ex4_1(const RunOptions& o) {
  Outcome out;
  const auto sys = ex4_1_system();
  sampling::SplitMix64 rng(o.seed);
  std::vector<Certificate> parts;
  std::string csv;
  for (int k = 0; k < 10; ++k) {
    Vec x0(2);
    x0 << rng.uniform(-3, 3), rng.uniform(-3, 3);
    const double amp = rng.uniform(0, o.disturbance_amplitude);
    DisturbanceSignal d;
    if (o.disturbance_kind == "random_hold") {
      d = random_hold_signal(2, amp, o.disturbance_hold, 20.0, o.seed + 1 + k);
    } else if (o.disturbance_kind == "sinusoid") {
      d = sinusoid_signal(v2(amp, 0.5 * amp), v2(1.0 + k, 0.5 + k), v2(0.0, 1.0));
    } else if (o.disturbance_kind == "constant") {
      d = constant_signal(v2(amp, -0.5 * amp));
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown disturbance kind: " + o.disturbance_kind);
    }
    const auto traj = simulate_disturbed_uniform(sys, x0, d, 20.0, 0.01, o.cfg);
    parts.push_back(check_l2_gain(traj, d));
    if (k == 0) {
      std::ostringstream os;
      write_disturbed_csv(traj, d, os);
      csv = os.str();
    }
  }
  out.checks.push_back({"canonical L2 gain", combine("L2 gain over 10 seeded disturbances", parts)});
  const Mat R = ex4_1_R();
  const int sign = orientation_sign([R](const Vec& d) -> Vec { return R * d; }, v2(0.3, 0.8));
  out.checks.push_back({"disturbance map reverses orientation",
                        oracle_certificate("orientation_sign(R) = -1", {{sign == -1 ? 0.0 : 1.0, v2(0.3, 0.8)}}, 0.0)});
  out.artifacts.push_back({"disturbed.csv", csv});
  return out;
}

Outcome run_ex5_1(const RunOptions& o) {
  Outcome out;
  Mat S0 = Mat::Zero(2, 2);
  S0.diagonal() << 4.0, 1.0;
  const Mat S1 = Mat::Identity(2, 2);
  const auto g = gaussian_transport(S0, S1);
  Mat A = Mat::Zero(2, 2);
  A.diagonal() << 0.5, 1.0;
  std::vector<std::pair<double, Vec>> errs = {{(g.A - A).norm(), Vec::Zero(1)}};
  std::vector<std::pair<double, Vec>> spd;
  for (double s : uniform_grid(o.s_steps)) {
    Mat expect = Mat::Zero(2, 2);
    expect.diagonal() << (2 - s) * (2 - s), 1.0;
    errs.push_back({(g.sigma(s) - expect).norm(), Vec::Constant(1, s)});
    const double lo = Eigen::SelfAdjointEigenSolver<Mat>(g.sigma(s)).eigenvalues().minCoeff();
    spd.push_back({lo > 0.0 ? 0.0 : 1.0 - lo, Vec::Constant(1, s)});
  }
  out.checks.push_back({"transport map and covariance path", oracle_certificate("|A - diag(1/2, 1)|, |Sigma(s) - diag((2-s)^2, 1)|", errs, 1e-10)});
  out.checks.push_back({"covariances stay SPD", oracle_certificate("min eig Sigma(s) > 0", spd, 0.0)});
  const auto path = gaussian_ot_path(S0, S1);
  out.checks.push_back({"Gaussian path", check_path(path, uniform_grid(o.s_steps), kAnnulus, o.samples)});
  out.artifacts.push_back({"path_samples.csv", samples_of(path, o.s_steps, 8)});
  return out;
}

Outcome run_rotation(const RunOptions& o) {
  Outcome out;
  const auto grid = uniform_grid(o.s_steps);
  out.checks.push_back({"rotation path", check_path(rotation_path(), grid, kAnnulus, o.samples)});
  std::vector<std::pair<double, Vec>> idx;
  for (double s : grid)
    idx.push_back({std::abs(winding_number(rotation_path().field_at(s), 1.0) - 1.0), Vec::Constant(1, s)});
  out.checks.push_back({"winding number constant", oracle_certificate("|index(R(s) x) - 1|", idx, 0.0)});
  out.artifacts.push_back({"path_samples.csv", samples_of(rotation_path(), o.s_steps, 8)});
  return out;
}

std::vector<Example> build_registry() {
  std::vector<Example> r;
  r.push_back({"canonical", "x' = -x with |x|^2/2", false, false,
               [] { return straight_line(examples::canonical(2), examples::quadratic()); }, run_canonical, nullptr});
  r.push_back({"ex1_1", "patched linear path vs the unstable convex combination", false, false,
               patched_linear_path, run_ex1_1, nullptr});
  r.push_back({"ex1_3_sign", "x' = -sgn(x) blended into x' = -x", false, false,
               [] { return straight_line(examples::neg_sign(), sign_pair()); }, run_ex1_3, nullptr});
  r.push_back({"ex1_4_radial", "finite-time extinction under -grad sqrt|x|", false, false, ex1_4_path, run_ex1_4, nullptr});
  r.push_back({"ex3_3", "X1 to -x through -grad V1", false, false, ex3_3_path, run_ex3_3, nullptr});
  r.push_back({"ex3_4_invex", "invex potential flattened to x^2", false, false, invex_descent_path, run_ex3_4,
               invex_potential});
  r.push_back({"ex3_7_X", "sphere field X pushed forward, homotopy to Y", true, false, sphere_chart_path,
               [](const RunOptions& o) { return run_ex3_7(o, false); }, nullptr});
  r.push_back({"ex3_7_Y", "sphere field Y pushed forward, homotopy to X", true, false,
               [] { return reverse(sphere_chart_path()); }, [](const RunOptions& o) { return run_ex3_7(o, true); }, nullptr});
  r.push_back({"ex4_1", "x' = -x + R d with an orientation-reversing R", false, false, nullptr, run_ex4_1, nullptr});
  r.push_back({"ex5_1_gaussian", "Gaussian optimal transport covariance path", false, false,
               [] {
                 Mat S0 = Mat::Zero(2, 2);
                 S0.diagonal() << 4.0, 1.0;
                 return gaussian_ot_path(S0, Mat::Identity(2, 2));
               },
               run_ex5_1, nullptr});
  r.push_back({"rotation_family", "rotation from x to -x (not stability preserving)", false, true, rotation_path,
               run_rotation, nullptr});
  return r;
}

}  // namespace

const std::vector<Example>& registry() {
  static const std::vector<Example> r = build_registry();
  return r;
}

const Example& find_example(const std::string& name) {
  for (const auto& e : registry())
    if (e.name == name) return e;
  throw Error(ErrorKind::UnknownExample, "unknown example: " + name);
}

}  // namespace stabhom
