#include "stabhom/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <numeric>

#include "stabhom/sampling.hpp"

namespace stabhom {

namespace {

constexpr std::size_t kMaxWitnesses = 10;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9e", v);
  return buf;
}

std::string fmt_point(const Vec& x) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (i > 0) out += ", ";
    out += fmt_double(x(i));
  }
  return out + ")";
}

struct Scored {
  double margin;
  Vec x;
};

// Keeps the worst failing points, worst first, ties broken by sample order.
std::vector<Vec> top_witnesses(std::vector<Scored> failing) {
  std::stable_sort(failing.begin(), failing.end(),
                   [](const Scored& a, const Scored& b) { return a.margin > b.margin; });
  std::vector<Vec> out;
  for (std::size_t i = 0; i < failing.size() && i < kMaxWitnesses; ++i) out.push_back(failing[i].x);
  return out;
}

}  // namespace

std::string Certificate::to_report() const {
  std::string out;
  out += "property: " + property + "\n";
  out += std::string("verdict: ") + (pass ? "pass" : "fail") + "\n";
  out += "sample_count: " + std::to_string(sample_count) + "\n";
  out += "worst_margin: " + fmt_double(worst_margin) + "\n";
  out += "tolerance: " + fmt_double(tolerance) + "\n";
  out += "witness_count: " + std::to_string(witnesses.size()) + "\n";
  for (std::size_t i = 0; i < witnesses.size(); ++i)
    out += "witness_" + std::to_string(i) + ": " + fmt_point(witnesses[i]) + "\n";
  for (const auto& sl : slices) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "slice: s=%.6f margin=%.9e verdict=%s\n", sl.s, sl.worst_margin,
                  sl.pass ? "pass" : "fail");
    out += buf;
  }
  return out;
}

double huber(double r) {
  r = std::abs(r);
  return r <= 1.0 ? 0.5 * r * r : r - 0.5;
}

LyapunovPair half_decrement_pair(std::string label, ScalarMap V, VectorMap gradV, VectorMap field) {
  LyapunovPair p;
  p.label = std::move(label);
  p.V = std::move(V);
  p.gradV = std::move(gradV);
  p.W = [V = p.V, g = p.gradV, f = std::move(field)](const Vec& x) {
    const Vec grad = g ? g(x) : fd_gradient(V, x);
    return -0.5 * grad.dot(f(x));
  };
  return p;
}

Certificate check_decrease_grid(const FieldDescription& field, const LyapunovPair& pair,
                                Annulus annulus, int N) {
  if (!(annulus.rmin > 0.0)) throw Error(ErrorKind::InvalidArgument, "annulus needs r_min > 0");
  Certificate cert;
  cert.property = "decrease <gradV, f> + W <= 0 on annulus [" + fmt_double(annulus.rmin) + ", " +
                  fmt_double(annulus.rmax) + "] for " + field.name;
  cert.sample_count = N;
  cert.tolerance = 0.0;
  cert.worst_margin = -std::numeric_limits<double>::infinity();
  const Vec eq = field.eq();
  std::vector<Scored> failing;
  bool w_positive = true;
  for (const Vec& offset : sampling::annulus(field.dim, N, annulus.rmin, annulus.rmax)) {
    const Vec x = eq + offset;
    const double w = pair.W(x);
    const double m = pair.gradient(x).dot(eval_field(field, x)) + w;
    const bool bad_w = !(w > 0.0);
    if (bad_w) w_positive = false;
    const double score = std::isfinite(m) ? m : std::numeric_limits<double>::infinity();
    cert.worst_margin = std::max(cert.worst_margin, score);
    if (score > cert.tolerance || bad_w) failing.push_back({score, x});
  }
  cert.pass = cert.worst_margin <= cert.tolerance && w_positive;
  cert.witnesses = top_witnesses(std::move(failing));
  return cert;
}

Certificate check_strong_pair(const FieldDescription& field, const LyapunovPair& pair,
                              const std::vector<SetValuedSample>& hulls) {
  if (hulls.empty()) throw Error(ErrorKind::InvalidArgument, "hull list is empty");
  Certificate cert;
  cert.property = "strong pair max_v <gradV, v> <= -W for " + field.name;
  cert.tolerance = 0.0;
  cert.worst_margin = -std::numeric_limits<double>::infinity();
  const Vec eq = field.eq();
  std::vector<Scored> failing;
  int counted = 0;
  for (const auto& h : hulls) {
    if (h.vertices.empty()) throw Error(ErrorKind::InvalidArgument, "empty hull sample");
    if ((h.x - eq).norm() == 0.0) continue;  // the inequality is only required off the equilibrium
    ++counted;
    const Vec g = pair.gradient(h.x);
    double worst = -std::numeric_limits<double>::infinity();
    for (const Vec& v : h.vertices) worst = std::max(worst, g.dot(v));
    const double m = worst + pair.W(h.x);
    cert.worst_margin = std::max(cert.worst_margin, m);
    if (!(m <= cert.tolerance)) failing.push_back({m, h.x});
  }
  cert.sample_count = counted;
  cert.pass = failing.empty();
  cert.witnesses = top_witnesses(std::move(failing));
  return cert;
}

Certificate check_path(const HomotopyPath& path,
                       const std::function<LyapunovPair(double)>& pair_family,
                       const std::vector<double>& s_grid, Annulus annulus, int N, bool parallel) {
  if (s_grid.empty() || s_grid.front() != 0.0 || s_grid.back() != 1.0)
    throw Error(ErrorKind::InvalidArgument, "s grid must start at 0 and end at 1");
  for (double s : s_grid)
    if (s < 0.0 || s > 1.0) throw Error(ErrorKind::InvalidArgument, "s grid outside [0, 1]");

  auto one = [&](double s) { return check_decrease_grid(path.field_at(s), pair_family(s), annulus, N); };
  std::vector<Certificate> parts(s_grid.size());
  if (parallel) {
    std::vector<std::future<Certificate>> futures;
    futures.reserve(s_grid.size());
    for (double s : s_grid) futures.push_back(std::async(std::launch::async, one, s));
    for (std::size_t i = 0; i < futures.size(); ++i) parts[i] = futures[i].get();
  } else {
    for (std::size_t i = 0; i < s_grid.size(); ++i) parts[i] = one(s_grid[i]);
  }

  Certificate cert;
  cert.property = "path decrease along " + path.name + " (" + std::to_string(s_grid.size()) +
                  " parameter values)";
  cert.tolerance = 0.0;
  cert.worst_margin = -std::numeric_limits<double>::infinity();
  cert.pass = true;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& p = parts[i];
    cert.sample_count += p.sample_count;
    cert.worst_margin = std::max(cert.worst_margin, p.worst_margin);
    cert.pass = cert.pass && p.pass;
    cert.slices.push_back({s_grid[i], p.worst_margin, p.pass});
    if (!p.pass && !p.witnesses.empty() && cert.witnesses.size() < kMaxWitnesses)
      cert.witnesses.push_back(p.witnesses.front());
  }
  return cert;
}

Certificate check_path(const HomotopyPath& path, const std::vector<double>& s_grid, Annulus annulus,
                       int N, bool parallel) {
  return check_path(path, path.lyap_at, s_grid, annulus, N, parallel);
}

Certificate check_traj_decrease(const Trajectory& traj, const ScalarMap& V, const Vec& equilibrium,
                                double snap_radius) {
  if (traj.states.empty()) throw Error(ErrorKind::InvalidArgument, "empty trajectory");
  Certificate cert;
  cert.property = "V nonincreasing along trajectory";
  cert.sample_count = static_cast<int>(traj.states.size());
  const double v0 = V(traj.states.front());
  cert.tolerance = 1e-9 * (1.0 + std::abs(v0));
  cert.worst_margin = -std::numeric_limits<double>::infinity();
  const Vec eq = equilibrium.size() == traj.states.front().size()
                     ? equilibrium
                     : Vec::Zero(traj.states.front().size());
  std::vector<Scored> failing;
  double prev = v0;
  for (std::size_t k = 1; k < traj.states.size(); ++k) {
    const double cur = V(traj.states[k]);
    const double diff = cur - prev;
    cert.worst_margin = std::max(cert.worst_margin, diff);
    const bool moving = (traj.states[k - 1] - eq).norm() > snap_radius;
    const bool bad = diff > cert.tolerance || (moving && !(diff < 0.0));
    if (bad) failing.push_back({diff, traj.states[k]});
    prev = cur;
  }
  if (traj.states.size() == 1) cert.worst_margin = 0.0;
  cert.pass = failing.empty();
  cert.witnesses = top_witnesses(std::move(failing));
  return cert;
}

std::vector<double> uniform_grid(int k) {
  if (k < 2) throw Error(ErrorKind::InvalidArgument, "grid needs at least two points");
  std::vector<double> g(k);
  for (int i = 0; i < k; ++i) g[i] = static_cast<double>(i) / (k - 1);
  g.back() = 1.0;
  return g;
}

}  // namespace stabhom
