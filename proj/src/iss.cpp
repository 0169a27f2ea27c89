#include "stabhom/iss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <ostream>

#include "stabhom/sampling.hpp"

namespace stabhom {

namespace {

bool piecewise(const DisturbanceSignal& d) {
  return d.kind == SignalKind::PiecewiseConstant || d.kind == SignalKind::SeededRandomHold;
}

std::size_t segment_index(const DisturbanceSignal& d, double t) {
  const auto it = std::upper_bound(d.breaks.begin(), d.breaks.end(), t);
  return it == d.breaks.begin() ? 0 : static_cast<std::size_t>(it - d.breaks.begin()) - 1;
}

// Integrates x' = f(x, d(t)) over [0, t_end], restarting the solver at every switching
// time of a piecewise signal. With `times` set, only those sample times are kept.
Trajectory run_segments(const DisturbedSystem& sys, const Vec& x0, const DisturbanceSignal& d,
                        double t_end, const IntegratorConfig& cfg, const std::vector<double>* times) {
  if (x0.size() != sys.dim) throw Error(ErrorKind::DimensionMismatch, "initial state dimension");
  if (d.d_dim != sys.d_dim) throw Error(ErrorKind::DimensionMismatch, "disturbance dimension");
  if (!(t_end >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negative horizon");

  std::vector<double> cuts = {0.0};
  if (piecewise(d))
    for (double b : d.breaks)
      if (b > 0.0 && b < t_end) cuts.push_back(b);
  cuts.push_back(t_end);

  Trajectory out;
  Vec x = x0;
  std::size_t next = 0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    const Vec level = piecewise(d) ? d.levels[segment_index(d, a)] : Vec();
    const TimeRhs rhs = [&](double t, const Vec& z) {
      return sys.f(z, piecewise(d) ? level : d(t));
    };
    SolverHooks hooks;
    if (times) {
      std::size_t j = next;
      while (j < times->size() && (*times)[j] <= b) hooks.output_times.push_back((*times)[j++]);
      if (hooks.output_times.empty() || hooks.output_times.back() < b) hooks.output_times.push_back(b);
    }
    if (k == 0 && b == a) {
      if (times) {
        for (; next < times->size() && (*times)[next] <= b; ++next) {
          out.times.push_back((*times)[next]);
          out.states.push_back(x);
        }
      } else {
        out.times.push_back(a);
        out.states.push_back(x);
      }
      break;
    }
    Trajectory seg = solve_ode(rhs, x, a, b, cfg, hooks);
    if (times) {
      for (std::size_t i = 0; i < seg.times.size(); ++i)
        if (next < times->size() && seg.times[i] == (*times)[next]) {
          out.times.push_back(seg.times[i]);
          out.states.push_back(seg.states[i]);
          ++next;
        }
    } else {
      for (std::size_t i = (k == 0 ? 0 : 1); i < seg.times.size(); ++i) {
        out.times.push_back(seg.times[i]);
        out.states.push_back(seg.states[i]);
      }
    }
    x = seg.final_state();
  }
  return out;
}

// Exact int_0^t |d|^2 for the supported signal kinds.
double disturbance_energy(const DisturbanceSignal& d, double t) {
  switch (d.kind) {
    case SignalKind::Constant:
      return d.value.squaredNorm() * t;
    case SignalKind::Sinusoid: {
      double e = 0.0;
      for (Eigen::Index i = 0; i < d.amplitude.size(); ++i) {
        const double a2 = d.amplitude(i) * d.amplitude(i), w = d.omega(i), p = d.phase(i);
        if (w == 0.0) {
          e += a2 * std::sin(p) * std::sin(p) * t;
        } else {
          e += a2 * (0.5 * t - (std::sin(2.0 * (w * t + p)) - std::sin(2.0 * p)) / (4.0 * w));
        }
      }
      return e;
    }
    case SignalKind::PiecewiseConstant:
    case SignalKind::SeededRandomHold: {
      double e = 0.0;
      for (std::size_t k = 0; k < d.breaks.size() && d.breaks[k] < t; ++k) {
        const double hi = k + 1 < d.breaks.size() ? std::min(d.breaks[k + 1], t) : t;
        e += d.levels[k].squaredNorm() * (hi - d.breaks[k]);
      }
      return e;
    }
  }
  return 0.0;
}

std::vector<Vec> worst_first(std::vector<std::pair<double, Vec>> failing) {
  std::stable_sort(failing.begin(), failing.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<Vec> out;
  for (std::size_t i = 0; i < failing.size() && i < 10; ++i) out.push_back(failing[i].second);
  return out;
}

Vec reflect_last(Vec u) {
  u(u.size() - 1) = -u(u.size() - 1);
  return u;
}

}  // namespace

Vec DisturbanceSignal::operator()(double t) const {
  switch (kind) {
    case SignalKind::Constant:
      return value;
    case SignalKind::Sinusoid:
      return (amplitude.array() * (omega.array() * t + phase.array()).sin()).matrix();
    case SignalKind::PiecewiseConstant:
    case SignalKind::SeededRandomHold:
      return levels[segment_index(*this, t)];
  }
  return value;
}

DisturbanceSignal constant_signal(const Vec& value) {
  DisturbanceSignal d;
  d.kind = SignalKind::Constant;
  d.d_dim = static_cast<int>(value.size());
  d.value = value;
  d.sup_norm = value.norm();
  return d;
}

DisturbanceSignal sinusoid_signal(const Vec& amplitude, const Vec& omega, const Vec& phase) {
  if (amplitude.size() != omega.size() || amplitude.size() != phase.size())
    throw Error(ErrorKind::DimensionMismatch, "sinusoid parameter sizes differ");
  DisturbanceSignal d;
  d.kind = SignalKind::Sinusoid;
  d.d_dim = static_cast<int>(amplitude.size());
  d.amplitude = amplitude;
  d.omega = omega;
  d.phase = phase;
  d.sup_norm = amplitude.norm();
  return d;
}

DisturbanceSignal piecewise_signal(std::vector<double> breaks, std::vector<Vec> levels) {
  if (breaks.empty() || breaks.size() != levels.size() || breaks.front() != 0.0)
    throw Error(ErrorKind::InvalidArgument, "piecewise signal needs breaks starting at 0, one level each");
  for (std::size_t k = 1; k < breaks.size(); ++k)
    if (!(breaks[k] > breaks[k - 1]))
      throw Error(ErrorKind::InvalidArgument, "breaks must be strictly increasing");
  DisturbanceSignal d;
  d.kind = SignalKind::PiecewiseConstant;
  d.d_dim = static_cast<int>(levels.front().size());
  for (const Vec& l : levels) {
    if (l.size() != d.d_dim) throw Error(ErrorKind::DimensionMismatch, "level dimension");
    d.sup_norm = std::max(d.sup_norm, l.norm());
  }
  d.breaks = std::move(breaks);
  d.levels = std::move(levels);
  return d;
}

DisturbanceSignal random_hold_signal(int d_dim, double sup_bound, double hold, double t_end,
                                     std::uint64_t seed) {
  if (!(hold > 0.0) || !(sup_bound >= 0.0) || d_dim < 1)
    throw Error(ErrorKind::InvalidArgument, "random hold needs hold > 0, bound >= 0, d_dim >= 1");
  sampling::SplitMix64 rng(seed);
  std::vector<double> breaks;
  std::vector<Vec> levels;
  for (int k = 0; k == 0 || k * hold < t_end; ++k) {
    breaks.push_back(k * hold);
    Vec v(d_dim);
    do {
      for (int i = 0; i < d_dim; ++i) v(i) = rng.uniform(-1.0, 1.0);
    } while (v.squaredNorm() > 1.0);
    levels.push_back(sup_bound * v);
  }
  DisturbanceSignal d = piecewise_signal(std::move(breaks), std::move(levels));
  d.kind = SignalKind::SeededRandomHold;
  return d;
}

Trajectory simulate_disturbed(const DisturbedSystem& sys, const Vec& x0, const DisturbanceSignal& d,
                              double t_end, const IntegratorConfig& cfg) {
  return run_segments(sys, x0, d, t_end, cfg, nullptr);
}

Trajectory simulate_disturbed_uniform(const DisturbedSystem& sys, const Vec& x0,
                                      const DisturbanceSignal& d, double t_end, double dt,
                                      const IntegratorConfig& cfg) {
  if (!(dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "sample spacing must be positive");
  std::vector<double> times;
  const auto n = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  for (long k = 0; k < n; ++k) times.push_back(k * dt);
  times.push_back(t_end);
  return run_segments(sys, x0, d, t_end, cfg, &times);
}

Certificate check_ises_bound(const DisturbedSystem& sys, const ISSBoundSpec& spec,
                             const std::vector<std::pair<Vec, DisturbanceSignal>>& batch,
                             const std::vector<double>& t_grid, const IntegratorConfig& cfg) {
  if (batch.empty()) throw Error(ErrorKind::InvalidArgument, "empty batch");
  if (t_grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty time grid");
  if (!(spec.M >= 1.0) || !(spec.a > 0.0)) throw Error(ErrorKind::InvalidArgument, "need M >= 1, a > 0");

  std::vector<std::future<Trajectory>> futures;
  for (const auto& [x0, d] : batch)
    futures.push_back(std::async(std::launch::async, [&, x0 = x0, d = d] {
      return run_segments(sys, x0, d, t_grid.back(), cfg, &t_grid);
    }));

  Certificate cert;
  cert.property = "ISES bound |x(t)| <= max(M e^{-a t}|x0|, alpha(|d|_inf)) for " + sys.name;
  cert.tolerance = 1e-9;
  cert.worst_margin = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Vec>> failing;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Trajectory traj = futures[b].get();
    const double x0n = batch[b].first.norm();
    const double gain = spec.alpha(batch[b].second.sup_norm);
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const double bound = std::max(spec.M * std::exp(-spec.a * traj.times[i]) * x0n, gain);
      const double m = traj.states[i].norm() - bound;
      cert.worst_margin = std::max(cert.worst_margin, m);
      ++cert.sample_count;
      if (m > cert.tolerance * (1.0 + bound)) failing.push_back({m, traj.states[i]});
    }
  }
  cert.pass = failing.empty();
  cert.witnesses = worst_first(std::move(failing));
  return cert;
}

Certificate check_l2_gain(const Trajectory& traj, const DisturbanceSignal& d) {
  if (traj.states.empty()) throw Error(ErrorKind::InvalidArgument, "empty trajectory");
  for (std::size_t i = 1; i < traj.times.size(); ++i)
    if (traj.times[i] - traj.times[i - 1] > 1e-2 + 1e-12)
      throw Error(ErrorKind::InvalidArgument, "trajectory sampling gap exceeds 1e-2");
  Certificate cert;
  cert.property = "canonical L2 gain int |x|^2 <= |x0|^2 + int |d|^2 at every prefix";
  cert.sample_count = static_cast<int>(traj.states.size());
  cert.tolerance = 1e-6;
  cert.worst_margin = -std::numeric_limits<double>::infinity();
  const double x0sq = traj.states.front().squaredNorm();
  const double e0 = disturbance_energy(d, traj.times.front());
  double lhs = 0.0;
  std::vector<std::pair<double, Vec>> failing;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    if (i > 0)
      lhs += 0.5 * (traj.times[i] - traj.times[i - 1]) *
             (traj.states[i].squaredNorm() + traj.states[i - 1].squaredNorm());
    const double rhs = x0sq + disturbance_energy(d, traj.times[i]) - e0;
    const double m = lhs - rhs;
    cert.worst_margin = std::max(cert.worst_margin, m);
    if (m > cert.tolerance * (1.0 + rhs)) failing.push_back({m, traj.states[i]});
  }
  cert.pass = failing.empty();
  cert.witnesses = worst_first(std::move(failing));
  return cert;
}

ClassKFn estimate_alpha_tilde(const DisturbedSystem& sys, const ClassKFn& alpha,
                              const std::vector<double>& r_grid, int search_samples) {
  if (search_samples < 1) throw Error(ErrorKind::InvalidArgument, "need at least one search sample");
  const int n = sys.dim, m = sys.d_dim;
  const auto xi_unit = sampling::ball(n, search_samples, 1.0, 1);
  const auto u_unit = sampling::ball(m, search_samples, 1.0, 7919);
  auto objective = [&](const Vec& xi, const Vec& u) { return 2.0 * sys.f(xi, u).dot(xi) + xi.squaredNorm(); };
  auto clip = [](Vec& v, double radius) {
    const double r = v.norm();
    if (r > radius) v *= radius / r;
  };

  std::vector<double> nodes, values;
  double running = 0.0;
  for (double r : r_grid) {
    if (!(r >= 0.0)) throw Error(ErrorKind::InvalidArgument, "negative radius in grid");
    if (r == 0.0) continue;
    if (!nodes.empty() && !(r > nodes.back()))
      throw Error(ErrorKind::InvalidArgument, "radius grid must be increasing");
    const double rx = alpha(r);
    double best = -std::numeric_limits<double>::infinity();
    Vec bx, bu;
    for (int k = 0; k < search_samples; ++k) {
      const Vec xi = rx * xi_unit[k], u = r * u_unit[k];
      const double v = objective(xi, u);
      if (v > best) best = v, bx = xi, bu = u;
    }
    // Coordinate ascent polish with step halving.
    double step = 0.25 * std::max(rx, r);
    for (int it = 0; it < 50; ++it) {
      bool improved = false;
      for (int c = 0; c < n + m; ++c)
        for (double sgn : {1.0, -1.0}) {
          Vec xi = bx, u = bu;
          if (c < n) xi(c) += sgn * step;
          else u(c - n) += sgn * step;
          clip(xi, rx);
          clip(u, r);
          const double v = objective(xi, u);
          if (v > best) best = v, bx = xi, bu = u, improved = true;
        }
      if (!improved) step *= 0.5;
    }
    if (!(best <= 1e12)) throw Error(ErrorKind::UnboundedSup, "sup exceeds 1e12 at r=" + std::to_string(r));
    const double floor = values.empty() ? 1e-12 * r : values.back() * (1.0 + 1e-12) + 1e-300;
    running = std::max({running, best, floor});
    nodes.push_back(r);
    values.push_back(running);
  }
  if (nodes.empty()) throw Error(ErrorKind::InvalidArgument, "radius grid has no positive entries");
  return classk::piecewise_linear(nodes, values, "alpha_tilde(" + sys.name + ")");
}

Vec build_R_transform(const ClassKFn& alpha_tilde, const Vec& z, bool flip) {
  const double r = z.norm();
  if (r == 0.0) return Vec::Zero(z.size());
  const Vec out = std::sqrt(alpha_tilde(r)) * (z / r);
  return flip ? reflect_last(out) : out;
}

Vec invert_R_transform(const ClassKFn& alpha_tilde, const Vec& v_in, bool flip) {
  const Vec v = flip ? reflect_last(v_in) : v_in;
  const double q = v.norm();
  if (q == 0.0) return Vec::Zero(v.size());
  return alpha_tilde.inv(q * q) * (v / q);
}

Certificate dissipation_check(const DisturbedSystem& sys, const LyapunovPair& V,
                              const std::function<double(const Vec&, const Vec&)>& supply,
                              const std::vector<std::pair<Vec, Vec>>& grid) {
  if (grid.empty()) throw Error(ErrorKind::InvalidArgument, "empty dissipation grid");
  Certificate cert;
  cert.property = "dissipation <grad V, f(x, d)> <= supply(x, d) for " + sys.name;
  cert.sample_count = static_cast<int>(grid.size());
  cert.tolerance = 1e-12;
  cert.worst_margin = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, Vec>> failing;
  for (const auto& [x, d] : grid) {
    const double m = V.gradient(x).dot(sys.f(x, d)) - supply(x, d);
    cert.worst_margin = std::max(cert.worst_margin, m);
    if (!(m <= cert.tolerance * (1.0 + std::abs(supply(x, d))))) failing.push_back({m, x});
  }
  cert.pass = failing.empty();
  cert.witnesses = worst_first(std::move(failing));
  return cert;
}

std::vector<std::pair<Vec, Vec>> dissipation_grid(int dim, int d_dim, double x_radius,
                                                  double d_radius, int count) {
  const auto xs = sampling::ball(dim, count, x_radius, 1);
  const auto ds = sampling::ball(d_dim, count, d_radius, 7919);
  std::vector<std::pair<Vec, Vec>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out.emplace_back(xs[k], ds[k]);
  return out;
}

DisturbedSystem transformed_system(const DisturbedSystem& sys, const ClassKFn& alpha_tilde, bool flip) {
  const ClassKFn safe = classk::scaled(alpha_tilde, 2.0);
  DisturbedSystem out = sys;
  out.name = sys.name + " (R-transformed)";
  out.d_radius = std::sqrt(safe(sys.d_radius));
  out.f = [f = sys.f, safe, flip](const Vec& x, const Vec& v) {
    return f(x, invert_R_transform(safe, v, flip));
  };
  return out;
}

DisturbedSystem canonical_disturbed(int n) {
  DisturbedSystem s;
  s.name = "canonical";
  s.dim = n;
  s.d_dim = n;
  s.d_radius = 5.0;
  s.f = [](const Vec& x, const Vec& d) -> Vec { return -x + d; };
  return s;
}

Mat ex4_1_R() {
  Mat R = Mat::Identity(2, 2);
  R(1, 1) = -1.0;
  return R;
}

DisturbedSystem ex4_1_system() {
  DisturbedSystem s;
  s.name = "ex4_1";
  s.dim = 2;
  s.d_dim = 2;
  s.d_radius = 5.0;
  s.f = [R = ex4_1_R()](const Vec& x, const Vec& d) -> Vec { return -x + R * d; };
  return s;
}

void write_disturbed_csv(const Trajectory& traj, const DisturbanceSignal& d, std::ostream& out) {
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= d.d_dim; ++i) out << ",d" << i;
  out << '\n';
  char buf[64];
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.times[k]);
    out << buf;
    for (Eigen::Index i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", traj.states[k](i));
      out << buf;
    }
    const Vec dv = d(traj.times[k]);
    for (Eigen::Index i = 0; i < dv.size(); ++i) {
      std::snprintf(buf, sizeof buf, ",%.17g", dv(i));
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace stabhom
