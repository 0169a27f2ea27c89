#include "stabhom/integrate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace stabhom {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kBlowUp = 1e12;
constexpr long kMaxSteps = 5'000'000;

// Continuous extension of one accepted step.
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Vec, 5> r;

  [[nodiscard]] Vec at(double t) const {
    const double theta = (t - t0) / h;
    const double theta1 = 1.0 - theta;
    return r[0] + theta * (r[1] + theta1 * (r[2] + theta * (r[3] + theta1 * r[4])));
  }
};

double rms(const Vec& v, const Vec& scale) {
  return std::sqrt((v.array() / scale.array()).square().mean());
}

bool finite(const Vec& v) { return v.allFinite(); }

class Solver {
 public:
  Solver(const TimeRhs& rhs, const IntegratorConfig& cfg, const SolverHooks& hooks)
      : rhs_(rhs), cfg_(cfg), hooks_(hooks) {}

  Trajectory run(const Vec& x0, double t0, double t_end);

 private:
  void record(double t, const Vec& x);
  void fill_stationary(double t_from, double t_end, const Vec& x);
  bool inward_at_equilibrium(double t, const Vec& x) const;
  double initial_step(double t, const Vec& x, const Vec& f, double t_end) const;

  const TimeRhs& rhs_;
  const IntegratorConfig& cfg_;
  const SolverHooks& hooks_;
  Trajectory traj_;
  std::size_t next_output_ = 0;
};

void Solver::record(double t, const Vec& x) {
  if (!hooks_.output_times.empty()) return;
  traj_.times.push_back(t);
  traj_.states.push_back(x);
}

// After the state has come to rest at x, every remaining sample equals x.
void Solver::fill_stationary(double t_from, double t_end, const Vec& x) {
  if (hooks_.output_times.empty()) {
    if (t_end > t_from) record(t_end, x);
    return;
  }
  for (; next_output_ < hooks_.output_times.size(); ++next_output_) {
    traj_.times.push_back(hooks_.output_times[next_output_]);
    traj_.states.push_back(x);
  }
}

bool Solver::inward_at_equilibrium(double t, const Vec& x) const {
  const Vec& eq = hooks_.equilibrium;
  const int n = static_cast<int>(eq.size());
  std::vector<Vec> dirs;
  for (int i = 0; i < n; ++i) {
    dirs.push_back(Vec::Unit(n, i));
    dirs.push_back(-Vec::Unit(n, i));
  }
  const Vec offset = x - eq;
  if (offset.norm() > 0.0) dirs.push_back(offset / offset.norm());
  for (const Vec& u : dirs) {
    const Vec p = eq + cfg_.snap_radius * u;
    const Vec f = hooks_.autonomous_field ? hooks_.autonomous_field(p) : rhs_(t, p);
    if (!(u.dot(f) < 0.0)) return false;
  }
  return true;
}

double Solver::initial_step(double t, const Vec& x, const Vec& f, double t_end) const {
  const Vec scale = (cfg_.abs_tol + cfg_.rel_tol * x.array().abs()).matrix();
  const double d0 = rms(x, scale);
  const double df = rms(f, scale);
  double h0 = (d0 < 1e-5 || df < 1e-5) ? 1e-6 : 0.01 * d0 / df;
  h0 = std::min({h0, cfg_.max_step, t_end - t});
  const Vec f1 = rhs_(t + h0, x + h0 * f);
  const double d2 = finite(f1) ? rms(f1 - f, scale) / h0 : std::numeric_limits<double>::infinity();
  const double dmax = std::max(df, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::max(1e-12, std::min(100.0 * h0, h1));
}

Trajectory Solver::run(const Vec& x0, double t0, double t_end) {
  const int n = static_cast<int>(x0.size());
  const auto& outs = hooks_.output_times;
  const bool dense = !outs.empty();
  const bool one_d = n == 1 && !hooks_.discontinuities.empty();

  auto emit_until = [&](double t_hi, const DenseStep* step, const Vec& x_end) {
    for (; next_output_ < outs.size() && outs[next_output_] <= t_hi; ++next_output_) {
      const double to = outs[next_output_];
      Vec v = (step == nullptr || to == t_hi) ? x_end : step->at(to);
      if (hooks_.project) hooks_.project(v);
      traj_.times.push_back(to);
      traj_.states.push_back(v);
    }
  };

  Vec x = x0;
  double t = t0;
  record(t, x);
  if (dense) emit_until(t, nullptr, x);

  if (hooks_.snap && hooks_.equilibrium.size() == n && x == hooks_.equilibrium) {
    fill_stationary(t, t_end, x);
    return std::move(traj_);
  }
  if (one_d) {
    for (std::size_t i = 0; i < hooks_.discontinuities.size(); ++i) {
      if (hooks_.attracting[i] && x(0) == hooks_.discontinuities[i]) {
        fill_stationary(t, t_end, x);
        return std::move(traj_);
      }
    }
  }

  Vec k1 = rhs_(t, x);
  if (!finite(k1)) throw Error(ErrorKind::UndefinedAtPoint, "field is not finite at the initial state");
  double h = t_end > t ? initial_step(t, x, k1, t_end) : 0.0;
  double g_old = hooks_.level ? hooks_.level(x) : 0.0;
  long steps = 0;

  while (t < t_end) {
    if (++steps > kMaxSteps) throw Error(ErrorKind::StepUnderflow, "step budget exhausted");
    h = std::min({h, cfg_.max_step, t_end - t});
    bool last = t + h >= t_end || t_end - (t + h) < 1e-14 * std::max(1.0, std::abs(t_end));
    if (last) h = t_end - t;

    // Limit the step so a linear extrapolation lands exactly on an attracting discontinuity.
    int target = -1;
    if (one_d) {
      double best = h;
      for (std::size_t i = 0; i < hooks_.discontinuities.size(); ++i) {
        if (!hooks_.attracting[i]) continue;
        const double dist = hooks_.discontinuities[i] - x(0);
        if (k1(0) * dist <= 0.0) continue;
        const double tau = dist / k1(0);
        if (tau <= best) {
          best = tau;
          target = static_cast<int>(i);
        }
      }
      if (target >= 0 && best < h) {
        h = best;
        last = false;
      }
    }

    const Vec k2 = rhs_(t + c2 * h, x + h * (a21 * k1));
    const Vec k3 = rhs_(t + c3 * h, x + h * (a31 * k1 + a32 * k2));
    const Vec k4 = rhs_(t + c4 * h, x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = rhs_(t + c5 * h, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 =
        rhs_(t + h, x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    Vec x_new = x + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    const Vec k7 = rhs_(t + h, x_new);

    const double h_min = 1e-14 * std::max(1.0, std::abs(t));
    if (!finite(x_new) || !finite(k7)) {
      h *= 0.25;
      if (h < h_min) throw Error(ErrorKind::StepUnderflow, "non-finite stage values");
      continue;
    }

    const Vec err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const Vec scale =
        (cfg_.abs_tol + cfg_.rel_tol * x.array().abs().max(x_new.array().abs())).matrix();
    const double err = rms(err_vec, scale);

    bool landed = false;
    if (one_d) {
      bool straddles = false;
      for (std::size_t i = 0; i < hooks_.discontinuities.size(); ++i) {
        if (!hooks_.attracting[i]) continue;
        const double d = hooks_.discontinuities[i];
        const double miss = std::abs(x_new(0) - d);
        if (static_cast<int>(i) == target && miss <= cfg_.snap_radius) landed = true;
        if ((x(0) - d) * (x_new(0) - d) < 0.0 && miss > cfg_.snap_radius) straddles = true;
      }
      if (straddles && !landed) {
        h *= 0.5;
        if (h < h_min) throw Error(ErrorKind::StepUnderflow, "cannot resolve discontinuity");
        continue;
      }
    }

    if (!landed && !(err <= 1.0)) {
      h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h < h_min) throw Error(ErrorKind::StepUnderflow, "step size underflow");
      continue;
    }

    // Accepted.
    const double t_new = last ? t_end : t + h;
    DenseStep step;
    step.t0 = t;
    step.h = h;
    const Vec ydiff = x_new - x;
    const Vec bspl = h * k1 - ydiff;
    step.r = {x, ydiff, bspl, ydiff - h * k7 - bspl,
              h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7)};

    bool projected = false;
    if (hooks_.project) {
      hooks_.project(x_new);
      projected = true;
    }
    if (!finite(x_new) || x_new.norm() > kBlowUp)
      throw Error(ErrorKind::BlowUp, "state norm exceeded 1e12");

    if (hooks_.level) {
      const double g_new = hooks_.level(x_new);
      if (g_old != 0.0 && g_old * g_new <= 0.0) {
        double lo = t, hi = t_new;
        for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
          const double mid = 0.5 * (lo + hi);
          const double gm = hooks_.level(step.at(mid));
          if (g_old * gm <= 0.0) hi = mid;
          else lo = mid;
        }
        Vec x_hit = hi == t_new ? x_new : step.at(hi);
        if (hooks_.project) hooks_.project(x_hit);
        if (dense) {
          emit_until(hi, &step, x_hit);
        } else {
          record(hi, x_hit);
        }
        traj_.events.push_back({hi, EventTag::LevelHit});
        return std::move(traj_);
      }
      g_old = g_new;
    }

    if (hooks_.guard) hooks_.guard(t_new, x_new);

    // Arrival on an attracting discontinuity (1-D) ends the motion there.
    if (one_d) {
      for (std::size_t i = 0; i < hooks_.discontinuities.size(); ++i) {
        const double d = hooks_.discontinuities[i];
        if (hooks_.attracting[i] && std::abs(x_new(0) - d) <= cfg_.snap_radius) {
          x_new(0) = d;
          if (dense) emit_until(t_new, &step, x_new);
          record(t_new, x_new);
          const bool at_eq = hooks_.equilibrium.size() == 1 && hooks_.equilibrium(0) == d;
          traj_.events.push_back({t_new, at_eq ? EventTag::Extinction : EventTag::SlidingOnset});
          fill_stationary(t_new, t_end, x_new);
          return std::move(traj_);
        }
      }
    }

    if (hooks_.snap && hooks_.equilibrium.size() == n &&
        (x_new - hooks_.equilibrium).norm() < cfg_.snap_radius &&
        inward_at_equilibrium(t_new, x_new)) {
      x_new = hooks_.equilibrium;
      if (dense) emit_until(t_new, &step, x_new);
      record(t_new, x_new);
      traj_.events.push_back({t_new, EventTag::Extinction});
      fill_stationary(t_new, t_end, x_new);
      return std::move(traj_);
    }

    if (dense) emit_until(t_new, &step, x_new);
    record(t_new, x_new);

    x = x_new;
    t = t_new;
    k1 = projected ? rhs_(t, x) : k7;
    const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
    h *= std::clamp(fac, 0.2, 5.0);
  }
  return std::move(traj_);
}

SolverHooks hooks_for(const FieldDescription& field) {
  SolverHooks hooks;
  hooks.snap = true;
  hooks.equilibrium = field.eq();
  hooks.autonomous_field = field.evaluator;
  if (field.dim == 1) {
    for (double d : field.discontinuities) {
      const SetValuedSample hull = filippov_hull_1d(field, d, 1e-6);
      double lo = hull.vertices.front()(0);
      double hi = hull.vertices.back()(0);
      hooks.discontinuities.push_back(d);
      hooks.attracting.push_back(lo <= 0.0 && 0.0 <= hi);
    }
  }
  return hooks;
}

TimeRhs autonomous(const FieldDescription& field) {
  return [ev = field.evaluator](double, const Vec& x) { return ev(x); };
}

void check_start(const FieldDescription& field, const Vec& x0) {
  if (x0.size() != field.dim)
    throw Error(ErrorKind::DimensionMismatch, "initial state dimension does not match field");
}

}  // namespace

const char* to_string(EventTag tag) {
  switch (tag) {
    case EventTag::SlidingOnset: return "SlidingOnset";
    case EventTag::Extinction: return "Extinction";
    case EventTag::LevelHit: return "LevelHit";
    case EventTag::Truncated: return "Truncated";
  }
  return "Unknown";
}

std::optional<double> Trajectory::event_time(EventTag tag) const {
  for (const auto& e : events)
    if (e.tag == tag) return e.time;
  return std::nullopt;
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0) || !(max_step > 0.0) || !(snap_radius > 0.0))
    throw Error(ErrorKind::InvalidArgument, "integrator tolerances and steps must be positive");
  if (!(snap_radius < 1e-3)) throw Error(ErrorKind::InvalidArgument, "snap radius must be < 1e-3");
}

Trajectory solve_ode(const TimeRhs& rhs, const Vec& x0, double t0, double t_end,
                     const IntegratorConfig& cfg, const SolverHooks& hooks) {
  cfg.validate();
  if (!finite(x0)) throw Error(ErrorKind::InvalidArgument, "initial state is not finite");
  if (!(t_end >= t0)) throw Error(ErrorKind::InvalidArgument, "t_end precedes t0");
  if (hooks.discontinuities.size() != hooks.attracting.size())
    throw Error(ErrorKind::InvalidArgument, "discontinuity flags do not match points");
  const auto& outs = hooks.output_times;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (outs[i] < t0 || outs[i] > t_end || (i > 0 && !(outs[i] > outs[i - 1])))
      throw Error(ErrorKind::InvalidArgument,
                  "output times must be strictly increasing inside [t0, t_end]");
  }
  Solver solver(rhs, cfg, hooks);
  return solver.run(x0, t0, t_end);
}

Trajectory integrate(const FieldDescription& field, const Vec& x0, double t_end,
                     const IntegratorConfig& cfg) {
  check_start(field, x0);
  return solve_ode(autonomous(field), x0, 0.0, t_end, cfg, hooks_for(field));
}

Trajectory integrate_at(const FieldDescription& field, const Vec& x0,
                        const std::vector<double>& times, const IntegratorConfig& cfg) {
  check_start(field, x0);
  if (times.empty()) return {};
  SolverHooks hooks = hooks_for(field);
  hooks.output_times = times;
  return solve_ode(autonomous(field), x0, 0.0, times.back(), cfg, hooks);
}

Vec flow(const FieldDescription& field, const Vec& x0, double t, const IntegratorConfig& cfg) {
  return integrate(field, x0, t, cfg).final_state();
}

Trajectory integrate_to_level(const FieldDescription& field, const Vec& x0, const ScalarMap& level,
                              double t_max, const IntegratorConfig& cfg) {
  check_start(field, x0);
  SolverHooks hooks = hooks_for(field);
  hooks.level = level;
  Trajectory traj = solve_ode(autonomous(field), x0, 0.0, t_max, cfg, hooks);
  if (!traj.event_time(EventTag::LevelHit))
    traj.events.push_back({traj.final_time(), EventTag::Truncated});
  return traj;
}

double closed_semiflow_sign(double x, double t) {
  if (x < 0.0) return std::min(0.0, x + t);
  if (x > 0.0) return std::max(0.0, x - t);
  return 0.0;
}

double closed_semiflow_blend(double x, double t, double s) {
  if (s < 0.0 || s > 1.0) throw Error(ErrorKind::InvalidArgument, "blend parameter outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x < 0.0) return -closed_semiflow_blend(-x, t, s);
  const double decay = std::exp(-s * t);
  // (e^{-st} - 1)/s, the s -> 0 limit being -t.
  double ratio = 0.0;
  if (s * t < 1e-4) {
    const double st = s * t;
    ratio = -t * (1.0 - st / 2.0 + st * st / 6.0 - st * st * st / 24.0);
  } else {
    ratio = std::expm1(-s * t) / s;
  }
  return std::max(0.0, decay * x + ratio * (1.0 - s));
}

Vec closed_semiflow_radial(const Vec& x, double t, const ClassKFn& gamma, int quad_steps) {
  const double r = x.norm();
  if (r == 0.0) return Vec::Zero(x.size());
  const double big_gamma = gamma_capital(gamma, r, quad_steps);
  if (t >= big_gamma) return Vec::Zero(x.size());
  const ClassKFn cap = gamma_capital_fn(gamma, quad_steps);
  const double remaining = big_gamma - t;
  const double rho = classk_inverse(cap, remaining, 1e-14 * std::max(1.0, remaining));
  return (rho / r) * x;
}

Trajectory extended_flow(const HomotopyPath& path, double s, const Vec& x0, double t,
                         const IntegratorConfig& cfg) {
  if (s < 0.0 || s > 1.0) throw Error(ErrorKind::InvalidArgument, "homotopy parameter outside [0, 1]");
  return integrate(path.field_at(s), x0, t, cfg);
}

void write_csv(const Trajectory& traj, std::ostream& out) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  out << ",event\n";
  std::vector<std::string> tags(traj.times.size());
  for (const auto& e : traj.events) {
    auto it = std::lower_bound(traj.times.begin(), traj.times.end(), e.time);
    if (it == traj.times.end()) continue;
    auto& cell = tags[static_cast<std::size_t>(it - traj.times.begin())];
    if (!cell.empty()) cell += ';';
    cell += to_string(e.tag);
  }
  out << std::setprecision(17);
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    out << traj.times[k];
    for (int i = 0; i < n; ++i) out << ',' << traj.states[k](i);
    out << ',' << tags[k] << '\n';
  }
}

}  // namespace stabhom
