#include "stabhom/homotopies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "stabhom/index.hpp"
#include "stabhom/sampling.hpp"

namespace stabhom {

namespace {

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

Vec interpolated_gradient(const LyapunovPair& V0, const LyapunovPair& V1, double s, const Vec& x) {
  return (1.0 - s) * V0.gradient(x) + s * V1.gradient(x);
}

// Newton iteration on grad V_s = 0 with a central-difference Hessian.
std::optional<Vec> newton_critical_point(const LyapunovPair& V0, const LyapunovPair& V1, double s,
                                         Vec x, Annulus box) {
  const Eigen::Index n = x.size();
  for (int it = 0; it < 60; ++it) {
    const Vec g = interpolated_gradient(V0, V1, s, x);
    if (g.norm() < 1e-10) return x;
    const double h = 1e-6 * std::max(1.0, x.norm());
    Mat H(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const Vec e = Vec::Unit(n, j) * h;
      H.col(j) = (interpolated_gradient(V0, V1, s, x + e) - interpolated_gradient(V0, V1, s, x - e)) /
                 (2.0 * h);
    }
    Eigen::FullPivLU<Mat> lu(H);
    if (!lu.isInvertible()) return std::nullopt;
    x -= lu.solve(g);
    const double r = x.norm();
    if (!std::isfinite(r) || r < 0.5 * box.rmin || r > 2.0 * box.rmax) return std::nullopt;
  }
  return std::nullopt;
}

std::string describe(const Vec& x) {
  std::ostringstream os;
  os.precision(6);
  os << "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x(i);
  os << ")";
  return os.str();
}

Vec sample_point(int dim, int k) {
  // Deterministic probe points for endpoint comparisons.
  static thread_local std::vector<std::vector<Vec>> cache(17);
  if (dim < 1 || dim > 16) throw Error(ErrorKind::DimensionMismatch, "unsupported path dimension");
  if (cache[dim].empty()) cache[dim] = sampling::annulus(dim, 20, 0.1, 5.0);
  return cache[dim][static_cast<std::size_t>(k)];
}

}  // namespace

LyapunovPair quadratic_pair(ScalarMap W, std::string label) {
  LyapunovPair p;
  p.label = std::move(label);
  p.V = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
  p.gradV = [](const Vec& x) -> Vec { return x; };
  p.W = std::move(W);
  return p;
}

HomotopyPath straight_line(const FieldDescription& X, const LyapunovPair& pair, Annulus check,
                           int check_samples) {
  const Certificate start = check_decrease_grid(X, pair, check, check_samples);
  if (!start.pass)
    throw Error(ErrorKind::CertificationFailed,
                "pair " + pair.label + " does not certify " + X.name + " (worst margin " +
                    std::to_string(start.worst_margin) + ")");
  HomotopyPath path;
  path.name = "straight_line[" + X.name + " -> -grad " + pair.label + "]";
  path.dim = X.dim;
  path.endpoints_label = {X.name, "-grad " + pair.label};
  path.field_at = [X, pair](double s) {
    FieldDescription f = make_field(
        X.name + "@s", X.dim,
        [X, pair, s](const Vec& x) -> Vec {
          if (s == 1.0) return -pair.gradient(x);
          if (s == 0.0) return X.evaluator(x);
          return (1.0 - s) * X.evaluator(x) - s * pair.gradient(x);
        },
        s < 1.0 ? X.regularity : Regularity::Smooth,
        s < 1.0 ? X.discontinuities : std::vector<double>{});
    f.equilibrium = X.eq();
    return f;
  };
  path.lyap_at = [pair](double s) {
    LyapunovPair p = pair;
    p.W = [pair, s](const Vec& x) {
      return (1.0 - s) * pair.W(x) + s * 0.5 * pair.gradient(x).squaredNorm();
    };
    return p;
  };
  return path;
}

std::vector<CriticalPointWitness> find_spurious_critical_points(const LyapunovPair& V0,
                                                                const LyapunovPair& V1, int dim,
                                                                Annulus check, int s_steps,
                                                                int samples) {
  constexpr std::size_t kCandidates = 8;
  const auto points = sampling::annulus(dim, samples, check.rmin, check.rmax);
  std::vector<CriticalPointWitness> found;
  for (double s : uniform_grid(s_steps)) {
    std::vector<std::pair<double, std::size_t>> ratio;
    ratio.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      ratio.emplace_back(interpolated_gradient(V0, V1, s, points[i]).norm() / points[i].norm(), i);
    const std::size_t k = std::min(kCandidates, ratio.size());
    std::partial_sort(ratio.begin(), ratio.begin() + static_cast<std::ptrdiff_t>(k), ratio.end());
    for (std::size_t c = 0; c < k; ++c) {
      auto hit = newton_critical_point(V0, V1, s, points[ratio[c].second], check);
      if (hit && hit->norm() >= 0.5 * check.rmin) {
        found.push_back({s, *hit});
        break;
      }
    }
  }
  return found;
}

HomotopyPath gradient_interpolation(const LyapunovPair& V0, const LyapunovPair& V1, int dim,
                                    Annulus check) {
  const auto spurious = find_spurious_critical_points(V0, V1, dim, check);
  if (!spurious.empty()) {
    const auto& w = spurious.front();
    throw Error(ErrorKind::SpuriousCriticalPoint,
                "grad V_s vanishes at s=" + std::to_string(w.s) + " x=" + describe(w.x));
  }
  HomotopyPath path;
  path.name = "gradient_interpolation[" + V0.label + " -> " + V1.label + "]";
  path.dim = dim;
  path.endpoints_label = {"-grad " + V0.label, "-grad " + V1.label};
  path.field_at = [V0, V1, dim](double s) {
    return make_field("-grad V_s", dim,
                      [V0, V1, s](const Vec& x) -> Vec { return -interpolated_gradient(V0, V1, s, x); });
  };
  path.lyap_at = [V0, V1](double s) {
    LyapunovPair p;
    p.label = "(1-s)" + V0.label + " + s " + V1.label;
    p.V = [V0, V1, s](const Vec& x) { return (1.0 - s) * V0.V(x) + s * V1.V(x); };
    p.gradV = [V0, V1, s](const Vec& x) { return interpolated_gradient(V0, V1, s, x); };
    p.W = [V0, V1, s](const Vec& x) { return 0.5 * interpolated_gradient(V0, V1, s, x).squaredNorm(); };
    return p;
  };
  return path;
}

Vec flow_homotopy(const FieldDescription& X, double s, const Vec& x, const IntegratorConfig& cfg) {
  if (s < 0.0 || s > 1.0) throw Error(ErrorKind::InvalidArgument, "homotopy parameter outside [0, 1]");
  if (s == 0.0) return X.evaluator(x);
  if (s == 1.0) return -x;
  constexpr double kCap = 1.0 - 1e-3;
  auto at = [&](double sc) {
    const double t = sc / (1.0 - sc);
    return Vec((flow(X, x, t, cfg) - x) / sc);
  };
  if (s <= kCap) return at(s);
  const double w = (s - kCap) / (1.0 - kCap);
  return (1.0 - w) * at(kCap) - w * x;
}

HomotopyPath flow_homotopy_path(const FieldDescription& X, const LyapunovPair& pair,
                                const IntegratorConfig& cfg) {
  HomotopyPath path;
  path.name = "flow_homotopy[" + X.name + "]";
  path.dim = X.dim;
  path.endpoints_label = {X.name, "canonical"};
  auto field = [X, cfg](double s) {
    FieldDescription f = make_field(
        X.name + "@flow", X.dim, [X, s, cfg](const Vec& x) { return flow_homotopy(X, s, x, cfg); },
        s == 0.0 ? X.regularity : Regularity::LipschitzOffOrigin);
    f.equilibrium = X.eq();
    return f;
  };
  path.field_at = field;
  path.lyap_at = [pair, field](double s) {
    return half_decrement_pair(pair.label, pair.V, pair.gradV, field(s).evaluator);
  };
  return path;
}

Vec linear_flow_homotopy(const Mat& A, double s, const Vec& x) {
  if (!hurwitz_check({A}).is_hurwitz)
    throw Error(ErrorKind::NotHurwitz, "linear flow homotopy needs a Hurwitz matrix");
  if (x.size() != A.rows()) throw Error(ErrorKind::DimensionMismatch, "state does not match A");
  if (s < 0.0 || s > 1.0) throw Error(ErrorKind::InvalidArgument, "homotopy parameter outside [0, 1]");
  if (s == 0.0) return A * x;
  if (s == 1.0) return -x;
  const double t = s / (1.0 - s);
  const Mat E = (t * A).exp();
  return (E * x - x) / s;
}

Mat patched_linear_matrix(double s) {
  Mat H(2, 2);
  H << -1.0, std::max(0.0, (1.0 - 2.0 * s) * 10.0), std::max(0.0, (2.0 * s - 1.0) * 10.0), -1.0;
  return H;
}

Vec patched_linear_family(double s, const Vec& x) { return patched_linear_matrix(s) * x; }

HomotopyPath patched_linear_path() {
  HomotopyPath path;
  path.name = "patched_linear";
  path.dim = 2;
  path.endpoints_label = {"A(1)", "A(0)"};
  path.field_at = [](double s) { return linear_field(patched_linear_matrix(s), "patched_linear@s"); };
  path.lyap_at = [](double s) {
    const Mat P = lyapunov_equation({patched_linear_matrix(s)}, Mat::Identity(2, 2));
    LyapunovPair p;
    p.label = "x^T P(s) x";
    p.V = [P](const Vec& x) { return x.dot(P * x); };
    p.gradV = [P](const Vec& x) -> Vec { return 2.0 * P * x; };
    p.W = [](const Vec& x) { return 0.5 * x.squaredNorm(); };
    return p;
  };
  return path;
}

Mat naive_linear_matrix(double s) {
  Mat A1(2, 2), A0(2, 2);
  A1 << -1.0, 10.0, 0.0, -1.0;
  A0 << -1.0, 0.0, 10.0, -1.0;
  return s * A1 + (1.0 - s) * A0;
}

HomotopyPath naive_linear_path() {
  HomotopyPath path;
  path.name = "naive_linear";
  path.dim = 2;
  path.endpoints_label = {"A(0)", "A(1)"};
  path.field_at = [](double s) { return linear_field(naive_linear_matrix(s), "naive_linear@s"); };
  path.lyap_at = [](double) {
    return quadratic_pair([](const Vec& x) { return 0.5 * x.squaredNorm(); });
  };
  return path;
}

Mat rotation_matrix(double s) {
  const double c = std::cos(s * std::numbers::pi), sn = std::sin(s * std::numbers::pi);
  Mat R(2, 2);
  R << c, -sn, sn, c;
  return R;
}

Vec rotation_family(double s, const Vec& x) { return rotation_matrix(s) * x; }

HomotopyPath rotation_path() {
  HomotopyPath path;
  path.name = "rotation_family";
  path.dim = 2;
  path.endpoints_label = {"identity", "canonical"};
  path.field_at = [](double s) { return linear_field(rotation_matrix(s), "rotation@s"); };
  path.lyap_at = [](double) {
    return quadratic_pair([](const Vec& x) { return 0.5 * x.squaredNorm(); });
  };
  return path;
}

double invex_family(double s, double x) {
  const double sn = std::sin(x);
  const double q = 0.5 * (1.0 + s) * x * x + (1.0 - s) * 1.5 * sn * sn;
  return sgn(x) * std::pow(q, 2.0 - 1.5 * s);
}

double exponent_family(double s, double x) {
  return sgn(x) * std::pow(std::abs(x), 0.5 + 1.5 * s);
}

double invex_function(double x) {
  const double sn = std::sin(x);
  return 0.5 * x * x + 1.5 * sn * sn;
}

double invex_potential(double s, double x) {
  if (s <= 0.5) return std::sqrt(std::abs(invex_family(2.0 * s, x)));
  return std::abs(exponent_family(2.0 * s - 1.0, x));
}

double invex_potential_derivative(double s, double x) {
  if (x == 0.0) return 0.0;
  if (s <= 0.5) {
    const double sp = 2.0 * s;
    const double sn = std::sin(x);
    const double q = 0.5 * (1.0 + sp) * x * x + (1.0 - sp) * 1.5 * sn * sn;
    const double dq = (1.0 + sp) * x + (1.0 - sp) * 1.5 * std::sin(2.0 * x);
    const double half_p = 1.0 - 0.75 * sp;
    return half_p * std::pow(q, half_p - 1.0) * dq;
  }
  const double e = 0.5 + 1.5 * (2.0 * s - 1.0);
  return e * sgn(x) * std::pow(std::abs(x), e - 1.0);
}

HomotopyPath invex_descent_path() {
  HomotopyPath path;
  path.name = "invex_descent";
  path.dim = 1;
  path.endpoints_label = {"-v_i'", "-v_q'"};
  path.field_at = [](double s) {
    return make_field(
        "invex_descent@s", 1,
        [s](const Vec& x) { return Vec::Constant(1, -invex_potential_derivative(s, x(0))); },
        Regularity::LipschitzOffOrigin);
  };
  path.lyap_at = [](double s) {
    LyapunovPair p;
    p.label = "P(s, .)";
    p.V = [s](const Vec& x) { return invex_potential(s, x(0)); };
    p.gradV = [s](const Vec& x) { return Vec::Constant(1, invex_potential_derivative(s, x(0))); };
    p.W = [s](const Vec& x) {
      const double d = invex_potential_derivative(s, x(0));
      return 0.5 * d * d;
    };
    return p;
  };
  return path;
}

int derivative_sign_changes(const RealFn& potential, double a, double b, int n) {
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "need at least three grid points");
  const double h = (b - a) / (n - 1);
  int changes = 0;
  double last = 0.0;
  for (int k = 1; k < n - 1; ++k) {
    const double d = potential(a + (k + 1) * h) - potential(a + (k - 1) * h);
    if (d == 0.0) continue;
    if (last != 0.0 && (d > 0.0) != (last > 0.0)) ++changes;
    last = d;
  }
  return changes;
}

Mat spd_sqrt(const Mat& S) {
  if (S.rows() != S.cols()) throw Error(ErrorKind::NotSPD, "matrix is not square");
  if ((S - S.transpose()).norm() > 1e-12 * std::max(1.0, S.norm()))
    throw Error(ErrorKind::NotSPD, "matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(S);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::EigenFailure, "eigensolver failed");
  if (!(es.eigenvalues().minCoeff() > 1e-10))
    throw Error(ErrorKind::NotSPD, "minimum eigenvalue is not positive");
  const Vec root = es.eigenvalues().cwiseMax(1e-14).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

Mat GaussianTransport::sigma(double s) const {
  const Mat mid = (1.0 - s) * sigma0 + s * root;
  const Mat out = sigma0_neg_half * mid * mid * sigma0_neg_half;
  return 0.5 * (out + out.transpose());
}

GaussianTransport gaussian_transport(const Mat& sigma0, const Mat& sigma1) {
  if (sigma0.rows() != sigma1.rows() || sigma0.cols() != sigma1.cols())
    throw Error(ErrorKind::DimensionMismatch, "covariances differ in size");
  (void)spd_sqrt(sigma1);
  GaussianTransport g;
  g.sigma0 = sigma0;
  g.sigma0_half = spd_sqrt(sigma0);
  g.sigma0_neg_half = g.sigma0_half.inverse();
  g.sigma0_neg_half = 0.5 * (g.sigma0_neg_half + g.sigma0_neg_half.transpose());
  Mat inner = g.sigma0_half * sigma1 * g.sigma0_half;
  inner = 0.5 * (inner + inner.transpose());
  g.root = spd_sqrt(inner);
  g.A = g.sigma0_neg_half * g.root * g.sigma0_neg_half;
  return g;
}

HomotopyPath gaussian_ot_path(const Mat& sigma0, const Mat& sigma1) {
  const GaussianTransport g = gaussian_transport(sigma0, sigma1);
  const int n = static_cast<int>(sigma0.rows());
  HomotopyPath path;
  path.name = "gaussian_ot";
  path.dim = n;
  path.endpoints_label = {"-Sigma0^{-1} x", "-Sigma1^{-1} x"};
  auto precision = [g](double s) { return Mat(g.sigma(s).inverse()); };
  path.field_at = [precision, n](double s) {
    const Mat K = precision(s);
    return make_field("gaussian_ot@s", n, [K](const Vec& x) -> Vec { return -K * x; });
  };
  path.lyap_at = [precision](double s) {
    const Mat K = precision(s);
    LyapunovPair p;
    p.label = "<x, Sigma(s)^{-1} x>/2";
    p.V = [K](const Vec& x) { return 0.5 * x.dot(K * x); };
    p.gradV = [K](const Vec& x) -> Vec { return K * x; };
    p.W = [K](const Vec& x) { return 0.5 * (K * x).squaredNorm(); };
    return p;
  };
  return path;
}

HomotopyPath concatenate(const std::vector<HomotopyPath>& paths) {
  if (paths.empty()) throw Error(ErrorKind::InvalidArgument, "nothing to concatenate");
  if (paths.size() == 1) return paths.front();
  for (std::size_t k = 0; k + 1 < paths.size(); ++k) {
    if (paths[k].dim != paths[k + 1].dim)
      throw Error(ErrorKind::DimensionMismatch, "paths live in different dimensions");
    const FieldDescription end = paths[k].field_at(1.0);
    const FieldDescription start = paths[k + 1].field_at(0.0);
    for (int i = 0; i < 20; ++i) {
      const Vec x = sample_point(paths[k].dim, i);
      if ((end.evaluator(x) - start.evaluator(x)).norm() > 1e-6)
        throw Error(ErrorKind::EndpointMismatch,
                    "end of " + paths[k].name + " differs from start of " + paths[k + 1].name +
                        " at " + describe(x));
    }
  }
  const auto K = static_cast<double>(paths.size());
  auto locate = [paths, K](double s) {
    const auto idx = std::min(paths.size() - 1, static_cast<std::size_t>(std::floor(s * K)));
    const double local = std::clamp(s * K - static_cast<double>(idx), 0.0, 1.0);
    return std::pair<std::size_t, double>{idx, local};
  };
  HomotopyPath out;
  out.dim = paths.front().dim;
  out.name = paths.front().name;
  for (std::size_t k = 1; k < paths.size(); ++k) out.name += " + " + paths[k].name;
  out.endpoints_label = {paths.front().endpoints_label.first, paths.back().endpoints_label.second};
  out.field_at = [paths, locate](double s) {
    const auto [idx, local] = locate(s);
    return paths[idx].field_at(local);
  };
  out.lyap_at = [paths, locate](double s) {
    const auto [idx, local] = locate(s);
    return paths[idx].lyap_at(local);
  };
  return out;
}

HomotopyPath reverse(const HomotopyPath& path) {
  HomotopyPath out = path;
  out.name = "reverse[" + path.name + "]";
  out.endpoints_label = {path.endpoints_label.second, path.endpoints_label.first};
  out.field_at = [path](double s) { return path.field_at(1.0 - s); };
  out.lyap_at = [path](double s) { return path.lyap_at(1.0 - s); };
  return out;
}

Vec shifted_equilibrium_family(const Vec& xbar, double s, double t, const Vec& x) {
  const Vec center = s * xbar;
  return center + std::exp(-t) * (x - center);
}

HomotopyPath shifted_equilibrium_path(const Vec& xbar) {
  HomotopyPath path;
  path.name = "shifted_equilibrium";
  path.dim = static_cast<int>(xbar.size());
  path.endpoints_label = {"canonical", "canonical shifted"};
  path.field_at = [xbar](double s) {
    const Vec center = s * xbar;
    FieldDescription f = make_field("shifted@s", static_cast<int>(xbar.size()),
                                    [center](const Vec& x) -> Vec { return center - x; });
    f.equilibrium = center;
    return f;
  };
  path.lyap_at = [xbar](double s) {
    const Vec center = s * xbar;
    LyapunovPair p;
    p.label = "|x - s xbar|^2/2";
    p.V = [center](const Vec& x) { return 0.5 * (x - center).squaredNorm(); };
    p.gradV = [center](const Vec& x) -> Vec { return x - center; };
    p.W = [center](const Vec& x) { return 0.5 * (x - center).squaredNorm(); };
    return p;
  };
  return path;
}

void write_path_samples(const HomotopyPath& path, const std::vector<double>& s_grid,
                        const std::vector<Vec>& points, std::ostream& out) {
  out << "s";
  for (int i = 1; i <= path.dim; ++i) out << ",x" << i;
  for (int i = 1; i <= path.dim; ++i) out << ",f" << i;
  out << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.12g", v);
    out << buf;
  };
  for (double s : s_grid) {
    const FieldDescription f = path.field_at(s);
    for (const Vec& x : points) {
      std::snprintf(buf, sizeof buf, "%.6f", s);
      out << buf;
      for (Eigen::Index i = 0; i < x.size(); ++i) put(x(i));
      const Vec v = f.evaluator(x);
      for (Eigen::Index i = 0; i < v.size(); ++i) put(v(i));
      out << '\n';
    }
  }
}

}  // namespace stabhom
