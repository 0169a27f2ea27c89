#include "stabhom/index.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Eigenvalues>

namespace stabhom {

namespace {

void require_square(const Mat& A) {
  if (A.rows() != A.cols() || A.rows() == 0)
    throw Error(ErrorKind::DimensionMismatch, "matrix must be square and nonempty");
  if (!A.allFinite()) throw Error(ErrorKind::InvalidArgument, "matrix has non-finite entries");
}

// Winding count at a fixed resolution; empty when some increment exceeds pi/2.
std::optional<int> winding_at(const FieldDescription& field, double radius, int samples) {
  const double two_pi = 2.0 * std::numbers::pi;
  auto angle_at = [&](int k) {
    const double theta = two_pi * k / samples;
    Vec x(2);
    x << radius * std::cos(theta), radius * std::sin(theta);
    const Vec f = field.evaluator(x);
    if (!(f.norm() > 1e-8))
      throw Error(ErrorKind::VanishesOnCircle, "field vanishes on the winding circle");
    return std::atan2(f(1), f(0));
  };
  const double first = angle_at(0);
  double prev = first;
  double total = 0.0;
  bool resolved = true;
  for (int k = 1; k <= samples; ++k) {
    const double a = k == samples ? first : angle_at(k);
    double d = a - prev;
    while (d > std::numbers::pi) d -= two_pi;
    while (d <= -std::numbers::pi) d += two_pi;
    if (std::abs(d) > std::numbers::pi / 2) resolved = false;
    total += d;
    prev = a;
  }
  if (!resolved) return std::nullopt;
  return static_cast<int>(std::lround(total / two_pi));
}

}  // namespace

HurwitzResult hurwitz_check(const LinearSystem& sys) {
  require_square(sys.A);
  Eigen::EigenSolver<Mat> solver;
  solver.setMaxIterations(1000);
  solver.compute(sys.A, false);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::EigenFailure, "eigenvalue iteration did not converge");
  const double m = solver.eigenvalues().real().maxCoeff();
  return {m, m < 0.0};
}

Mat lyapunov_equation(const LinearSystem& sys, const Mat& Q) {
  require_square(sys.A);
  const Eigen::Index n = sys.A.rows();
  if (Q.rows() != n || Q.cols() != n)
    throw Error(ErrorKind::DimensionMismatch, "Q must match A");
  if (!hurwitz_check(sys).is_hurwitz)
    throw Error(ErrorKind::NotHurwitz, "Lyapunov equation needs a Hurwitz matrix");
  // vec(A^T P + P A) = (I (x) A^T + A^T (x) I) vec(P), column-major vec.
  const Mat At = sys.A.transpose();
  const Mat I = Mat::Identity(n, n);
  Mat K = Mat::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * At;
      K.block(i * n, j * n, n, n) += At(i, j) * I;
    }
  Eigen::FullPivLU<Mat> lu(K);
  if (lu.rank() < n * n) throw Error(ErrorKind::SingularSystem, "Lyapunov operator is singular");
  const Vec rhs = -Eigen::Map<const Vec>(Q.data(), n * n);
  const Vec p = lu.solve(rhs);
  Mat P = Eigen::Map<const Mat>(p.data(), n, n);
  P = 0.5 * (P + P.transpose());
  return P;
}

FieldDescription linear_field(const Mat& A, std::string name) {
  require_square(A);
  return make_field(std::move(name), static_cast<int>(A.rows()),
                    [A](const Vec& x) -> Vec { return A * x; });
}

int winding_number(const FieldDescription& field, double radius, int samples) {
  if (field.dim != 2) throw Error(ErrorKind::DimensionMismatch, "winding number needs n = 2");
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidArgument, "radius must be positive");
  if (samples < 8) samples = 8;
  std::optional<int> prev = winding_at(field, radius, samples);
  for (int round = 0; round < 16; ++round) {
    samples *= 2;
    const std::optional<int> cur = winding_at(field, radius, samples);
    if (prev && cur && *prev == *cur) return *cur;
    prev = cur;
  }
  if (prev) return *prev;
  throw Error(ErrorKind::VanishesOnCircle, "winding increments never resolved");
}

}  // namespace stabhom
