#pragma once

#include <iosfwd>
#include <vector>

#include "stabhom/core.hpp"
#include "stabhom/integrate.hpp"
#include "stabhom/lyapunov.hpp"
#include "stabhom/path.hpp"

namespace stabhom {

/// Quadratic pair V = |x|^2/2 with the given W.
[[nodiscard]] LyapunovPair quadratic_pair(ScalarMap W, std::string label = "|x|^2/2");

/// H(s, x) = (1 - s) X(x) - s grad V(x), certified by V throughout with
/// W_s = (1 - s) W + s |grad V|^2 / 2. Throws CertificationFailed when the pair does
/// not certify X on the check annulus.
[[nodiscard]] HomotopyPath straight_line(const FieldDescription& X, const LyapunovPair& pair,
                                         Annulus check = {1e-2, 10.0}, int check_samples = 1024);

/// s -> -grad((1 - s) V0 + s V1), certified by the interpolated function with
/// W = |grad V_s|^2 / 2. Throws SpuriousCriticalPoint (with the point in the message)
/// when some interpolant has a critical point in the annulus.
[[nodiscard]] HomotopyPath gradient_interpolation(const LyapunovPair& V0, const LyapunovPair& V1,
                                                  int dim, Annulus check = {1e-2, 10.0});

/// Critical point of some interpolant on the s grid, if one exists (Newton-refined).
struct CriticalPointWitness {
  double s = 0.0;
  Vec x;
};
[[nodiscard]] std::vector<CriticalPointWitness> find_spurious_critical_points(
    const LyapunovPair& V0, const LyapunovPair& V1, int dim, Annulus check, int s_steps = 21,
    int samples = 2048);

/// H(s, x) = (phi^{s/(1-s)}(x; X) - x)/s with H(0, .) = X and H(1, .) = -id; blended
/// linearly to -x for s > 1 - 1e-3.
[[nodiscard]] Vec flow_homotopy(const FieldDescription& X, double s, const Vec& x,
                                const IntegratorConfig& cfg = {});
/// Flow homotopy path; each member is certified by strict decrease of pair.V.
[[nodiscard]] HomotopyPath flow_homotopy_path(const FieldDescription& X, const LyapunovPair& pair,
                                              const IntegratorConfig& cfg = {});

/// Closed form (e^{tA} - I) x / s, t = s/(1 - s), for Hurwitz A.
[[nodiscard]] Vec linear_flow_homotopy(const Mat& A, double s, const Vec& x);

/// The matrix [[-1, max(0, 10(1-2s))], [max(0, 10(2s-1)), -1]].
[[nodiscard]] Mat patched_linear_matrix(double s);
[[nodiscard]] Vec patched_linear_family(double s, const Vec& x);
/// Certified per s by V = x^T P(s) x with A(s)^T P + P A(s) = -I and W = |x|^2/2.
[[nodiscard]] HomotopyPath patched_linear_path();

/// s A1 + (1 - s) A0 with A1 = [[-1, 10], [0, -1]], A0 = [[-1, 0], [10, -1]].
[[nodiscard]] Mat naive_linear_matrix(double s);
/// Certified (unsuccessfully) by V = |x|^2/2, W = |x|^2/2.
[[nodiscard]] HomotopyPath naive_linear_path();

[[nodiscard]] Mat rotation_matrix(double s);
[[nodiscard]] Vec rotation_family(double s, const Vec& x);
/// Rotation path with the quadratic pair (negative control).
[[nodiscard]] HomotopyPath rotation_path();

/// sgn(x) (((1+s)/2) x^2 + (1-s)(3/2) sin^2 x)^{2 - 3s/2}.
[[nodiscard]] double invex_family(double s, double x);
/// sgn(x) |x|^{1/2 + 3s/2}.
[[nodiscard]] double exponent_family(double s, double x);
/// v_i(x) = x^2/2 + (3/2) sin^2 x.
[[nodiscard]] double invex_function(double x);
/// Potential path: sqrt|H_i(2s, x)| for s <= 1/2, then |x|^{1/2 + 3(2s-1)/2}.
[[nodiscard]] double invex_potential(double s, double x);
[[nodiscard]] double invex_potential_derivative(double s, double x);
/// Descent fields x' = -P'(s, x) certified by P(s, .) itself.
[[nodiscard]] HomotopyPath invex_descent_path();
/// Sign changes of the derivative of `potential` on an n-point grid of [a, b].
[[nodiscard]] int derivative_sign_changes(const RealFn& potential, double a, double b, int n);

struct GaussianTransport {
  Mat A;        // optimal linear map
  Mat root;     // (Sigma0^{1/2} Sigma1 Sigma0^{1/2})^{1/2}
  Mat sigma0_half;
  Mat sigma0_neg_half;
  Mat sigma0;

  [[nodiscard]] Mat sigma(double s) const;
};

/// Symmetric square root by eigendecomposition; throws NotSPD.
[[nodiscard]] Mat spd_sqrt(const Mat& S);
[[nodiscard]] GaussianTransport gaussian_transport(const Mat& sigma0, const Mat& sigma1);
/// s -> -Sigma(s)^{-1} x certified by V = <x, Sigma(s)^{-1} x>/2, W = |Sigma(s)^{-1} x|^2/2.
[[nodiscard]] HomotopyPath gaussian_ot_path(const Mat& sigma0, const Mat& sigma1);

/// Uniform reparametrization of consecutive paths; throws EndpointMismatch.
[[nodiscard]] HomotopyPath concatenate(const std::vector<HomotopyPath>& paths);
/// s -> path(1 - s).
[[nodiscard]] HomotopyPath reverse(const HomotopyPath& path);

/// e^{-t} x + s (1 - e^{-t}) xbar.
[[nodiscard]] Vec shifted_equilibrium_family(const Vec& xbar, double s, double t, const Vec& x);
/// x' = -(x - s xbar) with V = |x - s xbar|^2/2.
[[nodiscard]] HomotopyPath shifted_equilibrium_path(const Vec& xbar);

/// CSV `s,x1..xn,f1..fn` on the given s grid and points.
void write_path_samples(const HomotopyPath& path, const std::vector<double>& s_grid,
                        const std::vector<Vec>& points, std::ostream& out);

}  // namespace stabhom
