#pragma once

#include <string>
#include <vector>

#include "gpmix/expfam.hpp"

namespace gpmix {

/// Compact box U in the moment space, scanned on a regular grid with
/// `grid` points per axis when sups and infs have to be found numerically.
struct MomentSpaceBox {
  Vec lo;
  Vec hi;
  int grid = 33;
};

/// Throws Refusal unless the box is nondegenerate and its corners (hence,
/// by convexity of M, the whole box) lie in the moment space.
void validate_box(const ExponentialFamily& family, const MomentSpaceBox& box);

/// All grid points of the box, last axis varying fastest.
std::vector<Vec> box_grid(const MomentSpaceBox& box);

/// Two-sided bound on m/m~ over a box, together with the constants behind it.
struct LaplaceCertificate {
  MomentSpaceBox box;
  double epsilon = 0.0;
  double alpha = 0.0;  ///< lower bound on the eigenvalues of kappa'' over V_eps
  double beta = 0.0;   ///< upper bound on the eigenvalues of kappa'' over V_eps
  double gamma = 0.0;  ///< >= sup_U exp(psi(mu, 1) - Lambda(mu))
  double delta = 0.0;  ///< <= inf_U inf_{|u|=1} h(mu, theta_mu + eps u)
  double log_c1 = 0.0;
  double log_c2 = 0.0;
  double log_C1 = 0.0;  ///< log c1 - psi(xi, nu)
  double log_C2 = 0.0;  ///< log c2 - psi(xi, nu)
  int direction_grid = 0;  ///< unit directions scanned for delta (0 when exact)
};

/// h(mu, theta) = Lambda(mu) - theta' mu + kappa(theta) >= 0.
double legendre_gap(const ExponentialFamily& family, const Vec& mu, const LegendrePoint& lp, const Vec& theta);

/// Constants for the ball of radius eps around theta_mu: exact eigenvalue
/// range of kappa'' on the ball (monotone or constant cases, grid with a
/// 0.5/2 margin otherwise) and the infimum of h on the sphere.
struct LocalLaplaceConstants {
  double a = 0.0;
  double b = 0.0;
  double delta = 0.0;
};
/// Throws Refusal when the ball is not inside Theta.
LocalLaplaceConstants local_laplace_constants(const ExponentialFamily& family, const Vec& mu, double eps);

/// Both sides of the Laplace sandwich for g(t) = ∫ exp(t (theta' mu - kappa(theta))) dtheta,
/// on the log scale and relative to exp(t Lambda(mu)), with A = aI and B = bI:
///   lower = log[(2pi/t)^{k/2} C(t,eps,B) / b^{k/2}]
///   upper = log[(2pi/t)^{k/2} C(t,eps,A) / a^{k/2} + exp(-(t-s) delta - s Lambda(mu)) g(s)]
/// and, for reference, log g(t) - t Lambda(mu) by quadrature.
struct LaplaceSandwich {
  double lower = 0.0;
  double upper = 0.0;
  double quadrature = 0.0;
};

/// Refuses when the ball is not in Theta, a <= kappa'' <= b cannot be
/// verified on it, or delta exceeds the infimum of h on the sphere.
LaplaceSandwich laplace_sandwich(const ExponentialFamily& family, const Vec& mu, double t, double eps, double delta,
                                 double a, double b, double s = 1.0);

/// log g(t) - t Lambda(mu) by adaptive quadrature (double exponential rules
/// after centering at theta_mu and scaling by the curvature). Separable in
/// the Gaussian case; one-dimensional otherwise. NormalGamma is refused.
double log_laplace_integral(const ExponentialFamily& family, const Vec& mu, double t);

/// Searches eps in {1/2, 1/4, ..., 2^-20} for V_eps inside Theta and
/// assembles c1, c2 and C_i = c_i exp(-psi(xi, nu)). Throws Refusal when the
/// box is not strictly inside M or no eps works.
LaplaceCertificate certify_box(const ExponentialFamily& family, const ConjugateHyper& hyper,
                               const MomentSpaceBox& box);

/// C = C2 exp(C0) / C1^2 for the box hull(U ∪ {xi/nu}), enlarged to its
/// bounding box.
struct SplittingBound {
  MomentSpaceBox box;        ///< U, where the preconditions are checked
  LaplaceCertificate hull;   ///< certificate on the bounding box of hull(U ∪ {xi/nu})
  double C0 = 0.0;
  double log_C = 0.0;
};

SplittingBound splitting_bound(const ExponentialFamily& family, const ConjugateHyper& hyper,
                               const MomentSpaceBox& box);

enum class SplitStatus { Holds, Violated, Skipped };

struct SplitCheck {
  SplitStatus status = SplitStatus::Skipped;
  std::string reason;  ///< set when skipped
  double log_ratio = 0.0;  ///< log m(x) - log m(x_A) - log m(x_B)
  double log_bound = 0.0;  ///< log C + (k/2) log(ab / (nu + n))
};

/// Checks m(x) <= C (ab/(nu+n))^{k/2} m(x_A) m(x_B) for the split given by
/// `in_a`. Skips when A or B is empty or a precondition point leaves U.
SplitCheck splitting_check(const ExponentialFamily& family, const ConjugateHyper& hyper,
                           const SplittingBound& bound, std::span<const Vec> data, const std::vector<bool>& in_a);

}  // namespace gpmix
