#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gpmix {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Supported families, each written canonically as
///   p_theta(x) = exp(theta' s(x) - kappa(theta))  w.r.t. a base measure lambda,
/// with the conjugate prior pi(theta) ∝ exp(xi' theta - nu kappa(theta)).
///
/// | family                 | s(x)     | Theta            | M                  | lambda            |
/// |------------------------|----------|------------------|--------------------|-------------------|
/// | GaussianKnownVariance  | x        | R^d              | R^d                | prod N(0, var_i)  |
/// | NormalGamma            | (x, x^2) | R x (-inf, 0)    | {mu2 > mu1^2}      | Lebesgue          |
/// | ExponentialGamma       | x        | (-inf, 0)        | (0, inf)           | Lebesgue on (0,∞) |
/// | PoissonGamma           | x        | R                | (0, inf)           | counting / x!     |
/// | GeometricBeta          | x        | (-inf, 0)        | (0, inf)           | counting on N     |
///
/// All five are full, nonempty, regular and identifiable; kappa is finite on
/// the open Theta above and kappa'' is positive definite there. Marginals m()
/// are densities with respect to lambda^n.
enum class FamilyKind { GaussianKnownVariance, NormalGamma, ExponentialGamma, PoissonGamma, GeometricBeta };

struct LegendrePoint {
  double value;  ///< Lambda(mu) = sup_theta (theta' mu - kappa(theta))
  Vec theta;     ///< the maximizer, kappa'^{-1}(mu)
};

class ExponentialFamily {
 public:
  static ExponentialFamily gaussian_known_variance(std::vector<double> variances);
  static ExponentialFamily normal_gamma();
  static ExponentialFamily exponential_gamma();
  static ExponentialFamily poisson_gamma();
  static ExponentialFamily geometric_beta();
  /// Accepts the names used in config files ("poisson_gamma", ...).
  static ExponentialFamily from_name(const std::string& name, std::vector<double> variances = {});

  FamilyKind kind() const { return kind_; }
  std::string name() const;
  int stat_dim() const;
  int data_dim() const;
  bool is_discrete() const;
  const std::vector<double>& variances() const { return variances_; }

  bool in_sample_space(const Vec& x) const;
  Vec stat(const Vec& x) const;

  /// Empty string when theta lies in Theta, otherwise the violated constraint.
  std::string theta_violation(const Vec& theta) const;
  bool in_theta(const Vec& theta) const { return theta_violation(theta).empty(); }
  bool in_moment_space(const Vec& mu) const;
  bool in_xi(const Vec& xi, double nu) const;

  /// Closed forms; throw DomainError outside Theta.
  double kappa(const Vec& theta) const;
  Vec kappa_prime(const Vec& theta) const;
  Mat kappa_hess(const Vec& theta) const;

  /// Closed-form Legendre transform; throws DomainError when mu is outside M.
  LegendrePoint legendre(const Vec& mu) const;
  /// Damped Newton on theta' mu - kappa(theta) (gradient tolerance 1e-12,
  /// 50 iterations) with bisection fallback in one dimension.
  LegendrePoint legendre_newton(const Vec& mu) const;

  /// log p_theta(x) with respect to lambda.
  double log_density(const Vec& theta, const Vec& x) const;

  /// psi(xi, nu) = log ∫_Theta exp(xi' theta - nu kappa(theta)) dtheta.
  /// The span overload skips validation and is meant for inner loops.
  double log_psi(std::span<const double> xi, double nu) const;
  double log_psi(const Vec& xi, double nu) const;

  /// An interior reference point of Theta (used to seed solvers).
  Vec reference_theta() const;

 private:
  ExponentialFamily(FamilyKind k, std::vector<double> var) : kind_(k), variances_(std::move(var)) {}
  void require_theta(const Vec& theta) const;

  FamilyKind kind_;
  std::vector<double> variances_;
};

/// Conjugate hyperparameters (xi, nu) with xi/nu in the moment space.
struct ConjugateHyper {
  Vec xi;
  double nu = 1.0;
};

/// Validates (xi, nu) in Xi; throws DomainError naming the violated constraint.
ConjugateHyper make_hyper(const ExponentialFamily& family, Vec xi, double nu);

/// log m(x_J) from the summed sufficient statistics of J and |J|;
/// psi(xi + sum, nu + count) - psi(xi, nu), and 0 for count = 0.
double log_marginal_from_sum(const ExponentialFamily& family, const ConjugateHyper& hyper,
                             std::span<const double> stat_sum, int count);

/// log m(x_J) for the listed points.
double log_marginal(const ExponentialFamily& family, const ConjugateHyper& hyper,
                    std::span<const Vec> points);

struct MomentPoint {
  Vec mu;
  bool in_moment_space;
};

/// mu_x = (xi + sum s(x_j)) / (nu + n) for a nonempty set of points.
MomentPoint mu_x(const ExponentialFamily& family, const ConjugateHyper& hyper, std::span<const Vec> points);

/// log m~(x) = -(k/2) log(nu + n) + (nu + n) Lambda(mu_x).
double log_marginal_tilde(const ExponentialFamily& family, const ConjugateHyper& hyper,
                          std::span<const Vec> points);
double log_marginal_tilde_from_sum(const ExponentialFamily& family, const ConjugateHyper& hyper,
                                   std::span<const double> stat_sum, int count);

}  // namespace gpmix
