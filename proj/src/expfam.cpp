#include "gpmix/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpmix/errors.hpp"
#include "gpmix/numerics.hpp"

namespace gpmix {

namespace {

std::string fmt_vec(const Vec& v) {
  std::ostringstream os;
  os << "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  os << ")";
  return os.str();
}

bool is_count(double x) { return std::isfinite(x) && x >= 0.0 && x == std::floor(x); }

}  // namespace

ExponentialFamily ExponentialFamily::gaussian_known_variance(std::vector<double> variances) {
  if (variances.empty()) throw DomainError("gaussian_known_variance needs at least one axis");
  for (double v : variances) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("gaussian_known_variance: variances must be positive");
  }
  return ExponentialFamily(FamilyKind::GaussianKnownVariance, std::move(variances));
}
ExponentialFamily ExponentialFamily::normal_gamma() { return {FamilyKind::NormalGamma, {}}; }
ExponentialFamily ExponentialFamily::exponential_gamma() { return {FamilyKind::ExponentialGamma, {}}; }
ExponentialFamily ExponentialFamily::poisson_gamma() { return {FamilyKind::PoissonGamma, {}}; }
ExponentialFamily ExponentialFamily::geometric_beta() { return {FamilyKind::GeometricBeta, {}}; }

ExponentialFamily ExponentialFamily::from_name(const std::string& name, std::vector<double> variances) {
  if (name == "gaussian_known_variance" || name == "gaussian") {
    if (variances.empty()) variances = {1.0};
    return gaussian_known_variance(std::move(variances));
  }
  if (name == "normal_gamma") return normal_gamma();
  if (name == "exponential_gamma" || name == "exponential") return exponential_gamma();
  if (name == "poisson_gamma" || name == "poisson") return poisson_gamma();
  if (name == "geometric_beta" || name == "geometric") return geometric_beta();
  throw DomainError("unknown family '" + name +
                    "' (expected gaussian_known_variance, normal_gamma, exponential_gamma, poisson_gamma, "
                    "geometric_beta)");
}

std::string ExponentialFamily::name() const {
  switch (kind_) {
    case FamilyKind::GaussianKnownVariance: return "gaussian_known_variance";
    case FamilyKind::NormalGamma: return "normal_gamma";
    case FamilyKind::ExponentialGamma: return "exponential_gamma";
    case FamilyKind::PoissonGamma: return "poisson_gamma";
    case FamilyKind::GeometricBeta: return "geometric_beta";
  }
  return "?";
}

int ExponentialFamily::stat_dim() const {
  switch (kind_) {
    case FamilyKind::GaussianKnownVariance: return static_cast<int>(variances_.size());
    case FamilyKind::NormalGamma: return 2;
    default: return 1;
  }
}

int ExponentialFamily::data_dim() const {
  return kind_ == FamilyKind::GaussianKnownVariance ? static_cast<int>(variances_.size()) : 1;
}

bool ExponentialFamily::is_discrete() const {
  return kind_ == FamilyKind::PoissonGamma || kind_ == FamilyKind::GeometricBeta;
}

bool ExponentialFamily::in_sample_space(const Vec& x) const {
  if (x.size() != data_dim() || !x.allFinite()) return false;
  switch (kind_) {
    case FamilyKind::GaussianKnownVariance:
    case FamilyKind::NormalGamma: return true;
    case FamilyKind::ExponentialGamma: return x[0] > 0.0;
    case FamilyKind::PoissonGamma:
    case FamilyKind::GeometricBeta: return is_count(x[0]);
  }
  return false;
}

Vec ExponentialFamily::stat(const Vec& x) const {
  if (kind_ == FamilyKind::NormalGamma) {
    Vec s(2);
    s << x[0], x[0] * x[0];
    return s;
  }
  return x;
}

std::string ExponentialFamily::theta_violation(const Vec& theta) const {
  if (theta.size() != stat_dim()) return "theta must have dimension " + std::to_string(stat_dim());
  if (!theta.allFinite()) return "theta must be finite";
  switch (kind_) {
    case FamilyKind::NormalGamma:
      if (!(theta[1] < 0.0)) return "normal_gamma requires theta_2 < 0";
      break;
    case FamilyKind::ExponentialGamma:
      if (!(theta[0] < 0.0)) return "exponential_gamma requires theta < 0";
      break;
    case FamilyKind::GeometricBeta:
      if (!(theta[0] < 0.0)) return "geometric_beta requires theta < 0";
      break;
    default: break;
  }
  return {};
}

void ExponentialFamily::require_theta(const Vec& theta) const {
  const auto why = theta_violation(theta);
  if (!why.empty()) throw DomainError("theta " + fmt_vec(theta) + " outside Theta: " + why);
}

bool ExponentialFamily::in_moment_space(const Vec& mu) const {
  if (mu.size() != stat_dim() || !mu.allFinite()) return false;
  switch (kind_) {
    case FamilyKind::GaussianKnownVariance: return true;
    case FamilyKind::NormalGamma: return mu[1] > mu[0] * mu[0];
    default: return mu[0] > 0.0;
  }
}

bool ExponentialFamily::in_xi(const Vec& xi, double nu) const {
  if (!(nu > 0.0) || !std::isfinite(nu)) return false;
  return in_moment_space(xi / nu);
}

double ExponentialFamily::kappa(const Vec& theta) const {
  require_theta(theta);
  switch (kind_) {
    case FamilyKind::GaussianKnownVariance: {
      double acc = 0.0;
      for (std::size_t i = 0; i < variances_.size(); ++i) acc += 0.5 * variances_[i] * theta[i] * theta[i];
      return acc;
    }
    case FamilyKind::NormalGamma:
      return -theta[0] * theta[0] / (4.0 * theta[1]) - 0.5 * std::log(-2.0 * theta[1]) + 0.5 * kLog2Pi;
    case FamilyKind::ExponentialGamma: return -std::log(-theta[0]);
    case FamilyKind::PoissonGamma: return std::exp(theta[0]);
    case FamilyKind::GeometricBeta: return -std::log(-std::expm1(theta[0]));
  }
  return 0.0;
}

Vec ExponentialFamily::kappa_prime(const Vec& theta) const {
  require_theta(theta);
  Vec g(stat_dim());
  switch (kind_) {
    case FamilyKind::GaussianKnownVariance:
      for (std::size_t i = 0; i < variances_.size(); ++i) g[i] = variances_[i] * theta[i];
      break;
    case FamilyKind::NormalGamma:
      g[0] = -theta[0] / (2.0 * theta[1]);
      g[1] = theta[0] * theta[0] / (4.0 * theta[1] * theta[1]) - 1.0 / (2.0 * theta[1]);
      break;
    case FamilyKind::ExponentialGamma: g[0] = -1.0 / theta[0]; break;
    case FamilyKind::PoissonGamma: g[0] = std::exp(theta[0]); break;
    case FamilyKind::GeometricBeta: g[0] = std::exp(theta[0]) / -std::expm1(theta[0]); break;
  }
  return g;
}

Mat ExponentialFamily::kappa_hess(const Vec& theta) const {
  require_theta(theta);
  const int k = stat_dim();
  Mat h = Mat::Zero(k, k);
  switch (kind_) {
    case FamilyKind::GaussianKnownVariance:
      for (int i = 0; i < k; ++i) h(i, i) = variances_[i];
      break;
    case FamilyKind::NormalGamma: {
      const double a = theta[0], b = theta[1];
      h(0, 0) = -1.0 / (2.0 * b);
      h(0, 1) = h(1, 0) = a / (2.0 * b * b);
      h(1, 1) = -a * a / (2.0 * b * b * b) + 1.0 / (2.0 * b * b);
      break;
    }
    case FamilyKind::ExponentialGamma: h(0, 0) = 1.0 / (theta[0] * theta[0]); break;
    case FamilyKind::PoissonGamma: h(0, 0) = std::exp(theta[0]); break;
    case FamilyKind::GeometricBeta: {
      const double q = std::exp(theta[0]);
      const double one_minus = -std::expm1(theta[0]);
      h(0, 0) = q / (one_minus * one_minus);
      break;
    }
  }
  return h;
}

LegendrePoint ExponentialFamily::legendre(const Vec& mu) const {
  if (!in_moment_space(mu)) throw DomainError("mu " + fmt_vec(mu) + " is outside the moment space of " + name());
  Vec theta(stat_dim());
  double value = 0.0;
  switch (kind_) {
    case FamilyKind::GaussianKnownVariance:
      for (std::size_t i = 0; i < variances_.size(); ++i) {
        theta[i] = mu[i] / variances_[i];
        value += 0.5 * mu[i] * mu[i] / variances_[i];
      }
      break;
    case FamilyKind::NormalGamma: {
      const double var = mu[1] - mu[0] * mu[0];
      theta[0] = mu[0] / var;
      theta[1] = -0.5 / var;
      value = -0.5 * (kLog2Pi + std::log(var)) - 0.5;
      break;
    }
    case FamilyKind::ExponentialGamma:
      theta[0] = -1.0 / mu[0];
      value = -1.0 - std::log(mu[0]);
      break;
    case FamilyKind::PoissonGamma:
      theta[0] = std::log(mu[0]);
      value = mu[0] * std::log(mu[0]) - mu[0];
      break;
    case FamilyKind::GeometricBeta:
      theta[0] = std::log(mu[0]) - std::log1p(mu[0]);
      value = mu[0] * std::log(mu[0]) - (1.0 + mu[0]) * std::log1p(mu[0]);
      break;
  }
  return {value, theta};
}

Vec ExponentialFamily::reference_theta() const {
  Vec t = Vec::Zero(stat_dim());
  switch (kind_) {
    case FamilyKind::NormalGamma: t[1] = -0.5; break;
    case FamilyKind::ExponentialGamma:
    case FamilyKind::GeometricBeta: t[0] = -1.0; break;
    default: break;
  }
  return t;
}

LegendrePoint ExponentialFamily::legendre_newton(const Vec& mu) const {
  if (!in_moment_space(mu)) throw DomainError("mu " + fmt_vec(mu) + " is outside the moment space of " + name());
  auto objective = [&](const Vec& th) { return th.dot(mu) - kappa(th); };
  Vec theta = reference_theta();
  bool converged = false;
  for (int iter = 0; iter < 50; ++iter) {
    const Vec grad = mu - kappa_prime(theta);
    if (grad.lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, mu.lpNorm<Eigen::Infinity>())) {
      converged = true;
      break;
    }
    const Vec step = kappa_hess(theta).ldlt().solve(grad);
    const double f0 = objective(theta);
    double scale = 1.0;
    Vec next = theta + step;
    while (scale > 1e-12 && (!in_theta(next) || objective(next) < f0 - 1e-15 * std::fabs(f0))) {
      scale *= 0.5;
      next = theta + scale * step;
    }
    if (scale <= 1e-12) break;
    theta = next;
  }
  if (!converged && stat_dim() == 1) {
    // Bisection on kappa'(theta) = mu, kappa' increasing.
    double lo = reference_theta()[0] - 1.0, hi = reference_theta()[0];
    const double upper_limit = (kind_ == FamilyKind::ExponentialGamma || kind_ == FamilyKind::GeometricBeta)
                                   ? 0.0
                                   : kInf;
    auto kp = [&](double t) { return kappa_prime(Vec::Constant(1, t))[0]; };
    while (kp(lo) > mu[0]) lo = lo * 2.0 - 1.0;
    if (std::isinf(upper_limit)) {
      while (kp(hi) < mu[0]) hi = hi * 2.0 + 1.0;
    } else {
      hi = upper_limit;
    }
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid >= upper_limit || kp(mid) > mu[0]) hi = mid; else lo = mid;
    }
    theta[0] = 0.5 * (lo + hi);
  }
  return {objective(theta), theta};
}

double ExponentialFamily::log_density(const Vec& theta, const Vec& x) const {
  return theta.dot(stat(x)) - kappa(theta);
}

double ExponentialFamily::log_psi(std::span<const double> xi, double nu) const {
  switch (kind_) {
    case FamilyKind::GaussianKnownVariance: {
      double acc = 0.0;
      for (std::size_t i = 0; i < variances_.size(); ++i) {
        const double prec = nu * variances_[i];
        acc += xi[i] * xi[i] / (2.0 * prec) + 0.5 * (kLog2Pi - std::log(prec));
      }
      return acc;
    }
    case FamilyKind::NormalGamma: {
      const double rate = 0.5 * (xi[1] - xi[0] * xi[0] / nu);
      const double shape = 0.5 * (nu + 3.0);
      return -std::log(2.0) + 0.5 * (kLog2Pi - std::log(nu)) - 0.5 * nu * kLog2Pi + std::lgamma(shape) -
             shape * std::log(rate);
    }
    case FamilyKind::ExponentialGamma: return std::lgamma(nu + 1.0) - (nu + 1.0) * std::log(xi[0]);
    case FamilyKind::PoissonGamma: return std::lgamma(xi[0]) - xi[0] * std::log(nu);
    case FamilyKind::GeometricBeta:
      return std::lgamma(xi[0]) + std::lgamma(nu + 1.0) - std::lgamma(xi[0] + nu + 1.0);
  }
  return 0.0;
}

double ExponentialFamily::log_psi(const Vec& xi, double nu) const {
  if (xi.size() != stat_dim() || !in_xi(xi, nu)) {
    throw DomainError("(xi, nu) = (" + fmt_vec(xi) + ", " + std::to_string(nu) + ") outside Xi for " + name() +
                      ": need nu > 0 and xi/nu in the moment space");
  }
  return log_psi(std::span<const double>(xi.data(), xi.size()), nu);
}

ConjugateHyper make_hyper(const ExponentialFamily& family, Vec xi, double nu) {
  if (xi.size() != family.stat_dim()) {
    throw DomainError("xi must have dimension " + std::to_string(family.stat_dim()) + " for " + family.name());
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nu must be positive (got " + std::to_string(nu) + ")");
  if (!family.in_moment_space(xi / nu)) {
    throw DomainError("xi/nu = " + fmt_vec(xi / nu) + " is outside the moment space of " + family.name());
  }
  return {std::move(xi), nu};
}

double log_marginal_from_sum(const ExponentialFamily& family, const ConjugateHyper& hyper,
                             std::span<const double> stat_sum, int count) {
  if (count == 0) return 0.0;
  const int k = family.stat_dim();
  double buf[8];
  std::vector<double> heap;
  double* post = buf;
  if (k > 8) {
    heap.resize(k);
    post = heap.data();
  }
  for (int i = 0; i < k; ++i) post[i] = hyper.xi[i] + stat_sum[i];
  const double nu_post = hyper.nu + count;
  Vec check = Eigen::Map<const Vec>(post, k);
  if (!family.in_xi(check, nu_post)) {
    throw DomainError("updated hyperparameters left Xi; data outside the sample space of " + family.name());
  }
  return family.log_psi(std::span<const double>(post, k), nu_post) -
         family.log_psi(std::span<const double>(hyper.xi.data(), k), hyper.nu);
}

namespace {
Vec sum_stats(const ExponentialFamily& family, std::span<const Vec> points) {
  Vec acc = Vec::Zero(family.stat_dim());
  for (const auto& x : points) {
    if (!family.in_sample_space(x)) throw DomainError("point " + fmt_vec(x) + " is outside the sample space of " + family.name());
    acc += family.stat(x);
  }
  return acc;
}
}  // namespace

double log_marginal(const ExponentialFamily& family, const ConjugateHyper& hyper, std::span<const Vec> points) {
  const Vec s = sum_stats(family, points);
  return log_marginal_from_sum(family, hyper, std::span<const double>(s.data(), s.size()),
                               static_cast<int>(points.size()));
}

MomentPoint mu_x(const ExponentialFamily& family, const ConjugateHyper& hyper, std::span<const Vec> points) {
  if (points.empty()) throw DomainError("mu_x requires a nonempty subset");
  const Vec s = sum_stats(family, points);
  Vec mu = (hyper.xi + s) / (hyper.nu + static_cast<double>(points.size()));
  const bool inside = family.in_moment_space(mu);
  return {std::move(mu), inside};
}

double log_marginal_tilde_from_sum(const ExponentialFamily& family, const ConjugateHyper& hyper,
                                   std::span<const double> stat_sum, int count) {
  const double t = hyper.nu + count;
  const Vec mu = (hyper.xi + Eigen::Map<const Vec>(stat_sum.data(), family.stat_dim())) / t;
  const auto lp = family.legendre(mu);
  return -0.5 * family.stat_dim() * std::log(t) + t * lp.value;
}

double log_marginal_tilde(const ExponentialFamily& family, const ConjugateHyper& hyper,
                          std::span<const Vec> points) {
  const Vec s = sum_stats(family, points);
  return log_marginal_tilde_from_sum(family, hyper, std::span<const double>(s.data(), s.size()),
                                     static_cast<int>(points.size()));
}

}  // namespace gpmix
