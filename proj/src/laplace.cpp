#include "gpmix/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "gpmix/errors.hpp"
#include "gpmix/numerics.hpp"

namespace gpmix {

namespace {

constexpr double kMinEpsilon = 0x1p-20;
constexpr int kDirectionGrid = 128;

bool one_dimensional(FamilyKind k) {
  return k == FamilyKind::ExponentialGamma || k == FamilyKind::PoissonGamma || k == FamilyKind::GeometricBeta;
}

// Upper end of Theta for the one-dimensional families (and theta_2 for NormalGamma).
double theta_upper(FamilyKind k) {
  switch (k) {
    case FamilyKind::ExponentialGamma:
    case FamilyKind::GeometricBeta:
    case FamilyKind::NormalGamma: return 0.0;
    default: return kInf;
  }
}

// Smallest distance from kappa'^{-1}(box) to the boundary of Theta.
double boundary_gap(const ExponentialFamily& family, const MomentSpaceBox& box) {
  switch (family.kind()) {
    case FamilyKind::GaussianKnownVariance:
    case FamilyKind::PoissonGamma: return kInf;
    case FamilyKind::ExponentialGamma: return 1.0 / box.hi[0];
    case FamilyKind::GeometricBeta: return std::log1p(1.0 / box.hi[0]);
    case FamilyKind::NormalGamma: {
      const double m1 = (box.lo[0] <= 0.0 && box.hi[0] >= 0.0) ? 0.0
                                                                : std::min(std::fabs(box.lo[0]), std::fabs(box.hi[0]));
      const double v_max = box.hi[1] - m1 * m1;
      return 0.5 / v_max;
    }
  }
  return 0.0;
}

double kappa_pp_1d(const ExponentialFamily& family, double theta) {
  return family.kappa_hess(Vec::Constant(1, theta))(0, 0);
}

std::pair<double, double> eigen_range(const Mat& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

Vec unit_direction(int i, int count) {
  const double a = 2.0 * std::numbers::pi * i / count;
  Vec u(2);
  u << std::cos(a), std::sin(a);
  return u;
}

// inf over unit u of h(mu, theta_mu + eps u): exact for the Gaussian and
// one-dimensional cases, a direction grid otherwise.
double sphere_inf(const ExponentialFamily& family, const Vec& mu, const LegendrePoint& lp, double eps) {
  const auto kind = family.kind();
  if (kind == FamilyKind::GaussianKnownVariance) {
    const auto& var = family.variances();
    return 0.5 * eps * eps * *std::min_element(var.begin(), var.end());
  }
  if (one_dimensional(kind)) {
    const Vec lo = lp.theta.array() - eps;
    const Vec hi = lp.theta.array() + eps;
    return std::min(legendre_gap(family, mu, lp, lo), legendre_gap(family, mu, lp, hi));
  }
  double best = kInf;
  for (int i = 0; i < kDirectionGrid; ++i) {
    best = std::min(best, legendre_gap(family, mu, lp, lp.theta + eps * unit_direction(i, kDirectionGrid)));
  }
  return best;
}

std::string describe_box(const MomentSpaceBox& box) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < box.lo.size(); ++i) os << (i ? " x " : "") << "[" << box.lo[i] << ", " << box.hi[i] << "]";
  return os.str();
}

double log_sup_t_power(int k, double delta) {
  // sup_{t >= 1} t^{k/2} exp(-(t-1) delta)
  const double t_star = 0.5 * k / delta;
  if (t_star <= 1.0) return 0.0;
  return 0.5 * k * std::log(t_star) - (t_star - 1.0) * delta;
}

// log ∫ exp(-t h(theta)) dtheta over (-inf, upper) for a convex h with minimum
// 0 at theta0 and curvature curv there.
double log_integral_1d(const std::function<double(double)>& h, double theta0, double curv, double upper, double t) {
  const double scale = 1.0 / std::sqrt(t * curv);
  auto f = [&](double u) {
    const double th = theta0 + scale * u;
    if (!(th < upper)) return 0.0;
    return std::exp(-t * h(th));
  };
  constexpr double tol = 1e-13;
  boost::math::quadrature::exp_sinh<double> es;
  double left = es.integrate([&](double u) { return f(-u); }, 0.0, kInf, tol);
  double right;
  if (std::isinf(upper)) {
    right = es.integrate(f, 0.0, kInf, tol);
  } else {
    boost::math::quadrature::tanh_sinh<double> ts;
    right = ts.integrate(f, 0.0, (upper - theta0) / scale, tol);
  }
  return std::log(scale) + std::log(left + right);
}

}  // namespace

void validate_box(const ExponentialFamily& family, const MomentSpaceBox& box) {
  const int k = family.stat_dim();
  if (box.lo.size() != k || box.hi.size() != k) {
    throw Refusal("moment-space box must have dimension " + std::to_string(k) + " for " + family.name());
  }
  if (box.grid < 2) throw Refusal("moment-space box grid needs at least 2 points per axis");
  for (int i = 0; i < k; ++i) {
    if (!(box.lo[i] < box.hi[i]) || !std::isfinite(box.lo[i]) || !std::isfinite(box.hi[i])) {
      throw Refusal("moment-space box " + describe_box(box) + " is empty or degenerate on axis " + std::to_string(i));
    }
  }
  for (int corner = 0; corner < (1 << k); ++corner) {
    Vec c(k);
    for (int i = 0; i < k; ++i) c[i] = (corner >> i & 1) ? box.hi[i] : box.lo[i];
    if (!family.in_moment_space(c)) {
      throw Refusal("moment-space box " + describe_box(box) + " is not inside the moment space of " + family.name());
    }
  }
}

std::vector<Vec> box_grid(const MomentSpaceBox& box) {
  const int k = static_cast<int>(box.lo.size());
  std::vector<Vec> out;
  std::vector<int> idx(k, 0);
  while (true) {
    Vec p(k);
    for (int i = 0; i < k; ++i) p[i] = box.lo[i] + (box.hi[i] - box.lo[i]) * idx[i] / (box.grid - 1);
    out.push_back(std::move(p));
    int axis = k - 1;
    while (axis >= 0 && ++idx[axis] == box.grid) idx[axis--] = 0;
    if (axis < 0) break;
  }
  return out;
}

double legendre_gap(const ExponentialFamily& family, const Vec& mu, const LegendrePoint& lp, const Vec& theta) {
  return lp.value - theta.dot(mu) + family.kappa(theta);
}

LocalLaplaceConstants local_laplace_constants(const ExponentialFamily& family, const Vec& mu, double eps) {
  if (!(eps > 0.0)) throw Refusal("epsilon must be positive");
  const auto lp = family.legendre(mu);
  const auto kind = family.kind();
  const double top = theta_upper(kind);
  const double reach = kind == FamilyKind::NormalGamma ? lp.theta[1] : lp.theta[0];
  if (std::isfinite(top) && !(reach + eps < top)) {
    throw Refusal("ball of radius " + std::to_string(eps) + " around theta_mu leaves Theta for " + family.name());
  }
  LocalLaplaceConstants out;
  out.delta = sphere_inf(family, mu, lp, eps);
  if (kind == FamilyKind::GaussianKnownVariance) {
    const auto& var = family.variances();
    out.a = *std::min_element(var.begin(), var.end());
    out.b = *std::max_element(var.begin(), var.end());
  } else if (one_dimensional(kind)) {
    out.a = kappa_pp_1d(family, lp.theta[0] - eps);
    out.b = kappa_pp_1d(family, lp.theta[0] + eps);
  } else {
    double lo = kInf, hi = 0.0;
    constexpr int radii = 16;
    for (int r = 0; r <= radii; ++r) {
      for (int i = 0; i < kDirectionGrid; ++i) {
        const auto [a, b] = eigen_range(family.kappa_hess(lp.theta + eps * r / radii * unit_direction(i, kDirectionGrid)));
        lo = std::min(lo, a);
        hi = std::max(hi, b);
      }
    }
    out.a = 0.5 * lo;
    out.b = 2.0 * hi;
    out.delta *= 0.5;
  }
  return out;
}

double log_laplace_integral(const ExponentialFamily& family, const Vec& mu, double t) {
  if (!(t > 0.0)) throw DomainError("t must be positive");
  const auto lp = family.legendre(mu);
  const auto kind = family.kind();
  if (kind == FamilyKind::GaussianKnownVariance) {
    double acc = 0.0;
    const auto& var = family.variances();
    for (std::size_t i = 0; i < var.size(); ++i) {
      const double v = var[i];
      acc += log_integral_1d([v](double d) { return 0.5 * v * d * d; }, 0.0, v, kInf, t);
    }
    return acc;
  }
  if (!one_dimensional(kind)) throw Refusal("quadrature of the Laplace integral is only available for k = 1 families");
  auto h = [&](double th) {
    const Vec v = Vec::Constant(1, th);
    return legendre_gap(family, mu, lp, v);
  };
  return log_integral_1d(h, lp.theta[0], kappa_pp_1d(family, lp.theta[0]), theta_upper(kind), t);
}

LaplaceSandwich laplace_sandwich(const ExponentialFamily& family, const Vec& mu, double t, double eps, double delta,
                                 double a, double b, double s) {
  if (!(s > 0.0) || !(t >= s)) throw DomainError("laplace_sandwich needs 0 < s <= t");
  if (!(delta > 0.0) || !(a > 0.0) || !(b >= a)) throw DomainError("laplace_sandwich needs delta > 0 and 0 < a <= b");
  const auto local = local_laplace_constants(family, mu, eps);
  if (a > local.a || b < local.b) {
    std::ostringstream os;
    os << "cannot verify " << a << " <= kappa'' <= " << b << " on the ball (certified range [" << local.a << ", "
       << local.b << "])";
    throw Refusal(os.str());
  }
  if (delta > local.delta) {
    throw Refusal("delta = " + std::to_string(delta) + " exceeds the certified gap " + std::to_string(local.delta));
  }
  const int k = family.stat_dim();
  const double half_k = 0.5 * k;
  const auto lp = family.legendre(mu);
  const double base = half_k * std::log(2.0 * std::numbers::pi / t);
  LaplaceSandwich out;
  out.lower = base + std::log(gamma_p(half_k, 0.5 * eps * eps * t * b)) - half_k * std::log(b);
  const double main = base + std::log(gamma_p(half_k, 0.5 * eps * eps * t * a)) - half_k * std::log(a);
  const Vec s_mu = s * mu;
  const double tail = -(t - s) * delta - s * lp.value + family.log_psi(s_mu, s);
  out.upper = log_add(main, tail);
  out.quadrature = family.kind() == FamilyKind::NormalGamma ? std::nan("") : log_laplace_integral(family, mu, t);
  return out;
}

LaplaceCertificate certify_box(const ExponentialFamily& family, const ConjugateHyper& hyper,
                               const MomentSpaceBox& box) {
  validate_box(family, box);
  const auto kind = family.kind();
  const int k = family.stat_dim();
  LaplaceCertificate cert;
  cert.box = box;

  const double gap = boundary_gap(family, box);
  double eps = 0.5;
  while (eps >= kMinEpsilon && !(eps <= 0.5 * gap)) eps *= 0.5;
  if (eps < kMinEpsilon) {
    throw Refusal("no epsilon >= 2^-20 keeps V_eps inside Theta for box " + describe_box(box));
  }
  cert.epsilon = eps;

  const auto grid = box_grid(box);
  std::vector<LegendrePoint> lps;
  lps.reserve(grid.size());
  for (const auto& mu : grid) lps.push_back(family.legendre(mu));

  if (kind == FamilyKind::GaussianKnownVariance) {
    const auto& var = family.variances();
    cert.alpha = *std::min_element(var.begin(), var.end());
    cert.beta = *std::max_element(var.begin(), var.end());
  } else if (one_dimensional(kind)) {
    // theta_mu and kappa'' are increasing, so the extremes sit at the ends of V_eps.
    const double th_lo = family.legendre(box.lo).theta[0] - eps;
    const double th_hi = family.legendre(box.hi).theta[0] + eps;
    cert.alpha = kappa_pp_1d(family, th_lo);
    cert.beta = kappa_pp_1d(family, th_hi);
  } else {
    Vec tlo = Vec::Constant(k, kInf), thi = Vec::Constant(k, -kInf);
    for (const auto& lp : lps) {
      tlo = tlo.cwiseMin(lp.theta);
      thi = thi.cwiseMax(lp.theta);
    }
    thi[1] = -gap;  // exact upper end of theta_2 over the box
    tlo.array() -= eps;
    thi.array() += eps;
    MomentSpaceBox tbox{tlo, thi, box.grid};
    double lo = kInf, hi = 0.0;
    for (const auto& th : box_grid(tbox)) {
      const auto [a, b] = eigen_range(family.kappa_hess(th));
      lo = std::min(lo, a);
      hi = std::max(hi, b);
    }
    cert.alpha = 0.5 * lo;
    cert.beta = 2.0 * hi;
    cert.direction_grid = kDirectionGrid;
  }

  double log_gamma = kNegInf;
  double delta = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    log_gamma = std::max(log_gamma, family.log_psi(grid[i], 1.0) - lps[i].value);
    delta = std::min(delta, sphere_inf(family, grid[i], lps[i], eps));
  }
  log_gamma += std::log(2.0);
  cert.gamma = std::exp(log_gamma);
  cert.delta = 0.5 * delta;

  const double half_k = 0.5 * k;
  const double log_2pi_half = half_k * kLog2Pi;
  cert.log_c1 = log_2pi_half + std::log(gamma_p(half_k, 0.5 * eps * eps * cert.beta)) - half_k * std::log(cert.beta);
  cert.log_c2 = log_add(log_2pi_half - half_k * std::log(cert.alpha), log_gamma + log_sup_t_power(k, cert.delta));
  const double psi0 = family.log_psi(hyper.xi, hyper.nu);
  cert.log_C1 = cert.log_c1 - psi0;
  cert.log_C2 = cert.log_c2 - psi0;
  return cert;
}

SplittingBound splitting_bound(const ExponentialFamily& family, const ConjugateHyper& hyper,
                               const MomentSpaceBox& box) {
  validate_box(family, box);
  const Vec center = hyper.xi / hyper.nu;
  MomentSpaceBox hull{box.lo.cwiseMin(center), box.hi.cwiseMax(center), box.grid};
  SplittingBound out;
  out.box = box;
  out.hull = certify_box(family, hyper, hull);
  double sup_lin = 0.0, sup_val = 0.0;
  for (const auto& y : box_grid(hull)) {
    const auto lp = family.legendre(y);
    sup_lin = std::max(sup_lin, std::fabs((center - y).dot(lp.theta)));
    sup_val = std::max(sup_val, std::fabs(lp.value));
  }
  out.C0 = hyper.nu * 2.0 * sup_lin + hyper.nu * 2.0 * sup_val;
  out.log_C = out.hull.log_C2 + out.C0 - 2.0 * out.hull.log_C1;
  return out;
}

SplitCheck splitting_check(const ExponentialFamily& family, const ConjugateHyper& hyper,
                           const SplittingBound& bound, std::span<const Vec> data, const std::vector<bool>& in_a) {
  SplitCheck out;
  const int n = static_cast<int>(data.size());
  if (static_cast<int>(in_a.size()) != n) throw DomainError("split mask length must equal the number of points");
  const int k = family.stat_dim();
  Vec sum_a = Vec::Zero(k), sum_b = Vec::Zero(k);
  int na = 0;
  for (int j = 0; j < n; ++j) {
    if (!family.in_sample_space(data[j])) throw DomainError("point outside the sample space of " + family.name());
    const Vec s = family.stat(data[j]);
    if (in_a[j]) {
      sum_a += s;
      ++na;
    } else {
      sum_b += s;
    }
  }
  const int nb = n - na;
  if (na == 0 || nb == 0) {
    out.reason = "both parts of the split must be nonempty";
    return out;
  }
  auto inside = [&](const Vec& p) {
    return (p.array() >= bound.box.lo.array()).all() && (p.array() <= bound.box.hi.array()).all();
  };
  if (!inside(sum_a / na)) {
    out.reason = "mean statistic of A is outside U";
    return out;
  }
  if (!inside((hyper.xi + sum_b) / (hyper.nu + nb))) {
    out.reason = "mu of B is outside U";
    return out;
  }
  const Vec sum = sum_a + sum_b;
  auto lm = [&](const Vec& s, int c) {
    return log_marginal_from_sum(family, hyper, std::span<const double>(s.data(), s.size()), c);
  };
  out.log_ratio = lm(sum, n) - lm(sum_a, na) - lm(sum_b, nb);
  const double a = hyper.nu + na, b = hyper.nu + nb;
  out.log_bound = bound.log_C + 0.5 * k * std::log(a * b / (hyper.nu + n));
  out.status = out.log_ratio <= out.log_bound ? SplitStatus::Holds : SplitStatus::Violated;
  return out;
}

}  // namespace gpmix
