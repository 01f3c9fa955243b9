#include <doctest.h>

#include <cmath>
#include <random>

#include "gpmix/errors.hpp"
#include "gpmix/expfam.hpp"
#include "gpmix/numerics.hpp"
#include "oracles.hpp"

using namespace gpmix;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

std::vector<ExponentialFamily> all_families() {
  return {ExponentialFamily::gaussian_known_variance({1.0}), ExponentialFamily::gaussian_known_variance({0.5, 2.0}),
          ExponentialFamily::normal_gamma(), ExponentialFamily::exponential_gamma(),
          ExponentialFamily::poisson_gamma(), ExponentialFamily::geometric_beta()};
}

std::vector<Vec> sample_thetas(const ExponentialFamily& f) {
  switch (f.kind()) {
    case FamilyKind::GaussianKnownVariance:
      return f.stat_dim() == 1 ? std::vector<Vec>{v1(-1.3), v1(0.0), v1(2.1)}
                               : std::vector<Vec>{v2(-1.0, 0.4), v2(0.3, 0.0)};
    case FamilyKind::NormalGamma: return {v2(0.4, -0.5), v2(-1.0, -2.0), v2(2.0, -0.3)};
    case FamilyKind::PoissonGamma: return {v1(-2.0), v1(0.0), v1(1.5)};
    default: return {v1(-3.0), v1(-1.0), v1(-0.2)};
  }
}

}  // namespace

TEST_CASE("kappa matches its defining integral or series") {
  const auto pois = ExponentialFamily::poisson_gamma();
  const auto geom = ExponentialFamily::geometric_beta();
  const auto expo = ExponentialFamily::exponential_gamma();
  const auto gauss = ExponentialFamily::gaussian_known_variance({2.0});
  const auto ng = ExponentialFamily::normal_gamma();
  for (double th : {-2.0, -0.5, 0.7}) {
    double series = 0.0, lf = 0.0;
    for (int x = 0; x < 200; ++x) {
      if (x > 0) lf += std::log(x);
      series += std::exp(th * x - lf);
    }
    CHECK(pois.kappa(v1(th)) == doctest::Approx(std::log(series)).epsilon(1e-12));
    const double g = oracle::log_integral_real(
        [&](double x) { return th * x - 0.25 * x * x - 0.5 * std::log(4 * M_PI); }, 2.0 * th, 1.0);
    CHECK(gauss.kappa(v1(th)) == doctest::Approx(g).epsilon(1e-10));
    const double ngi = oracle::log_integral_real([&](double x) { return th * x - 0.8 * x * x; }, th / 1.6, 1.0);
    CHECK(ng.kappa(v2(th, -0.8)) == doctest::Approx(ngi).epsilon(1e-10));
  }
  for (double th : {-3.0, -1.0, -0.1}) {
    double series = 0.0;
    for (int x = 0; x < 2000; ++x) series += std::exp(th * x);
    CHECK(geom.kappa(v1(th)) == doctest::Approx(std::log(series)).epsilon(1e-10));
    boost::math::quadrature::exp_sinh<double> half;
    CHECK(expo.kappa(v1(th)) ==
          doctest::Approx(std::log(half.integrate([&](double x) { return std::exp(th * x); }))).epsilon(1e-10));
  }
}

TEST_CASE("kappa derivatives match finite differences") {
  for (const auto& f : all_families()) {
    for (const auto& th : sample_thetas(f)) {
      const int k = f.stat_dim();
      const Vec g = f.kappa_prime(th);
      const Mat h = f.kappa_hess(th);
      for (int i = 0; i < k; ++i) {
        const double e = 1e-5;
        Vec p = th, m = th;
        p[i] += e;
        m[i] -= e;
        CHECK(g[i] == doctest::Approx((f.kappa(p) - f.kappa(m)) / (2 * e)).epsilon(1e-7));
        const Vec dg = (f.kappa_prime(p) - f.kappa_prime(m)) / (2 * e);
        for (int j = 0; j < k; ++j) CHECK(h(j, i) == doctest::Approx(dg[j]).epsilon(1e-6));
      }
      CHECK((h - h.transpose()).norm() == 0.0);
      CHECK(Eigen::SelfAdjointEigenSolver<Mat>(h).eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("Legendre transform: closed form, Newton and examples") {
  const auto lp = ExponentialFamily::poisson_gamma().legendre(v1(1.0));
  CHECK(lp.value == doctest::Approx(-1.0));
  CHECK(lp.theta[0] == doctest::Approx(0.0));
  for (const auto& f : all_families()) {
    for (const auto& th : sample_thetas(f)) {
      const Vec mu = f.kappa_prime(th);
      const auto closed = f.legendre(mu);
      const auto newton = f.legendre_newton(mu);
      CHECK((closed.theta - th).norm() <= 1e-9 * std::max(1.0, th.norm()));
      CHECK(closed.value == doctest::Approx(th.dot(mu) - f.kappa(th)).epsilon(1e-12));
      CHECK((newton.theta - closed.theta).norm() <= 1e-8 * std::max(1.0, th.norm()));
      CHECK(newton.value == doctest::Approx(closed.value).epsilon(1e-10));
    }
  }
  CHECK_THROWS_AS(ExponentialFamily::exponential_gamma().legendre(v1(-1.0)), DomainError);
  CHECK_THROWS_AS(ExponentialFamily::normal_gamma().legendre(v2(1.0, 0.5)), DomainError);
  CHECK_THROWS_AS(ExponentialFamily::poisson_gamma().kappa(v1(NAN)), DomainError);
  CHECK_THROWS_AS(ExponentialFamily::geometric_beta().kappa(v1(0.0)), DomainError);
}

TEST_CASE("psi closed forms match quadrature") {
  CHECK(ExponentialFamily::poisson_gamma().log_psi(v1(1.0), 1.0) == doctest::Approx(0.0));
  CHECK(ExponentialFamily::exponential_gamma().log_psi(v1(1.0), 1.0) == doctest::Approx(0.0));
  CHECK(ExponentialFamily::gaussian_known_variance({1.0}).log_psi(v1(0.0), 2.0) ==
        doctest::Approx(0.5 * std::log(M_PI)).epsilon(1e-14));
  const auto gauss = ExponentialFamily::gaussian_known_variance({1.5});
  for (double nu : {0.5, 1.0, 3.0, 8.0}) {
    for (double mu : {-2.0, 0.3, 0.8, 4.0}) {
      const double xi = mu * nu;
      CHECK(std::fabs(gauss.log_psi(v1(xi), nu) - oracle::psi_gaussian(xi, nu, 1.5)) <= 1e-8);
      if (mu <= 0) continue;
      CHECK(std::fabs(ExponentialFamily::poisson_gamma().log_psi(v1(xi), nu) - oracle::psi_poisson(xi, nu)) <= 1e-8);
      CHECK(std::fabs(ExponentialFamily::exponential_gamma().log_psi(v1(xi), nu) - oracle::psi_exponential(xi, nu)) <=
            1e-8);
      CHECK(std::fabs(ExponentialFamily::geometric_beta().log_psi(v1(xi), nu) - oracle::psi_geometric(xi, nu)) <=
            1e-8);
    }
  }
}

TEST_CASE("normal-gamma psi matches a nested quadrature") {
  const auto ng = ExponentialFamily::normal_gamma();
  for (auto [m1, var, nu] : {std::tuple{0.0, 1.0, 2.0}, {1.5, 0.5, 3.0}, {-1.0, 2.0, 4.0}}) {
    const Vec xi = v2(m1 * nu, (var + m1 * m1) * nu);
    // ∫ over theta_2 < 0 of ∫ over theta_1 of exp(xi'theta - nu kappa)
    auto inner = [&](double t2) {
      return oracle::log_integral_real(
          [&](double t1) { return xi[0] * t1 + xi[1] * t2 - nu * ng.kappa(v2(t1, t2)); }, -2.0 * t2 * xi[0] / nu,
          std::sqrt(-2.0 * t2 / nu));
    };
    // the outer integrand decays like exp(xi_2 theta_2); beyond 200 ref it is negligible
    const double ref = -0.5 / var;
    const double want = oracle::log_integral_interval(inner, 200.0 * ref, 0.0, ref);
    CHECK(ng.log_psi(xi, nu) == doctest::Approx(want).epsilon(1e-7));
  }
}

TEST_CASE("single-cluster marginals") {
  const auto pois = ExponentialFamily::poisson_gamma();
  const auto expo = ExponentialFamily::exponential_gamma();
  const auto gauss = ExponentialFamily::gaussian_known_variance({1.0});
  const auto hp = make_hyper(pois, v1(1.0), 1.0);
  const std::vector<Vec> zero{v1(0.0)};
  CHECK(log_marginal(pois, hp, zero) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  CHECK(log_marginal(pois, hp, std::span<const Vec>{}) == 0.0);
  const std::vector<Vec> one{v1(1.0)};
  CHECK(log_marginal(expo, make_hyper(expo, v1(1.0), 1.0), one) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
  const auto hg = make_hyper(gauss, v1(0.0), 1.0);
  const std::vector<Vec> zz{v1(0.0), v1(0.0)};
  CHECK(log_marginal(gauss, hg, zero) == doctest::Approx(-0.5 * std::log(2.0)).epsilon(1e-14));
  CHECK(log_marginal(gauss, hg, zz) == doctest::Approx(-0.5 * std::log(3.0)).epsilon(1e-14));

  // Poisson counts: negative binomial predictive, by direct quadrature over lambda.
  const std::vector<Vec> counts{v1(2.0), v1(0.0), v1(5.0)};
  const auto h = make_hyper(pois, v1(2.0), 0.5);
  boost::math::quadrature::exp_sinh<double> half;
  const double prior_norm = half.integrate([](double l) { return oracle::tail_exp(std::log(l) - 0.5 * l); });
  const double joint = half.integrate([](double l) {
    // prior on lambda: lambda^{xi-1} e^{-nu lambda}; likelihood wrt counting/x!: lambda^sum e^{-n lambda}
    return oracle::tail_exp(8.0 * std::log(l) - 3.5 * l);
  });
  CHECK(log_marginal(pois, h, counts) == doctest::Approx(std::log(joint / prior_norm)).epsilon(1e-10));
}

TEST_CASE("hyperparameter validation") {
  CHECK_THROWS_AS(make_hyper(ExponentialFamily::poisson_gamma(), v1(-1.0), 1.0), DomainError);
  CHECK_THROWS_AS(make_hyper(ExponentialFamily::poisson_gamma(), v1(1.0), 0.0), DomainError);
  CHECK_THROWS_AS(make_hyper(ExponentialFamily::normal_gamma(), v2(1.0, 0.5), 1.0), DomainError);
  CHECK_THROWS_AS(make_hyper(ExponentialFamily::gaussian_known_variance({1.0, 1.0}), v1(0.0), 1.0), DomainError);
  CHECK_NOTHROW(make_hyper(ExponentialFamily::normal_gamma(), v2(1.0, 2.0), 1.0));
}

TEST_CASE("mu_x and the approximate marginal") {
  const auto pois = ExponentialFamily::poisson_gamma();
  const std::vector<Vec> xs{v1(2.0), v1(4.0)};
  const auto mp = mu_x(pois, make_hyper(pois, v1(1.0), 1.0), xs);
  CHECK(mp.mu[0] == doctest::Approx(7.0 / 3.0));
  CHECK(mp.in_moment_space);
  const auto expo = ExponentialFamily::exponential_gamma();
  const std::vector<Vec> one{v1(1.0)};
  CHECK(mu_x(expo, make_hyper(expo, v1(2.0), 1.0), one).mu[0] == doctest::Approx(1.5));

  const auto gauss = ExponentialFamily::gaussian_known_variance({1.0});
  const std::vector<Vec> zero{v1(0.0)};
  const auto hg = make_hyper(gauss, v1(0.0), 1.0);
  CHECK(log_marginal_tilde(gauss, hg, zero) == doctest::Approx(log_marginal(gauss, hg, zero)).epsilon(1e-15));

  // The ratio m / m~ stays bounded as n grows with mu_x fixed.
  const auto hp = make_hyper(pois, v1(1.0), 1.0);
  double lo = kInf, hi = kNegInf, prev = 0.0, step = kInf;
  for (int n : {10, 100, 1000, 10000, 100000}) {
    const double sum = 3.0 * n;
    const double s[1] = {sum};
    const double r = log_marginal_from_sum(pois, hp, s, n) - log_marginal_tilde_from_sum(pois, hp, s, n);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    if (n > 10) {
      CHECK(std::fabs(r - prev) < step);
      step = std::fabs(r - prev);
    }
    prev = r;
  }
  CHECK(hi - lo < 0.05);
  CHECK(step < 1e-3);
}
