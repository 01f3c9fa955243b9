#include <doctest.h>

#include <cmath>
#include <numeric>

#include "gpmix/errors.hpp"
#include "gpmix/experiments.hpp"
#include "gpmix/posterior.hpp"

using namespace gpmix;

namespace {

Vec v1(double x) { return Vec::Constant(1, x); }

MixtureSpec poisson_mixture() {
  return MixtureSpec::from_means(ExponentialFamily::poisson_gamma(), {0.5, 0.5}, {v1(1.0), v1(5.0)});
}

}  // namespace

TEST_CASE("mixture specs") {
  const auto gauss = ExponentialFamily::gaussian_known_variance({1.0});
  CHECK_THROWS_AS(MixtureSpec(gauss, {0.5, 0.4}, {v1(0), v1(1)}), DomainError);
  CHECK_THROWS_AS(MixtureSpec(gauss, {1.0}, {v1(0), v1(1)}), DomainError);
  CHECK_THROWS_AS(MixtureSpec(ExponentialFamily::exponential_gamma(), {1.0}, {v1(1.0)}), DomainError);
  CHECK(poisson_mixture().thetas()[1][0] == doctest::Approx(std::log(5.0)));
}

TEST_CASE("mixture data") {
  const auto spec = poisson_mixture();
  const auto a = gen_mixture_data(spec, 1000, 7);
  const auto b = gen_mixture_data(spec, 1000, 7);
  CHECK(a.points() == b.points());
  CHECK(a.labels() == b.labels());
  CHECK(gen_mixture_data(spec, 1000, 8).points() != a.points());
  int zeros = 0;
  for (const auto& x : a.points()) zeros += x[0] == 0.0;
  const double p = 0.5 * std::exp(-1.0) + 0.5 * std::exp(-5.0);
  CHECK(std::fabs(zeros / 1000.0 - p) <= 3.0 * std::sqrt(p * (1 - p) / 1000.0));

  const auto gauss = ExponentialFamily::gaussian_known_variance({1.0});
  const auto single = gen_mixture_data(MixtureSpec(gauss, {1.0}, {v1(0.0)}), 10000, 3);
  double mean = 0.0;
  for (const auto& x : single.points()) mean += x[0];
  CHECK(std::fabs(mean / 10000) < 0.05);

  const auto first = gen_mixture_data(MixtureSpec(gauss, {1.0, 0.0}, {v1(0.0), v1(50.0)}), 500, 1);
  for (int l : *first.labels()) CHECK(l == 0);
}

TEST_CASE("first block size given two blocks") {
  const auto d4 = fig3_size_distribution(1.0, 4);
  CHECK(d4.pmf[0] == doctest::Approx(4.0 / 11));
  CHECK(d4.pmf[1] == doctest::Approx(3.0 / 11));
  CHECK(d4.pmf[2] == doctest::Approx(4.0 / 11));
  for (int n : {2, 3, 50, 500, 5000}) {
    const auto d = fig3_size_distribution(1.0, n);
    CHECK(std::fabs(std::accumulate(d.pmf.begin(), d.pmf.end(), 0.0) - 1.0) <= 1e-14);
    for (int a = 1; a < n; ++a) CHECK(d.pmf[a - 1] == doctest::Approx(d.pmf[n - a - 1]).epsilon(1e-14));
  }
  // Brute force at small n: P(a_1 = a | t = 2) over ordered partitions
  const int n = 9;
  const auto d = fig3_size_distribution(2.5, n);
  std::vector<double> w(n - 1);
  const auto dp = GibbsPartitionModel::dirichlet(2.5);
  double z = 0.0;
  for (int a = 1; a < n; ++a) {
    const std::vector<int> sizes{a, n - a};
    double binom = std::exp(std::lgamma(n + 1.0) - std::lgamma(a + 1.0) - std::lgamma(n - a + 1.0));
    w[a - 1] = binom * std::exp(log_eppf_sizes(dp, n, sizes));
    z += w[a - 1];
  }
  for (int a = 1; a < n; ++a) CHECK(d.pmf[a - 1] == doctest::Approx(w[a - 1] / z).epsilon(1e-13));
  CHECK(fig3_size_distribution(1.0, 50).lower_tail(0.05) < fig3_size_distribution(1.0, 500).lower_tail(0.05));
  CHECK(fig3_size_distribution(1.0, 500).lower_tail(0.05) < fig3_size_distribution(1.0, 5000).lower_tail(0.05));
  CHECK_THROWS_AS(fig3_size_distribution(0.0, 10), DomainError);
}

TEST_CASE("census") {
  const std::vector<std::vector<int>> singles{{1, 1, 1, 1}};
  CHECK(extra_cluster_census(singles, 1).counts == std::vector<int>{4});
  const std::vector<std::vector<int>> whole{{10}};
  CHECK(extra_cluster_census(whole, 3).counts == std::vector<int>{0});
  const auto c = census_from_counts({0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  CHECK(c.median == 5.0);
  CHECK(c.q10 == 1.0);
  CHECK(c.q90 == 9.0);
}

TEST_CASE("inconsistency sweep") {
  const auto f = ExponentialFamily::poisson_gamma();
  SweepConfig cfg{.mixture = poisson_mixture(),
                  .model = GibbsPartitionModel::dirichlet(1.0),
                  .family = f,
                  .hyper = make_hyper(f, v1(1.0), 1.0),
                  .n_grid = {4, 8, 12, 40},
                  .seed = 3,
                  .region = SampleRegion{{v1(0.0)}, std::nullopt},
                  .exact_max_n = 12,
                  .gibbs = {}};
  cfg.gibbs.burn_in_sweeps = 100;
  cfg.gibbs.sample_sweeps = 2000;
  const auto res = inconsistency_sweep(cfg, 2, 2);
  CHECK(res.c == doctest::Approx(2.0));
  REQUIRE(res.rows.size() == 4);
  double run = 0.0;
  for (const auto& r : res.rows) {
    run = std::max(run, r.posterior);
    CHECK(r.running_max == run);
    if (r.engine == "exact") {
      CHECK(r.bound.phi_exact);
      CHECK(r.mcmc_se == 0.0);
      if (r.bound.preconditions()) CHECK(r.posterior <= r.bound.bound);
    } else {
      CHECK_FALSE(r.bound.phi_exact);
      CHECK(r.mcmc_se > 0.0);
    }
  }
  // identical config, identical rows; thread count irrelevant
  const auto again = inconsistency_sweep(cfg, 2, 1);
  for (std::size_t i = 0; i < res.rows.size(); ++i) CHECK(again.rows[i].posterior == res.rows[i].posterior);

  cfg.n_grid = {2, 8};
  CHECK_THROWS_AS(inconsistency_sweep(cfg, 2), Refusal);
  cfg.n_grid = {8};
  CHECK_THROWS_AS(inconsistency_sweep(cfg, 3), Refusal);

  cfg.model = GibbsPartitionModel::pitman_yor(-0.5, 1.0);
  const auto ex = inconsistency_sweep(cfg, 2);
  CHECK(ex.rows[0].excluded);
  CHECK(ex.rows[0].bound.bound == 1.0);
}

TEST_CASE("non-concentration experiment at small scale") {
  const auto f = ExponentialFamily::gaussian_known_variance({1.0});
  Fig1bConfig cfg{.mixture = MixtureSpec::from_means(f, {1.0}, {v1(0.0)}),
                  .model = GibbsPartitionModel::dirichlet(1.0),
                  .family = f,
                  .hyper = make_hyper(f, v1(0.0), 0.01),
                  .n_grid = {6, 10, 40},
                  .replicates = 3,
                  .seed = 5,
                  .gibbs = {},
                  .exact_max_n = 10};
  cfg.gibbs.burn_in_sweeps = 100;
  cfg.gibbs.sample_sweeps = 1000;
  const auto res = fig1b_experiment(cfg, 2);
  for (int n : cfg.n_grid) {
    // one component: the mode stays at t = 1 but p(T=1|x) < 1
    double total = 0.0, p1 = 0.0, best = 0.0;
    for (const auto& r : res.rows) {
      if (r.n != n) continue;
      if (r.t == 1) p1 = r.mean_posterior;
      best = std::max(best, r.mean_posterior);
      total += r.mean_posterior;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(p1 == best);
    CHECK(p1 < 1.0);
  }
  CHECK(res.tiny_block_counts.back().size() == 1000);
  const auto again = fig1b_experiment(cfg, 1);
  CHECK(again.replicate_posteriors == res.replicate_posteriors);
}
