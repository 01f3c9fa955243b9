#include "gpmix/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gpmix/errors.hpp"
#include "gpmix/numerics.hpp"
#include "gpmix/parallel.hpp"
#include "gpmix/posterior.hpp"
#include "gpmix/rng.hpp"

namespace gpmix {

MixtureSpec::MixtureSpec(ExponentialFamily family, std::vector<double> weights, std::vector<Vec> thetas)
    : family_(std::move(family)), weights_(std::move(weights)), thetas_(std::move(thetas)) {
  if (weights_.empty()) throw DomainError("mixture needs at least one component");
  if (weights_.size() != thetas_.size()) throw DomainError("mixture weights and parameters differ in length");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw DomainError("mixture weights must be nonnegative");
    total += w;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw DomainError("mixture weights must sum to 1 (sum = " + std::to_string(total) + ")");
  for (std::size_t i = 0; i < thetas_.size(); ++i) {
    const auto why = family_.theta_violation(thetas_[i]);
    if (!why.empty()) throw DomainError("mixture component " + std::to_string(i + 1) + ": " + why);
  }
}

MixtureSpec MixtureSpec::from_means(ExponentialFamily family, std::vector<double> weights,
                                    const std::vector<Vec>& means) {
  std::vector<Vec> thetas;
  for (const auto& mu : means) thetas.push_back(family.legendre(mu).theta);
  return MixtureSpec(std::move(family), std::move(weights), std::move(thetas));
}

Dataset gen_mixture_data(const MixtureSpec& spec, int n, std::uint64_t seed) {
  if (n < 0) throw DomainError("sample size must be nonnegative");
  SplitMix64 rng(SplitMix64::stream_key(seed, 0));
  const auto& fam = spec.family();
  const int d = fam.data_dim();
  std::vector<Vec> pts;
  std::vector<int> labels;
  pts.reserve(n);
  labels.reserve(n);
  const auto& w = spec.weights();
  for (int j = 0; j < n; ++j) {
    double u = rng.uniform();
    int comp = static_cast<int>(w.size()) - 1;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] == 0.0) continue;
      if (u < w[i]) {
        comp = static_cast<int>(i);
        break;
      }
      u -= w[i];
    }
    while (w[comp] == 0.0) --comp;
    const Vec& th = spec.thetas()[comp];
    Vec x(d);
    switch (fam.kind()) {
      case FamilyKind::GaussianKnownVariance:
        for (int i = 0; i < d; ++i) {
          const double var = fam.variances()[i];
          x[i] = std::normal_distribution<double>(var * th[i], std::sqrt(var))(rng);
        }
        break;
      case FamilyKind::NormalGamma: {
        const double var = -0.5 / th[1];
        x[0] = std::normal_distribution<double>(th[0] * var, std::sqrt(var))(rng);
        break;
      }
      case FamilyKind::ExponentialGamma: x[0] = std::exponential_distribution<double>(-th[0])(rng); break;
      case FamilyKind::PoissonGamma:
        x[0] = static_cast<double>(std::poisson_distribution<long long>(std::exp(th[0]))(rng));
        break;
      case FamilyKind::GeometricBeta:
        x[0] = static_cast<double>(std::geometric_distribution<long long>(-std::expm1(th[0]))(rng));
        break;
    }
    pts.push_back(std::move(x));
    labels.push_back(comp);
  }
  return Dataset(fam, std::move(pts), std::move(labels));
}

double SizeDistribution::lower_tail(double fraction) const {
  const int a = static_cast<int>(std::floor(fraction * n + 1e-12));
  if (a < 1) return 0.0;
  return cdf[std::min(a, n - 1) - 1];
}

double SizeDistribution::extreme_mass(double fraction) const {
  const int a = static_cast<int>(std::floor(fraction * n + 1e-12));
  double acc = 0.0;
  for (int i = 1; i <= n - 1; ++i) {
    if (std::min(i, n - i) <= a) acc += pmf[i - 1];
  }
  return acc;
}

SizeDistribution fig3_size_distribution(double theta, int n) {
  if (!(theta > 0.0)) throw DomainError("Dirichlet process requires theta > 0");
  if (n < 2) throw DomainError("two blocks need n >= 2");
  SizeDistribution out;
  out.n = n;
  out.pmf.resize(n - 1);
  out.cdf.resize(n - 1);
  // sum_a 1/(a(n-a)) = (2/n) H_{n-1}
  long double harmonic = 0.0L;
  for (int a = n - 1; a >= 1; --a) harmonic += 1.0L / a;
  const long double z = 2.0L * harmonic / n;
  long double run = 0.0L;
  for (int a = 1; a <= n - 1; ++a) {
    const long double p = 1.0L / (static_cast<long double>(a) * (n - a)) / z;
    out.pmf[a - 1] = static_cast<double>(p);
    run += p;
    out.cdf[a - 1] = static_cast<double>(std::min(run, 1.0L));
  }
  return out;
}

namespace {

double quantile(std::vector<int> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - lo) * (v[hi] - v[lo]);
}

std::uint64_t task_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return SplitMix64::stream_key(SplitMix64::stream_key(seed, a), b);
}

}  // namespace

Census extra_cluster_census(const std::vector<std::vector<int>>& sizes_per_sweep, int threshold) {
  if (threshold < 1) throw DomainError("census threshold must be >= 1");
  std::vector<int> counts;
  counts.reserve(sizes_per_sweep.size());
  for (const auto& sizes : sizes_per_sweep) {
    counts.push_back(static_cast<int>(std::count_if(sizes.begin(), sizes.end(), [&](int s) { return s <= threshold; })));
  }
  return census_from_counts(std::move(counts));
}

Census census_from_counts(std::vector<int> counts) {
  Census out;
  out.counts = std::move(counts);
  out.q10 = quantile(out.counts, 0.1);
  out.median = quantile(out.counts, 0.5);
  out.q90 = quantile(out.counts, 0.9);
  return out;
}

Census extra_cluster_census(const ChainResult& result, int threshold) {
  std::vector<std::vector<int>> all;
  for (const auto& chain : result.sizes) all.insert(all.end(), chain.begin(), chain.end());
  return extra_cluster_census(all, threshold);
}

Fig1bResult fig1b_experiment(const Fig1bConfig& config, int threads) {
  if (config.replicates < 1) throw DomainError("replicates must be >= 1");
  if (config.n_grid.empty()) throw DomainError("n grid is empty");
  if (!std::is_sorted(config.n_grid.begin(), config.n_grid.end())) throw DomainError("n grid must be ascending");
  if (config.mixture.family().stat_dim() != config.family.stat_dim()) throw DomainError("mixture and family differ");
  const int reps = config.replicates;
  const std::size_t tasks = config.n_grid.size() * reps;
  std::vector<std::vector<double>> post(tasks);
  std::vector<std::vector<int>> census(config.n_grid.size());
  parallel_for(tasks, threads, [&](std::size_t i) {
    const std::size_t g = i / reps;
    const int r = static_cast<int>(i % reps);
    const int n = config.n_grid[g];
    const auto data = gen_mixture_data(config.mixture, n, task_key(config.seed, n, r));
    if (n <= config.exact_max_n) {
      post[i] = exact_joint_subset_dp(config.model, config.family, config.hyper, data).posterior;
      return;
    }
    auto gcfg = config.gibbs;
    gcfg.seed = task_key(config.seed, n, 1000 + r);
    gcfg.threads = 1;
    gcfg.record_sizes = r == reps - 1;
    const auto res = gibbs_sampler(config.model, config.family, config.hyper, data, gcfg);
    post[i] = res.pooled;
    if (gcfg.record_sizes) census[g] = extra_cluster_census(res, 3).counts;
  });

  Fig1bResult out;
  out.tiny_block_counts = std::move(census);
  for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
    const int n = config.n_grid[g];
    int t_max = std::min(n, config.mixture.components() + 2);
    for (int r = 0; r < reps; ++r) {
      const auto& p = post[g * reps + r];
      for (int t = n; t >= 1; --t) {
        if (p[t - 1] > 0.0) {
          t_max = std::max(t_max, t);
          break;
        }
      }
    }
    std::vector<std::vector<double>> reps_post;
    for (int r = 0; r < reps; ++r) reps_post.push_back(post[g * reps + r]);
    for (int t = 1; t <= t_max; ++t) {
      double sum = 0.0, ss = 0.0;
      for (int r = 0; r < reps; ++r) sum += reps_post[r][t - 1];
      const double mean = sum / reps;
      for (int r = 0; r < reps; ++r) ss += (reps_post[r][t - 1] - mean) * (reps_post[r][t - 1] - mean);
      Fig1bRow row;
      row.n = n;
      row.t = t;
      row.mean_posterior = mean;
      row.stderr_ = reps > 1 ? std::sqrt(ss / (reps - 1) / reps) : 0.0;
      out.rows.push_back(row);
    }
    out.replicate_posteriors.push_back(std::move(reps_post));
  }
  return out;
}

SweepResult inconsistency_sweep(const SweepConfig& config, int t_star, int threads) {
  if (config.n_grid.empty()) throw DomainError("n grid is empty");
  if (!std::is_sorted(config.n_grid.begin(), config.n_grid.end())) throw DomainError("n grid must be ascending");
  if (t_star != config.mixture.components()) {
    throw Refusal("t* = " + std::to_string(t_star) + " must equal the mixture's component count " +
                  std::to_string(config.mixture.components()));
  }
  if (config.n_grid.front() <= t_star) {
    throw Refusal("every n must exceed t* = " + std::to_string(t_star) + " (the bound needs n > t); got n = " +
                  std::to_string(config.n_grid.front()));
  }
  const auto atoms = config.model.max_clusters();
  const bool excluded = atoms && *atoms == t_star;
  SweepResult out;
  out.t_star = t_star;
  const auto cc = bounded_case_constant(config.family, config.hyper, config.region);
  out.c = cc.c;
  const int max_n = config.n_grid.back();
  const auto all = gen_mixture_data(config.mixture, max_n, SplitMix64::stream_key(config.seed, 0));

  std::vector<SweepRow> rows(config.n_grid.size());
  parallel_for(rows.size(), threads, [&](std::size_t g) {
    const int n = config.n_grid[g];
    const auto data = all.head(config.family, n);
    SweepRow row;
    row.n = n;
    row.excluded = excluded;
    double phi = 0.0;
    bool phi_exact = false;
    if (n <= config.exact_max_n) {
      row.engine = "exact";
      row.posterior = exact_joint_subset_dp(config.model, config.family, config.hyper, data).posterior[t_star - 1];
      if (std::isfinite(cc.c)) {
        phi = phi_t(config.family, config.hyper, data, t_star, cc.c).value;
        phi_exact = true;
      }
    } else {
      row.engine = "gibbs";
      auto gcfg = config.gibbs;
      gcfg.seed = SplitMix64::stream_key(config.seed, 1000 + n);
      gcfg.threads = 1;
      gcfg.record_sizes = false;
      const auto res = gibbs_sampler(config.model, config.family, config.hyper, data, gcfg);
      row.posterior = res.pooled[t_star - 1];
      row.mcmc_se = batch_means_se(res.trace, t_star);
      int inside = 0;
      for (const auto& x : data.points()) inside += in_region(config.region, x);
      phi = static_cast<double>(inside) / n;
    }
    row.bound = assemble_bound(config.model, n, t_star, cc.c, phi, phi_exact);
    row.bound.posterior = row.posterior;
    if (excluded) row.bound.note = row.bound.note.empty() ? "excluded: t* = N" : "excluded: t* = N; " + row.bound.note;
    rows[g] = std::move(row);
  });
  double best = -1.0, best_se = 0.0;
  for (auto& row : rows) {
    if (row.posterior > best) {
      best = row.posterior;
      best_se = row.mcmc_se;
    }
    row.running_max = best;
    row.running_max_se = best_se;
  }
  out.rows = std::move(rows);
  return out;
}

}  // namespace gpmix
