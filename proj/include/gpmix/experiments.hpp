#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpmix/dataset.hpp"
#include "gpmix/expfam.hpp"
#include "gpmix/gibbs.hpp"
#include "gpmix/partition.hpp"
#include "gpmix/theory.hpp"

namespace gpmix {

/// Finite mixture sum_i pi_i P_{theta(i)} of one family.
class MixtureSpec {
 public:
  /// Throws DomainError unless weights are nonnegative and sum to 1 within
  /// 1e-12 and every theta lies in Theta.
  MixtureSpec(ExponentialFamily family, std::vector<double> weights, std::vector<Vec> thetas);
  /// Components given by their moment points mu_i = E s(X) (mapped through
  /// the Legendre map). For normal_gamma mu = (mean, mean^2 + variance).
  static MixtureSpec from_means(ExponentialFamily family, std::vector<double> weights, const std::vector<Vec>& means);

  const ExponentialFamily& family() const { return family_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<Vec>& thetas() const { return thetas_; }
  int components() const { return static_cast<int>(weights_.size()); }

 private:
  ExponentialFamily family_;
  std::vector<double> weights_;
  std::vector<Vec> thetas_;
};

/// n i.i.d. draws with their component labels, a pure function of (spec, n, seed).
Dataset gen_mixture_data(const MixtureSpec& spec, int n, std::uint64_t seed);

struct SizeDistribution {
  int n = 0;
  std::vector<double> pmf;  ///< pmf[a-1] = P(a_1 = a | t = 2), a = 1..n-1
  std::vector<double> cdf;
  /// P(a_1 <= fraction * n | t = 2)
  double lower_tail(double fraction) const;
  /// P(min(a_1, n - a_1) <= fraction * n | t = 2)
  double extreme_mass(double fraction) const;
};

/// Exact law of the first block size given two blocks under a Dirichlet
/// process: P(a_1 = a | t = 2) ∝ C(n,a) (a-1)! (n-a-1)! ∝ 1/(a (n-a)); it
/// does not depend on theta, which is validated and otherwise unused.
SizeDistribution fig3_size_distribution(double theta, int n);

struct Fig1bConfig {
  MixtureSpec mixture;
  GibbsPartitionModel model;
  ExponentialFamily family;
  ConjugateHyper hyper;
  std::vector<int> n_grid;
  int replicates = 10;
  std::uint64_t seed = 1;
  GibbsChainConfig gibbs;
  /// Anchor: exact engine for replicate datasets with n at most this.
  int exact_max_n = 14;
};

struct Fig1bRow {
  int n = 0;
  int t = 0;
  double mean_posterior = 0.0;
  double stderr_ = 0.0;
};

struct Fig1bResult {
  std::vector<Fig1bRow> rows;
  /// per n, the replicate posteriors (replicate-major), for inspection
  std::vector<std::vector<std::vector<double>>> replicate_posteriors;
  /// Census of blocks of size <= 3 per sampled sweep of the last replicate at each n.
  std::vector<std::vector<int>> tiny_block_counts;
};

/// For each n and replicate: draw a dataset from the mixture (stream keyed by
/// the master seed and the (n, replicate) coordinates), estimate p(T = t | x)
/// by Gibbs sampling (or exactly for small n), then average over replicates.
Fig1bResult fig1b_experiment(const Fig1bConfig& config, int threads = 1);

struct Census {
  std::vector<int> counts;  ///< per sampled partition, blocks of size <= threshold
  double q10 = 0.0, median = 0.0, q90 = 0.0;
};

/// Counts blocks of size <= threshold in each recorded partition.
Census extra_cluster_census(const std::vector<std::vector<int>>& sizes_per_sweep, int threshold);
Census extra_cluster_census(const ChainResult& result, int threshold);
/// Quantiles of precomputed counts.
Census census_from_counts(std::vector<int> counts);

struct SweepConfig {
  MixtureSpec mixture;
  GibbsPartitionModel model;
  ExponentialFamily family;
  ConjugateHyper hyper;
  std::vector<int> n_grid;  ///< ascending
  std::uint64_t seed = 1;
  /// Region U for the bounded-case constant; phi_t is bounded below by the
  /// fraction of points in U when it is not computed exactly.
  SampleRegion region;
  int exact_max_n = 14;
  GibbsChainConfig gibbs;
};

struct SweepRow {
  int n = 0;
  std::string engine;  ///< "exact" or "gibbs"
  double posterior = 0.0;
  double mcmc_se = 0.0;  ///< 0 for exact rows
  BoundReport bound;
  bool excluded = false;  ///< t* = N for a Pitman-Yor model with sigma < 0
  double running_max = 0.0;
  double running_max_se = 0.0;
};

struct SweepResult {
  int t_star = 0;
  double c = 0.0;
  std::vector<SweepRow> rows;
};

/// One growing dataset (prefixes of a single draw of size max n) is
/// evaluated at each grid n: exact posterior and exact phi_t for n up to
/// exact_max_n, Gibbs estimates and the fraction-in-U lower bound on phi_t
/// beyond. Refuses when some n <= t* or t* differs from the mixture's
/// component count.
SweepResult inconsistency_sweep(const SweepConfig& config, int t_star, int threads = 1);

}  // namespace gpmix
