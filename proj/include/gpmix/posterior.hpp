#pragma once

#include <cstdint>
#include <vector>

#include "gpmix/dataset.hpp"
#include "gpmix/expfam.hpp"
#include "gpmix/partition.hpp"

namespace gpmix {

inline constexpr int kDefaultSubsetDpCap = 20;

struct ClusterCountPosterior {
  int n = 0;
  std::vector<double> log_joint;  ///< log_joint[t-1] = log p(x_{1:n}, T_n = t)
  double log_evidence = 0.0;
  std::vector<double> posterior;  ///< posterior[t-1] = p(T_n = t | x_{1:n})
  /// Every joint entry is -inf; the posterior is then all zeros.
  bool degenerate = false;
};

/// Normalizes a log joint. An all -inf input gives a zero posterior, a
/// -inf evidence and the degenerate flag.
ClusterCountPosterior posterior_of_t(std::vector<double> log_joint);

/// log m(x_S) for every subset S of {0..n-1}, indexed by bitmask (entry 0 is 0).
/// Requires n <= 30.
std::vector<double> subset_log_marginals(const ExponentialFamily& family, const ConjugateHyper& hyper,
                                         const Dataset& data);

/// Sum over all partitions of {0..n-1}, given log m per subset bitmask.
/// Throws Refusal when n exceeds the cap.
ClusterCountPosterior exact_joint_enumeration(const GibbsPartitionModel& model, int n,
                                              const std::vector<double>& log_m, int cap = 13);
ClusterCountPosterior exact_joint_enumeration(const GibbsPartitionModel& model, const ExponentialFamily& family,
                                              const ConjugateHyper& hyper, const Dataset& data, int cap = 13);

/// Same quantity by dynamic programming over subsets: with h(B) = w_n(|B|) m(x_B),
///   F(S, t) = sum over B ⊆ S containing min S of h(B) F(S \ B, t - 1),
/// then p(x, T = t) = t! v_n(t) F(full, t). Subsets are processed in popcount
/// layers, optionally on several threads; the result does not depend on the
/// thread count. Throws Refusal when n exceeds the cap.
ClusterCountPosterior exact_joint_subset_dp(const GibbsPartitionModel& model, int n, const std::vector<double>& log_m,
                                            int cap = kDefaultSubsetDpCap, int threads = 1);
ClusterCountPosterior exact_joint_subset_dp(const GibbsPartitionModel& model, const ExponentialFamily& family,
                                            const ConjugateHyper& hyper, const Dataset& data,
                                            int cap = kDefaultSubsetDpCap, int threads = 1);

}  // namespace gpmix
