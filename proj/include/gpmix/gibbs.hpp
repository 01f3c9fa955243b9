#pragma once

#include <cstdint>
#include <vector>

#include "gpmix/dataset.hpp"
#include "gpmix/expfam.hpp"
#include "gpmix/partition.hpp"

namespace gpmix {

enum class GibbsInit { AllInOne, Singletons, Random };

struct GibbsChainConfig {
  std::uint64_t seed = 1;
  std::int64_t burn_in_sweeps = 10000;
  std::int64_t sample_sweeps = 100000;
  GibbsInit init = GibbsInit::AllInOne;
  int chains = 1;
  /// Visit elements in a fresh random order each sweep instead of 0..n-1.
  bool random_scan = false;
  /// Keep the sorted block sizes of every sampled partition.
  bool record_sizes = false;
  int threads = 1;
};

struct ChainResult {
  int n = 0;
  /// histogram[c][t] = number of sampled sweeps of chain c that ended with t blocks (t = 0 unused).
  std::vector<std::vector<std::int64_t>> histogram;
  /// pooled[t-1] = fraction of all sampled sweeps with t blocks.
  std::vector<double> pooled;
  std::vector<double> chain_mean_t;
  /// trace[c][s] = number of blocks after sampled sweep s of chain c.
  std::vector<std::vector<int>> trace;
  /// sizes[c][s] = block sizes after sampled sweep s (only with record_sizes).
  std::vector<std::vector<std::vector<int>>> sizes;
  /// Final partition of each chain as 0-based labels in first-occurrence order.
  std::vector<std::vector<int>> final_labels;
};

/// Collapsed Gibbs sampler over unordered partitions. Element j is removed
/// and reassigned with weight
///   t! v_n(t) w_n(|B|+1)/w_n(|B|) m(x_{B∪j})/m(x_B)   to existing block B,
///   (t+1)! v_n(t+1) w_n(1) m(x_j)                      to a new block,
/// where t counts the blocks without j. Chain c draws from
/// SplitMix64(stream_key(seed, c)), so results depend only on the config,
/// never on the thread count. Throws DomainError when every candidate has
/// weight zero.
ChainResult gibbs_sampler(const GibbsPartitionModel& model, const ExponentialFamily& family,
                          const ConjugateHyper& hyper, const Dataset& data, const GibbsChainConfig& config);

/// Total variation distance between two distributions on {1..n} (shorter input padded with zeros).
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

/// Batch-means standard error of the mean of the indicator {trace == t},
/// pooling `batches` equal batches per chain.
double batch_means_se(const std::vector<std::vector<int>>& trace, int t, int batches = 20);

}  // namespace gpmix
