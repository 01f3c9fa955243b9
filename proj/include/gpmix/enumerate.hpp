#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gpmix/partition.hpp"

namespace gpmix {

inline constexpr int kDefaultEnumerationCap = 13;

/// Walks the unordered set partitions of {0..n-1} as restricted growth
/// strings a_0 = 0, a_i <= 1 + max(a_0..a_{i-1}), in lexicographic order.
/// Optionally restricted to exactly `blocks` parts. Single consumer.
///
///   SetPartitionEnumerator it(4, 2);
///   do { use(it.rgs()); } while (it.next());
class SetPartitionEnumerator {
 public:
  /// blocks = 0 enumerates every partition. Throws Refusal when n > cap.
  SetPartitionEnumerator(int n, int blocks = 0, int cap = kDefaultEnumerationCap);

  /// Advances to the next partition; false once exhausted (state is then unspecified).
  bool next();

  std::span<const int> rgs() const { return rgs_; }
  int num_blocks() const { return prefix_max_.back() + 1; }
  int size() const { return n_; }
  /// Number of ordered partitions represented by the current one (t!).
  double multiplicity() const;
  OrderedPartition partition() const { return OrderedPartition(rgs_); }
  /// Bitmask of each block, indexed by label; requires n <= 64.
  void block_masks(std::vector<std::uint64_t>& out) const;

 private:
  void fill_suffix(int from);

  int n_;
  int blocks_;
  std::vector<int> rgs_;
  std::vector<int> prefix_max_;  // max(a_0..a_i)
};

/// Stirling number of the second kind S(n, k) as a double (exact up to ~2^53).
double stirling2(int n, int k);
/// Bell number B(n) as a double.
double bell_number(int n);

}  // namespace gpmix
