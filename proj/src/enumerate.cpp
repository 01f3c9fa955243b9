#include "gpmix/enumerate.hpp"

#include <algorithm>
#include <string>

#include "gpmix/errors.hpp"
#include "gpmix/numerics.hpp"

namespace gpmix {

SetPartitionEnumerator::SetPartitionEnumerator(int n, int blocks, int cap)
    : n_(n), blocks_(blocks), rgs_(n, 0), prefix_max_(n, 0) {
  if (n < 1) throw DomainError("partition enumeration requires n >= 1");
  if (n > cap) {
    throw Refusal("partition enumeration refused: n=" + std::to_string(n) + " exceeds the enumeration cap of " +
                  std::to_string(cap) + " (raise the cap explicitly to override)");
  }
  if (blocks < 0 || blocks > n) throw DomainError("block count must lie in [1, n] (or 0 for all)");
  fill_suffix(1);
}

void SetPartitionEnumerator::fill_suffix(int from) {
  // Smallest completion: zeros, then fresh labels packed at the end when a
  // fixed block count must still be reached.
  int used = from > 0 ? prefix_max_[from - 1] + 1 : 0;
  const int fresh = blocks_ > 0 ? std::max(0, blocks_ - used) : 0;
  const int zeros_end = n_ - fresh;
  for (int i = from; i < n_; ++i) {
    rgs_[i] = i < zeros_end ? 0 : used++;
    prefix_max_[i] = std::max(i > 0 ? prefix_max_[i - 1] : 0, rgs_[i]);
  }
}

bool SetPartitionEnumerator::next() {
  for (int i = n_ - 1; i >= 1; --i) {
    const int limit = prefix_max_[i - 1] + 1;
    const int cand = rgs_[i] + 1;
    if (cand > limit) continue;
    if (blocks_ > 0) {
      if (cand > blocks_ - 1) continue;
      const int used = std::max(prefix_max_[i - 1], cand) + 1;
      if (blocks_ - used > n_ - 1 - i) continue;
    }
    rgs_[i] = cand;
    prefix_max_[i] = std::max(prefix_max_[i - 1], cand);
    fill_suffix(i + 1);
    return true;
  }
  return false;
}

double SetPartitionEnumerator::multiplicity() const {
  double f = 1.0;
  for (int k = 2; k <= num_blocks(); ++k) f *= k;
  return f;
}

void SetPartitionEnumerator::block_masks(std::vector<std::uint64_t>& out) const {
  out.assign(num_blocks(), 0);
  for (int j = 0; j < n_; ++j) out[rgs_[j]] |= std::uint64_t{1} << j;
}

double stirling2(int n, int k) {
  if (n < 0 || k < 0) return 0.0;
  std::vector<double> row(k + 1, 0.0);
  row[0] = 1.0;  // S(0,0)
  for (int m = 1; m <= n; ++m) {
    for (int j = std::min(m, k); j >= 1; --j) row[j] = j * row[j] + row[j - 1];
    row[0] = 0.0;
  }
  return row[k];
}

double bell_number(int n) {
  double total = 0.0;
  for (int k = 0; k <= n; ++k) total += stirling2(n, k);
  return total;
}

}  // namespace gpmix
