#include "gpmix/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gpmix/errors.hpp"
#include "gpmix/numerics.hpp"
#include "gpmix/parallel.hpp"
#include "gpmix/rng.hpp"

namespace gpmix {

namespace {

struct Tables {
  std::vector<double> lt;        // lt[t] = log v_n(t) + log t!, t = 0..n
  std::vector<double> lw;        // lw[a] = log w_n(a)
  std::vector<double> lw_ratio;  // lw_ratio[a] = log w_n(a+1) - log w_n(a)
  double psi0 = 0.0;
};

class Chain {
 public:
  Chain(const ExponentialFamily& family, const ConjugateHyper& hyper, const Dataset& data, const Tables& tab,
        const GibbsChainConfig& cfg, std::uint64_t key)
      : family_(family), hyper_(hyper), data_(data), tab_(tab), cfg_(cfg), rng_(key),
        n_(data.size()), k_(family.stat_dim()), labels_(n_, -1), scratch_(k_) {
    single_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      for (int i = 0; i < k_; ++i) scratch_[i] = hyper_.xi[i] + data_.stats()[j][i];
      single_[j] = log_m(scratch_.data(), 1);
    }
    initialize();
  }

  void sweep() {
    if (cfg_.random_scan) {
      order_.resize(n_);
      std::iota(order_.begin(), order_.end(), 0);
      for (int i = n_ - 1; i > 0; --i) std::swap(order_[i], order_[rng_.below(i + 1)]);
      for (int j : order_) update(j);
    } else {
      for (int j = 0; j < n_; ++j) update(j);
    }
  }

  int num_blocks() const { return static_cast<int>(active_.size()); }

  std::vector<int> sizes() const {
    std::vector<int> out;
    out.reserve(active_.size());
    for (int b : active_) out.push_back(count_[b]);
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
  }

  std::vector<int> canonical_labels() const {
    std::vector<int> map(count_.size(), -1), out(n_);
    int next = 0;
    for (int j = 0; j < n_; ++j) {
      int& m = map[labels_[j]];
      if (m < 0) m = next++;
      out[j] = m;
    }
    return out;
  }

 private:
  double log_m(const double* post, int count) const {
    return family_.log_psi(std::span<const double>(post, k_), hyper_.nu + count) - tab_.psi0;
  }

  double* post(int b) { return post_.data() + static_cast<std::size_t>(b) * k_; }

  int open_block() {
    int b;
    if (!free_.empty()) {
      b = free_.back();
      free_.pop_back();
    } else {
      b = static_cast<int>(count_.size());
      count_.push_back(0);
      logm_.push_back(0.0);
      where_.push_back(-1);
      post_.resize(post_.size() + k_);
    }
    count_[b] = 0;
    for (int i = 0; i < k_; ++i) post(b)[i] = hyper_.xi[i];
    where_[b] = static_cast<int>(active_.size());
    active_.push_back(b);
    return b;
  }

  void close_block(int b) {
    const int pos = where_[b];
    const int last = active_.back();
    active_[pos] = last;
    where_[last] = pos;
    active_.pop_back();
    where_[b] = -1;
    free_.push_back(b);
  }

  void add(int j, int b) {
    const Vec& s = data_.stats()[j];
    for (int i = 0; i < k_; ++i) post(b)[i] += s[i];
    ++count_[b];
    logm_[b] = log_m(post(b), count_[b]);
    labels_[j] = b;
  }

  void remove(int j) {
    const int b = labels_[j];
    const Vec& s = data_.stats()[j];
    --count_[b];
    labels_[j] = -1;
    if (count_[b] == 0) {
      close_block(b);
      return;
    }
    for (int i = 0; i < k_; ++i) post(b)[i] -= s[i];
    logm_[b] = log_m(post(b), count_[b]);
  }

  void initialize() {
    std::vector<int> init(n_, 0);
    switch (cfg_.init) {
      case GibbsInit::AllInOne: break;
      case GibbsInit::Singletons: std::iota(init.begin(), init.end(), 0); break;
      case GibbsInit::Random:
        for (int j = 0; j < n_; ++j) init[j] = static_cast<int>(rng_.below(n_));
        break;
    }
    std::vector<int> block_of(n_, -1);
    for (int j = 0; j < n_; ++j) {
      int& b = block_of[init[j]];
      if (b < 0) b = open_block();
      add(j, b);
    }
    double lp = tab_.lt[num_blocks()];
    for (int b : active_) lp += tab_.lw[count_[b]] + logm_[b];
    if (!(lp > kNegInf)) {
      throw DomainError("initial partition has probability zero under the model; choose another init");
    }
  }

  void update(int j) {
    remove(j);
    const int t = num_blocks();
    const Vec& s = data_.stats()[j];
    weights_.resize(t + 1);
    double top = kNegInf;
    for (int idx = 0; idx < t; ++idx) {
      const int b = active_[idx];
      for (int i = 0; i < k_; ++i) scratch_[i] = post(b)[i] + s[i];
      const double w = tab_.lt[t] + tab_.lw_ratio[count_[b]] + log_m(scratch_.data(), count_[b] + 1) - logm_[b];
      weights_[idx] = w;
      top = std::max(top, w);
    }
    weights_[t] = tab_.lt[t + 1] + tab_.lw[1] + single_[j];
    top = std::max(top, weights_[t]);
    if (!(top > kNegInf)) {
      throw DomainError("every reassignment has probability zero; the model and data are incompatible");
    }
    double total = 0.0;
    for (double& w : weights_) {
      w = std::exp(w - top);
      total += w;
    }
    double u = rng_.uniform() * total;
    int choice = t;
    for (int idx = 0; idx <= t; ++idx) {
      if (weights_[idx] == 0.0) continue;
      choice = idx;
      if (u < weights_[idx]) break;
      u -= weights_[idx];
    }
    const int b = choice < t ? active_[choice] : open_block();
    add(j, b);
  }

  const ExponentialFamily& family_;
  const ConjugateHyper& hyper_;
  const Dataset& data_;
  const Tables& tab_;
  const GibbsChainConfig& cfg_;
  SplitMix64 rng_;
  int n_;
  int k_;
  std::vector<int> labels_;
  std::vector<double> scratch_;
  std::vector<double> single_;
  std::vector<int> count_;
  std::vector<double> logm_;
  std::vector<int> where_;
  std::vector<double> post_;
  std::vector<int> active_;
  std::vector<int> free_;
  std::vector<double> weights_;
  std::vector<int> order_;
};

}  // namespace

ChainResult gibbs_sampler(const GibbsPartitionModel& model, const ExponentialFamily& family,
                          const ConjugateHyper& hyper, const Dataset& data, const GibbsChainConfig& config) {
  const int n = data.size();
  if (n < 1) throw DomainError("Gibbs sampler needs at least one observation");
  if (config.chains < 1) throw DomainError("Gibbs sampler needs chains >= 1");
  if (config.burn_in_sweeps < 0 || config.sample_sweeps < 0) throw DomainError("sweep counts must be nonnegative");
  if (data.stat_dim() != family.stat_dim()) throw DomainError("dataset does not match the family");

  Tables tab;
  tab.lt.assign(n + 2, kNegInf);
  for (int t = 1; t <= n; ++t) {
    const double lv = model.log_v(n, t);
    tab.lt[t] = lv == kNegInf ? kNegInf : lv + log_factorial(t);
  }
  tab.lw.assign(n + 1, kNegInf);
  for (int a = 1; a <= n; ++a) tab.lw[a] = model.log_w(n, a);
  tab.lw_ratio.assign(n + 1, kNegInf);
  for (int a = 1; a < n; ++a) {
    if (tab.lw[a] > kNegInf) tab.lw_ratio[a] = tab.lw[a + 1] - tab.lw[a];
  }
  tab.psi0 = family.log_psi(hyper.xi, hyper.nu);

  ChainResult out;
  out.n = n;
  const int chains = config.chains;
  out.histogram.assign(chains, std::vector<std::int64_t>(n + 1, 0));
  out.trace.assign(chains, {});
  out.sizes.assign(chains, {});
  out.final_labels.assign(chains, {});
  out.chain_mean_t.assign(chains, 0.0);

  parallel_for(chains, config.threads, [&](std::size_t c) {
    Chain chain(family, hyper, data, tab, config, SplitMix64::stream_key(config.seed, c));
    for (std::int64_t s = 0; s < config.burn_in_sweeps; ++s) chain.sweep();
    auto& trace = out.trace[c];
    trace.reserve(config.sample_sweeps);
    for (std::int64_t s = 0; s < config.sample_sweeps; ++s) {
      chain.sweep();
      const int t = chain.num_blocks();
      trace.push_back(t);
      ++out.histogram[c][t];
      if (config.record_sizes) out.sizes[c].push_back(chain.sizes());
    }
    double sum = 0.0;
    for (int t : trace) sum += t;
    out.chain_mean_t[c] = trace.empty() ? std::nan("") : sum / trace.size();
    out.final_labels[c] = chain.canonical_labels();
  });

  out.pooled.assign(n, 0.0);
  const double total = static_cast<double>(config.sample_sweeps) * chains;
  if (total > 0) {
    for (int t = 1; t <= n; ++t) {
      std::int64_t cnt = 0;
      for (int c = 0; c < chains; ++c) cnt += out.histogram[c][t];
      out.pooled[t - 1] = cnt / total;
    }
  }
  return out;
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  const std::size_t len = std::max(p.size(), q.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    const double a = i < p.size() ? p[i] : 0.0;
    const double b = i < q.size() ? q[i] : 0.0;
    acc += std::fabs(a - b);
  }
  return 0.5 * acc;
}

double batch_means_se(const std::vector<std::vector<int>>& trace, int t, int batches) {
  std::vector<double> means;
  for (const auto& tr : trace) {
    const std::size_t len = tr.size() / batches;
    if (len == 0) continue;
    for (int b = 0; b < batches; ++b) {
      std::size_t hit = 0;
      for (std::size_t i = b * len; i < (b + 1) * len; ++i) hit += tr[i] == t;
      means.push_back(static_cast<double>(hit) / len);
    }
  }
  if (means.size() < 2) return std::nan("");
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / means.size();
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  return std::sqrt(ss / (means.size() - 1) / means.size());
}

}  // namespace gpmix
