#include "gpmix/posterior.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "gpmix/enumerate.hpp"
#include "gpmix/errors.hpp"
#include "gpmix/numerics.hpp"
#include "gpmix/parallel.hpp"

namespace gpmix {

namespace {

void require_table(int n, const std::vector<double>& log_m) {
  if (n < 1) throw DomainError("posterior needs at least one observation");
  if (log_m.size() != (std::size_t{1} << n)) throw DomainError("subset marginal table must have 2^n entries");
}

std::vector<double> log_t_factor(const GibbsPartitionModel& model, int n) {
  std::vector<double> out(n);
  for (int t = 1; t <= n; ++t) {
    const double lv = model.log_v(n, t);
    out[t - 1] = lv == kNegInf ? kNegInf : lv + log_factorial(t);
  }
  return out;
}

}  // namespace

ClusterCountPosterior posterior_of_t(std::vector<double> log_joint) {
  ClusterCountPosterior out;
  out.n = static_cast<int>(log_joint.size());
  out.log_joint = std::move(log_joint);
  out.log_evidence = log_sum_exp(out.log_joint);
  out.posterior.assign(out.n, 0.0);
  if (out.log_evidence == kNegInf) {
    out.degenerate = true;
    return out;
  }
  for (int t = 0; t < out.n; ++t) out.posterior[t] = std::exp(out.log_joint[t] - out.log_evidence);
  return out;
}

std::vector<double> subset_log_marginals(const ExponentialFamily& family, const ConjugateHyper& hyper,
                                         const Dataset& data) {
  const int n = data.size();
  if (n > 30) throw Refusal("subset marginal table needs n <= 30 (got " + std::to_string(n) + ")");
  const int k = family.stat_dim();
  const std::size_t total = std::size_t{1} << n;
  std::vector<double> sums(total * k, 0.0);
  std::vector<double> out(total, 0.0);
  std::vector<double> post(k);
  const double psi0 = family.log_psi(hyper.xi, hyper.nu);
  for (std::size_t mask = 1; mask < total; ++mask) {
    const int low = std::countr_zero(mask);
    const std::size_t prev = mask & (mask - 1);
    const Vec& s = data.stats()[low];
    for (int i = 0; i < k; ++i) sums[mask * k + i] = sums[prev * k + i] + s[i];
    for (int i = 0; i < k; ++i) post[i] = hyper.xi[i] + sums[mask * k + i];
    out[mask] = family.log_psi(std::span<const double>(post), hyper.nu + std::popcount(mask)) - psi0;
  }
  return out;
}

ClusterCountPosterior exact_joint_enumeration(const GibbsPartitionModel& model, int n,
                                              const std::vector<double>& log_m, int cap) {
  if (n > cap) {
    throw Refusal("exact enumeration is capped at n = " + std::to_string(cap) + " (got n = " + std::to_string(n) +
                  "); use the subset DP engine");
  }
  require_table(n, log_m);
  std::vector<double> lw(n + 1, kNegInf);
  for (int a = 1; a <= n; ++a) lw[a] = model.log_w(n, a);
  std::vector<double> acc(n, kNegInf);
  SetPartitionEnumerator it(n, 0, cap);
  std::vector<std::uint64_t> masks;
  do {
    it.block_masks(masks);
    double term = 0.0;
    for (auto m : masks) term += lw[std::popcount(m)] + log_m[m];
    const int t = static_cast<int>(masks.size());
    acc[t - 1] = log_add(acc[t - 1], term);
  } while (it.next());
  const auto lt = log_t_factor(model, n);
  std::vector<double> joint(n);
  for (int t = 1; t <= n; ++t) joint[t - 1] = (lt[t - 1] == kNegInf || acc[t - 1] == kNegInf) ? kNegInf : lt[t - 1] + acc[t - 1];
  return posterior_of_t(std::move(joint));
}

ClusterCountPosterior exact_joint_enumeration(const GibbsPartitionModel& model, const ExponentialFamily& family,
                                              const ConjugateHyper& hyper, const Dataset& data, int cap) {
  if (data.size() > cap) {
    throw Refusal("exact enumeration is capped at n = " + std::to_string(cap) + " (got n = " +
                  std::to_string(data.size()) + "); use the subset DP engine");
  }
  return exact_joint_enumeration(model, data.size(), subset_log_marginals(family, hyper, data), cap);
}

ClusterCountPosterior exact_joint_subset_dp(const GibbsPartitionModel& model, int n, const std::vector<double>& log_m,
                                            int cap, int threads) {
  if (n > cap) {
    throw Refusal("subset DP is capped at n = " + std::to_string(cap) + " (got n = " + std::to_string(n) + ")");
  }
  require_table(n, log_m);
  const std::size_t total = std::size_t{1} << n;
  const std::size_t full = total - 1;

  std::vector<double> logh(total, kNegInf);
  {
    std::vector<double> lw(n + 1, kNegInf);
    for (int a = 1; a <= n; ++a) lw[a] = model.log_w(n, a);
    for (std::size_t m = 1; m < total; ++m) {
      const double w = lw[std::popcount(m)];
      logh[m] = (w == kNegInf || log_m[m] == kNegInf) ? kNegInf : w + log_m[m];
    }
  }

  // F(S) is stored as exp(scale[S]) * lin[offset[S] + t - 1] for t = 1..|S|.
  std::vector<std::size_t> offset(total + 1, 0);
  for (std::size_t m = 0; m < total; ++m) offset[m + 1] = offset[m] + std::popcount(m);
  std::vector<double> lin(offset[total], 0.0);
  std::vector<double> scale(total, kNegInf);
  scale[0] = 0.0;

  std::vector<std::vector<std::size_t>> layers(n + 1);
  for (std::size_t m = 1; m < total; ++m) layers[std::popcount(m)].push_back(m);

  auto compute = [&](std::size_t S) {
    const std::size_t low = S & (~S + 1);
    const std::size_t rest = S ^ low;
    double top = kNegInf;
    std::size_t sub = rest;
    while (true) {
      const std::size_t R = rest ^ sub;
      const double v = logh[low | sub] + scale[R];
      if (v > top) top = v;
      if (sub == 0) break;
      sub = (sub - 1) & rest;
    }
    double* out = lin.data() + offset[S];
    const int size = std::popcount(S);
    if (top == kNegInf) return;
    sub = rest;
    while (true) {
      const std::size_t R = rest ^ sub;
      const double v = logh[low | sub] + scale[R];
      if (v != kNegInf) {
        const double wgt = std::exp(v - top);
        if (R == 0) {
          out[0] += wgt;
        } else {
          const double* in = lin.data() + offset[R];
          const int r = std::popcount(R);
          for (int i = 0; i < r; ++i) out[i + 1] += wgt * in[i];
        }
      }
      if (sub == 0) break;
      sub = (sub - 1) & rest;
    }
    double mx = 0.0;
    for (int i = 0; i < size; ++i) mx = std::max(mx, out[i]);
    if (mx == 0.0) return;
    for (int i = 0; i < size; ++i) out[i] /= mx;
    scale[S] = top + std::log(mx);
  };

  for (int p = 1; p <= n; ++p) {
    const auto& layer = layers[p];
    if (p == n) {
      compute(full);
    } else {
      parallel_for(layer.size(), threads, [&](std::size_t i) { compute(layer[i]); });
    }
  }

  const auto lt = log_t_factor(model, n);
  std::vector<double> joint(n, kNegInf);
  const double* f = lin.data() + offset[full];
  for (int t = 1; t <= n; ++t) {
    if (lt[t - 1] == kNegInf || scale[full] == kNegInf || f[t - 1] == 0.0) continue;
    joint[t - 1] = lt[t - 1] + scale[full] + std::log(f[t - 1]);
  }
  return posterior_of_t(std::move(joint));
}

ClusterCountPosterior exact_joint_subset_dp(const GibbsPartitionModel& model, const ExponentialFamily& family,
                                            const ConjugateHyper& hyper, const Dataset& data, int cap, int threads) {
  if (data.size() > cap) {
    throw Refusal("subset DP is capped at n = " + std::to_string(cap) + " (got n = " + std::to_string(data.size()) +
                  ")");
  }
  return exact_joint_subset_dp(model, data.size(), subset_log_marginals(family, hyper, data), cap, threads);
}

}  // namespace gpmix
