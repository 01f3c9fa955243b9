#include "gpmix/partition.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpmix/errors.hpp"
#include "gpmix/numerics.hpp"

namespace gpmix {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double dp_log_v(double theta, int n, int t) {
  return t * std::log(theta) - (std::lgamma(theta + n) - std::lgamma(theta)) - log_factorial(t);
}

double dp_log_w(int a) { return std::lgamma(static_cast<double>(a)); }

const std::vector<double>& custom_row(const std::vector<std::vector<double>>& table, int n,
                                      const char* name) {
  if (n < 1 || static_cast<std::size_t>(n) > table.size()) {
    throw DomainError(std::string("custom model has no ") + name + " table for n=" + std::to_string(n));
  }
  return table[n - 1];
}

}  // namespace

GibbsPartitionModel GibbsPartitionModel::dirichlet(double theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    throw DomainError("Dirichlet process requires theta > 0 (got " + std::to_string(theta) + ")");
  }
  return GibbsPartitionModel(DirichletProcess{theta});
}

GibbsPartitionModel GibbsPartitionModel::pitman_yor(double sigma, double theta) {
  if (!std::isfinite(sigma) || !std::isfinite(theta)) throw DomainError("Pitman-Yor parameters must be finite");
  if (sigma >= 0.0) {
    if (sigma >= 1.0) throw DomainError("Pitman-Yor requires sigma < 1 (got " + std::to_string(sigma) + ")");
    if (!(theta > -sigma)) {
      throw DomainError("Pitman-Yor with sigma in [0,1) requires theta > -sigma (got theta=" +
                        std::to_string(theta) + ", sigma=" + std::to_string(sigma) + ")");
    }
    return GibbsPartitionModel(PitmanYor{sigma, theta, std::nullopt});
  }
  const double ratio = theta / -sigma;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::fabs(ratio - rounded) > 1e-12 * std::max(1.0, rounded)) {
    throw DomainError("Pitman-Yor with sigma < 0 requires theta = N|sigma| for an integer N >= 1 (theta/|sigma| = " +
                      std::to_string(ratio) + ")");
  }
  const int atoms = static_cast<int>(rounded);
  return GibbsPartitionModel(PitmanYor{sigma, atoms * -sigma, atoms});
}

GibbsPartitionModel GibbsPartitionModel::custom(std::vector<std::vector<double>> v,
                                                std::vector<std::vector<double>> w) {
  auto check = [](const std::vector<std::vector<double>>& table, const char* name) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      if (table[i].size() != i + 1) {
        throw DomainError(std::string("custom ") + name + " table row for n=" + std::to_string(i + 1) +
                          " must have " + std::to_string(i + 1) + " entries");
      }
      for (double x : table[i]) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
          throw DomainError(std::string("custom ") + name + " table entries must be finite and >= 0");
        }
      }
    }
  };
  check(v, "v");
  check(w, "w");
  return GibbsPartitionModel(CustomTabulated{std::move(v), std::move(w)});
}

std::optional<int> GibbsPartitionModel::max_clusters() const {
  if (const auto* py = std::get_if<PitmanYor>(&kind_)) return py->atoms;
  return std::nullopt;
}

double GibbsPartitionModel::log_v(int n, int t) const {
  if (n < 1 || t < 1) throw DomainError("log_v requires n >= 1 and t >= 1");
  if (t > n) return kNegInf;
  return std::visit(
      overloaded{
          [&](const DirichletProcess& dp) { return dp_log_v(dp.theta, n, t); },
          [&](const PitmanYor& py) {
            if (py.sigma == 0.0) return dp_log_v(py.theta, n, t);
            double head;
            if (py.atoms) {
              // (theta + sigma)_{t-1 up sigma} has factors |sigma| (N - 1 - i).
              head = 0.0;
              for (int i = 0; i < t - 1; ++i) {
                const int k = *py.atoms - 1 - i;
                if (k == 0) return kNegInf;
                head += std::log(-py.sigma * k);
              }
            } else {
              head = log_rising(py.theta + py.sigma, t - 1, py.sigma);
            }
            return head - log_rising(py.theta + 1.0, n - 1, 1.0) - log_factorial(t);
          },
          [&](const CustomTabulated& c) {
            const double x = custom_row(c.v, n, "v")[t - 1];
            return x > 0.0 ? std::log(x) : kNegInf;
          },
      },
      kind_);
}

double GibbsPartitionModel::log_w(int n, int a) const {
  if (a < 1 || a > n) throw DomainError("log_w requires 1 <= a <= n");
  return std::visit(overloaded{
                        [&](const DirichletProcess&) { return dp_log_w(a); },
                        [&](const PitmanYor& py) {
                          if (py.sigma == 0.0) return dp_log_w(a);
                          return log_rising(1.0 - py.sigma, a - 1, 1.0);
                        },
                        [&](const CustomTabulated& c) {
                          const double x = custom_row(c.w, n, "w")[a - 1];
                          return x > 0.0 ? std::log(x) : kNegInf;
                        },
                    },
                    kind_);
}

std::string GibbsPartitionModel::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const DirichletProcess& dp) { os << "DP(theta=" << dp.theta << ")"; },
                 [&](const PitmanYor& py) {
                   os << "PY(sigma=" << py.sigma << ", theta=" << py.theta;
                   if (py.atoms) os << ", N=" << *py.atoms;
                   os << ")";
                 },
                 [&](const CustomTabulated& c) { os << "Custom(n_max=" << c.v.size() << ")"; },
             },
             kind_);
  return os.str();
}

OrderedPartition::OrderedPartition(std::vector<int> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw StructuralError("partition must contain at least one element");
  const int mx = *std::max_element(labels_.begin(), labels_.end());
  const int mn = *std::min_element(labels_.begin(), labels_.end());
  if (mn < 0) throw StructuralError("partition labels must be nonnegative");
  std::vector<char> used(mx + 1, 0);
  for (int l : labels_) used[l] = 1;
  for (int l = 0; l <= mx; ++l) {
    if (!used[l]) throw StructuralError("partition part " + std::to_string(l) + " is empty");
  }
  num_blocks_ = mx + 1;
}

OrderedPartition OrderedPartition::from_blocks(int n, const std::vector<std::vector<int>>& blocks) {
  std::vector<int> labels(n, -1);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].empty()) throw StructuralError("partition part " + std::to_string(b) + " is empty");
    for (int j : blocks[b]) {
      if (j < 0 || j >= n) throw StructuralError("element " + std::to_string(j) + " out of range");
      if (labels[j] != -1) throw StructuralError("element " + std::to_string(j) + " appears twice");
      labels[j] = static_cast<int>(b);
    }
  }
  for (int j = 0; j < n; ++j) {
    if (labels[j] == -1) throw StructuralError("element " + std::to_string(j) + " is not covered");
  }
  return OrderedPartition(std::move(labels));
}

std::vector<int> OrderedPartition::block_sizes() const {
  std::vector<int> sizes(num_blocks_, 0);
  for (int l : labels_) ++sizes[l];
  return sizes;
}

std::vector<std::vector<int>> OrderedPartition::blocks() const {
  std::vector<std::vector<int>> out(num_blocks_);
  for (int j = 0; j < size(); ++j) out[labels_[j]].push_back(j);
  return out;
}

std::vector<std::uint64_t> OrderedPartition::block_masks() const {
  if (size() > 64) throw Refusal("block_masks requires n <= 64");
  std::vector<std::uint64_t> masks(num_blocks_, 0);
  for (int j = 0; j < size(); ++j) masks[labels_[j]] |= std::uint64_t{1} << j;
  return masks;
}

double log_eppf_sizes(const GibbsPartitionModel& model, int n, std::span<const int> sizes) {
  const int t = static_cast<int>(sizes.size());
  double acc = model.log_v(n, t);
  for (int a : sizes) acc += model.log_w(n, a);
  return std::isnan(acc) ? kNegInf : acc;
}

double log_eppf(const GibbsPartitionModel& model, const OrderedPartition& partition) {
  const auto sizes = partition.block_sizes();
  return log_eppf_sizes(model, partition.size(), sizes);
}

double c_w(const GibbsPartitionModel& model, int n) {
  if (n < 2) throw DomainError("c_w requires n >= 2");
  const double lw1 = model.log_w(n, 1);
  double best = 0.0;
  for (int a = 2; a <= n; ++a) {
    const double num = model.log_w(n, a);
    const double den = (lw1 == kNegInf || model.log_w(n, a - 1) == kNegInf)
                           ? kNegInf
                           : std::log(static_cast<double>(a)) + model.log_w(n, a - 1) + lw1;
    best = std::max(best, ratio_from_logs(num, den));
  }
  return best;
}

double c_v(const GibbsPartitionModel& model, int n, int t) {
  if (t < 1 || t >= n) throw DomainError("c_v requires 1 <= t < n");
  if (const auto* py = std::get_if<PitmanYor>(&model.kind())) {
    // n-dependent normalizers and t! cancel: v_n(t)/v_n(t+1) = (t+1)/(theta + t sigma).
    if (py->atoms) {
      if (t > *py->atoms) return 0.0;
      if (t == *py->atoms) return kInf;
    }
    return (t + 1) / (py->theta + t * py->sigma);
  }
  if (const auto* dp = std::get_if<DirichletProcess>(&model.kind())) return (t + 1) / dp->theta;
  return ratio_from_logs(model.log_v(n, t), model.log_v(n, t + 1));
}

ClusterCountPrior prior_on_t(const GibbsPartitionModel& model, int n) {
  if (n < 1) throw DomainError("prior_on_t requires n >= 1");
  std::vector<double> lw(n + 1);
  for (int a = 1; a <= n; ++a) lw[a] = model.log_w(n, a);
  std::vector<double> lfact(n + 1);
  for (int i = 0; i <= n; ++i) lfact[i] = log_factorial(i);
  auto log_choose = [&](int m, int k) { return lfact[m] - lfact[k] - lfact[m - k]; };

  // bell[m][k] = log B_{m,k}(w_1, w_2, ...): sum over set partitions of m
  // labelled elements into k blocks of prod w(block size).
  std::vector<std::vector<double>> bell(n + 1, std::vector<double>(n + 1, kNegInf));
  bell[0][0] = 0.0;
  std::vector<double> terms;
  for (int m = 1; m <= n; ++m) {
    for (int k = 1; k <= m; ++k) {
      terms.clear();
      // The block containing the first element has size a.
      for (int a = 1; a <= m - k + 1; ++a) {
        const double rest = bell[m - a][k - 1];
        if (rest == kNegInf || lw[a] == kNegInf) continue;
        terms.push_back(log_choose(m - 1, a - 1) + lw[a] + rest);
      }
      bell[m][k] = log_sum_exp(terms);
    }
  }
  ClusterCountPrior prior;
  prior.n = n;
  prior.mass.resize(n);
  for (int t = 1; t <= n; ++t) {
    const double lv = model.log_v(n, t);
    const double lp = (lv == kNegInf || bell[n][t] == kNegInf) ? kNegInf : lv + lfact[t] + bell[n][t];
    prior.mass[t - 1] = std::exp(lp);
  }
  double total = 0.0;
  for (double p : prior.mass) total += p;
  prior.total_mass = total;
  prior.normalized = std::fabs(total - 1.0) <= 1e-10;
  return prior;
}

}  // namespace gpmix
