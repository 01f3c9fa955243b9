#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace gpmix {

struct DirichletProcess {
  double theta;
};

struct PitmanYor {
  double sigma;
  double theta;
  /// Number of atoms when sigma < 0 (theta = N |sigma|); unset otherwise.
  std::optional<int> atoms;
};

/// Arbitrary Gibbs weights. v[n-1][t-1] = v_n(t) and w[n-1][a-1] = w_n(a).
struct CustomTabulated {
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> w;
};

/// A partition distribution of Gibbs form, p(A) = v_n(t) prod_i w_n(|A_i|),
/// over ordered partitions (A_1, ..., A_t) of {1..n}. Immutable.
class GibbsPartitionModel {
 public:
  using Kind = std::variant<DirichletProcess, PitmanYor, CustomTabulated>;

  static GibbsPartitionModel dirichlet(double theta);
  /// Validates either sigma in [0,1), theta > -sigma, or sigma < 0 with
  /// theta/|sigma| an integer N >= 1 to relative 1e-12.
  static GibbsPartitionModel pitman_yor(double sigma, double theta);
  static GibbsPartitionModel custom(std::vector<std::vector<double>> v,
                                    std::vector<std::vector<double>> w);

  const Kind& kind() const { return kind_; }
  bool is_custom() const { return std::holds_alternative<CustomTabulated>(kind_); }

  /// Largest reachable number of clusters when the model caps it (PY, sigma < 0).
  std::optional<int> max_clusters() const;

  /// log v_n(t); -inf for t > n or when v_n(t) = 0.
  double log_v(int n, int t) const;
  /// log w_n(a) for 1 <= a <= n.
  double log_w(int n, int a) const;

  std::string describe() const;

 private:
  explicit GibbsPartitionModel(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// A labeled partition of {0..n-1} into t nonempty parts; labels are 0-based.
class OrderedPartition {
 public:
  /// Throws StructuralError unless every label in [0, t) is used, t = max label + 1.
  explicit OrderedPartition(std::vector<int> labels);
  /// Blocks are lists of 0-based element indices; they must cover {0..n-1} exactly once.
  static OrderedPartition from_blocks(int n, const std::vector<std::vector<int>>& blocks);

  int size() const { return static_cast<int>(labels_.size()); }
  int num_blocks() const { return num_blocks_; }
  std::span<const int> labels() const { return labels_; }
  std::vector<int> block_sizes() const;
  std::vector<std::vector<int>> blocks() const;
  /// Bitmask per block; requires n <= 64.
  std::vector<std::uint64_t> block_masks() const;

 private:
  std::vector<int> labels_;
  int num_blocks_ = 0;
};

struct ClusterCountPrior {
  int n = 0;
  std::vector<double> mass;  ///< mass[t-1] = p_n(t)
  double total_mass = 0.0;
  /// |total_mass - 1| <= 1e-10. Custom weights are reported, never rescaled.
  bool normalized = false;
};

/// log p(A) for an ordered partition.
double log_eppf(const GibbsPartitionModel& model, const OrderedPartition& partition);
/// log p(A) from block sizes alone (the EPPF is symmetric).
double log_eppf_sizes(const GibbsPartitionModel& model, int n, std::span<const int> sizes);

/// max_{a in 2..n} w_n(a) / (a w_n(a-1) w_n(1)) with 0/0 = 0 and y/0 = +inf.
double c_w(const GibbsPartitionModel& model, int n);

/// v_n(t)/v_n(t+1) with 0/0 = 0 and y/0 = +inf, for 1 <= t < n.
double c_v(const GibbsPartitionModel& model, int n, int t);

/// Prior on the number of clusters via the partial Bell polynomial recurrence.
ClusterCountPrior prior_on_t(const GibbsPartitionModel& model, int n);

}  // namespace gpmix
