#pragma once

#include <optional>
#include <vector>

#include "gpmix/expfam.hpp"

namespace gpmix {

/// Observations x_1..x_n of one family with their sufficient statistics.
class Dataset {
 public:
  /// Throws DomainError when a point is outside the sample space.
  Dataset(const ExponentialFamily& family, std::vector<Vec> points, std::optional<std::vector<int>> labels = {});

  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<Vec>& points() const { return points_; }
  const std::vector<Vec>& stats() const { return stats_; }
  const std::optional<std::vector<int>>& labels() const { return labels_; }
  int stat_dim() const { return stat_dim_; }

  /// The first n points (labels kept).
  Dataset head(const ExponentialFamily& family, int n) const;
  /// Points reordered by perm (new index i holds old point perm[i]).
  Dataset permuted(const ExponentialFamily& family, const std::vector<int>& perm) const;

 private:
  std::vector<Vec> points_;
  std::vector<Vec> stats_;
  std::optional<std::vector<int>> labels_;
  int stat_dim_ = 0;
};

}  // namespace gpmix
