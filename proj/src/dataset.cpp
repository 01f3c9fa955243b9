#include "gpmix/dataset.hpp"

#include "gpmix/errors.hpp"

namespace gpmix {

Dataset::Dataset(const ExponentialFamily& family, std::vector<Vec> points, std::optional<std::vector<int>> labels)
    : points_(std::move(points)), labels_(std::move(labels)), stat_dim_(family.stat_dim()) {
  if (labels_ && labels_->size() != points_.size()) throw DomainError("label count must match the number of points");
  stats_.reserve(points_.size());
  for (std::size_t j = 0; j < points_.size(); ++j) {
    if (!family.in_sample_space(points_[j])) {
      throw DomainError("data point " + std::to_string(j + 1) + " is outside the sample space of " + family.name());
    }
    stats_.push_back(family.stat(points_[j]));
  }
}

Dataset Dataset::head(const ExponentialFamily& family, int n) const {
  if (n < 0 || n > size()) throw DomainError("cannot take " + std::to_string(n) + " of " + std::to_string(size()) + " points");
  std::vector<Vec> pts(points_.begin(), points_.begin() + n);
  std::optional<std::vector<int>> lab;
  if (labels_) lab.emplace(labels_->begin(), labels_->begin() + n);
  return Dataset(family, std::move(pts), std::move(lab));
}

Dataset Dataset::permuted(const ExponentialFamily& family, const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != size()) throw DomainError("permutation length must match the dataset");
  std::vector<Vec> pts;
  std::optional<std::vector<int>> lab;
  if (labels_) lab.emplace();
  for (int i : perm) {
    pts.push_back(points_.at(i));
    if (labels_) lab->push_back((*labels_)[i]);
  }
  return Dataset(family, std::move(pts), std::move(lab));
}

}  // namespace gpmix
