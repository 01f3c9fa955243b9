#pragma once

#include <stdexcept>
#include <string>

namespace gpmix {

/// Invalid model, family, hyperparameters or data. Maps to CLI exit code 1.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed partition (empty part, label out of range).
class StructuralError : public DomainError {
 public:
  explicit StructuralError(const std::string& what) : DomainError(what) {}
};

/// A computation that is well defined but refused: size caps, unverifiable
/// preconditions. Maps to CLI exit code 2.
class Refusal : public std::runtime_error {
 public:
  explicit Refusal(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gpmix
