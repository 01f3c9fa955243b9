#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpmix/dataset.hpp"
#include "gpmix/experiments.hpp"
#include "gpmix/expfam.hpp"
#include "gpmix/gibbs.hpp"
#include "gpmix/laplace.hpp"
#include "gpmix/partition.hpp"
#include "gpmix/theory.hpp"

namespace gpmix {

using Json = nlohmann::ordered_json;

/// Parses JSON text; syntax errors become DomainError with "line L, column C".
Json parse_config_text(const std::string& text, const std::string& source = "config");
/// Reads and parses a file; a missing file is a DomainError.
Json load_config_file(const std::string& path);

/// Typed access into a config with the dotted field path in every error.
class ConfigView {
 public:
  ConfigView(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  bool has(const std::string& key) const;
  ConfigView at(const std::string& key) const;
  const Json& json() const { return *j_; }
  const std::string& path() const { return path_; }

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  std::uint64_t seed_or(const std::string& key, std::uint64_t fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<int> integers(const std::string& key) const;
  /// A list of points; scalars are read as one-dimensional vectors.
  std::vector<Vec> vectors(const std::string& key) const;
  Vec vector(const std::string& key) const;
  std::vector<std::vector<double>> table(const std::string& key) const;

  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

 private:
  const Json* j_;
  std::string path_;
};

/// {"kind": "dp"|"py"|"custom", "theta", "sigma", "v", "w"}
GibbsPartitionModel model_from_config(const ConfigView& v);
/// {"family": name, "params": {"variances": [...]}, "xi": [...], "nu": ...}
ExponentialFamily family_from_config(const ConfigView& v);
ConjugateHyper hyper_from_config(const ExponentialFamily& family, const ConfigView& v);
/// {"weights": [...], "means": [[...], ...]} or {"weights", "thetas"}
MixtureSpec mixture_from_config(const ExponentialFamily& family, const ConfigView& v);
/// {"points": [...]} or {"mixture": {...}, "n": N, "seed": S}
Dataset data_from_config(const ExponentialFamily& family, const ConfigView& v, std::uint64_t default_seed);
GibbsChainConfig gibbs_from_config(const ConfigView& v, std::uint64_t default_seed);
MomentSpaceBox box_from_config(const ConfigView& v);
SampleRegion region_from_config(const ConfigView& v);

}  // namespace gpmix
