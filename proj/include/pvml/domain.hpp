#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pvml/example.hpp"

namespace pvml {

struct FeatureStats {
  std::string name;
  std::size_t id = 0;
  std::int64_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  bool operator==(const FeatureStats&) const = default;
};

/// Id-indexed sparse vector: (feature id, value) pairs sorted by id.
using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

/// The named feature space a dataset or model was built over. Ids are dense
/// and follow lexicographic name order.
class FeatureDomain {
 public:
  FeatureDomain() = default;
  /// Statistics over observed values only; population variance.
  static FeatureDomain from_examples(std::span<const Example> examples);
  /// Takes already computed statistics; names must be sorted and unique.
  static FeatureDomain from_stats(std::vector<FeatureStats> stats);

  std::size_t size() const { return features_.size(); }
  bool empty() const { return features_.empty(); }
  const FeatureStats& at(std::size_t id) const { return features_.at(id); }
  const std::vector<FeatureStats>& features() const { return features_; }
  std::optional<std::size_t> id_of(std::string_view name) const;

  /// Maps the known features of `example` to ids; unknown names are dropped.
  SparseVector to_sparse(const Example& example) const;

  bool operator==(const FeatureDomain&) const = default;

 private:
  std::vector<FeatureStats> features_;
};

struct CategoricalDomain {
  std::map<std::string, std::int64_t> counts;
  bool operator==(const CategoricalDomain&) const = default;
};

struct RealDomain {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  std::int64_t count = 0;
  bool operator==(const RealDomain&) const = default;
};

/// Label distribution or target statistics. An unlabelled dataset has an
/// empty domain.
class OutputDomain {
 public:
  OutputDomain() = default;
  explicit OutputDomain(CategoricalDomain d) : value_(std::move(d)) {}
  explicit OutputDomain(RealDomain d) : value_(d) {}

  /// Throws MixedOutputTypes when outputs carry different tags.
  static OutputDomain from_examples(std::span<const Example> examples);

  std::optional<Task> task() const;
  const CategoricalDomain& categorical() const;
  const RealDomain& real() const;
  /// Sorted label set (empty unless categorical).
  std::vector<std::string> labels() const;

  bool operator==(const OutputDomain&) const = default;

 private:
  std::variant<std::monostate, CategoricalDomain, RealDomain> value_;
};

}  // namespace pvml
