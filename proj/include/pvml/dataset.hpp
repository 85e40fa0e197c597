#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pvml/domain.hpp"
#include "pvml/example.hpp"
#include "pvml/provenance.hpp"

namespace pvml {

/// A repeatable, order-stable sequence of examples plus the provenance of
/// where they came from.
class DataSource {
 public:
  virtual ~DataSource() = default;
  virtual std::vector<Example> examples() const = 0;
  virtual const ProvValue& provenance() const = 0;
};

inline constexpr std::string_view kDatasetClass = "pvml.Dataset";

/// DataProvenance: configuration = {source, transformations (ordered)},
/// instance = {num-examples, num-features}.
ProvValue make_data_provenance(ProvValue source, ProvValue::List transformations, std::int64_t num_examples,
                               std::int64_t num_features);

/// Immutable examples + domains + provenance. Copies share the example
/// storage.
class Dataset {
 public:
  /// Recomputes both domains from `examples`.
  /// Throws EmptySource or MixedOutputTypes.
  static Dataset from_examples(std::vector<Example> examples, ProvValue provenance);

  /// Keeps the given domains; used for samples and reweighted views whose
  /// models must share their parent's feature space.
  static Dataset with_domains(std::vector<Example> examples, FeatureDomain features, OutputDomain outputs,
                              ProvValue provenance);

  const std::vector<Example>& examples() const { return *examples_; }
  std::size_t size() const { return examples_->size(); }
  const FeatureDomain& feature_domain() const { return *feature_domain_; }
  const OutputDomain& output_domain() const { return *output_domain_; }
  const ProvValue& provenance() const { return *provenance_; }
  std::optional<Task> task() const { return output_domain_->task(); }

  /// Data provenance with `transformation` appended to its ordered list.
  ProvValue provenance_with_transformation(ProvValue transformation) const;
  const ProvValue& source_provenance() const;
  ProvValue::List transformations() const;

  /// Examples mapped onto the dataset's feature ids, in example order.
  std::vector<SparseVector> sparse_rows() const;

 private:
  Dataset() = default;

  std::shared_ptr<const std::vector<Example>> examples_;
  std::shared_ptr<const FeatureDomain> feature_domain_;
  std::shared_ptr<const OutputDomain> output_domain_;
  std::shared_ptr<const ProvValue> provenance_;
};

/// Materializes `source` and records its provenance with example/feature
/// counts and an empty transformation list.
Dataset build_dataset(const DataSource& source);

/// Source over a fixed in-memory example list. Its resource hash is the
/// SHA-256 of the examples' canonical encoding.
class InMemorySource : public DataSource {
 public:
  InMemorySource(std::vector<Example> examples, std::string description);
  std::vector<Example> examples() const override { return examples_; }
  const ProvValue& provenance() const override { return provenance_; }

 private:
  std::vector<Example> examples_;
  ProvValue provenance_;
};

}  // namespace pvml
