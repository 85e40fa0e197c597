#include "pvml/dataset.hpp"

#include "pvml/error.hpp"
#include "pvml/sha256.hpp"

namespace pvml {

ProvValue make_data_provenance(ProvValue source, ProvValue::List transformations, std::int64_t num_examples,
                               std::int64_t num_features) {
  return make_object_provenance(std::string(kDatasetClass),
                                {{"source", std::move(source)},
                                 {"transformations", ProvValue::list(std::move(transformations))}},
                                {{"num-examples", ProvValue::integer(num_examples)},
                                 {"num-features", ProvValue::integer(num_features)}});
}

Dataset Dataset::from_examples(std::vector<Example> examples, ProvValue provenance) {
  if (examples.empty()) throw Error(ErrorCode::EmptySource, "a dataset needs at least one example");
  auto outputs = OutputDomain::from_examples(examples);
  auto features = FeatureDomain::from_examples(examples);
  return with_domains(std::move(examples), std::move(features), std::move(outputs), std::move(provenance));
}

Dataset Dataset::with_domains(std::vector<Example> examples, FeatureDomain features, OutputDomain outputs,
                              ProvValue provenance) {
  if (examples.empty()) throw Error(ErrorCode::EmptySource, "a dataset needs at least one example");
  Dataset d;
  d.examples_ = std::make_shared<const std::vector<Example>>(std::move(examples));
  d.feature_domain_ = std::make_shared<const FeatureDomain>(std::move(features));
  d.output_domain_ = std::make_shared<const OutputDomain>(std::move(outputs));
  d.provenance_ = std::make_shared<const ProvValue>(std::move(provenance));
  return d;
}

ProvValue Dataset::provenance_with_transformation(ProvValue transformation) const {
  ProvValue::List list = transformations();
  list.push_back(std::move(transformation));
  return make_data_provenance(source_provenance(), std::move(list),
                              instance_field(*provenance_, "num-examples").as_int(),
                              instance_field(*provenance_, "num-features").as_int());
}

const ProvValue& Dataset::source_provenance() const { return config_field(*provenance_, "source"); }

ProvValue::List Dataset::transformations() const {
  return config_field(*provenance_, "transformations").as_list();
}

std::vector<SparseVector> Dataset::sparse_rows() const {
  std::vector<SparseVector> rows;
  rows.reserve(examples_->size());
  for (const auto& e : *examples_) rows.push_back(feature_domain_->to_sparse(e));
  return rows;
}

Dataset build_dataset(const DataSource& source) {
  auto examples = source.examples();
  if (examples.empty()) throw Error(ErrorCode::EmptySource, "data source yielded no examples");
  auto outputs = OutputDomain::from_examples(examples);
  auto features = FeatureDomain::from_examples(examples);
  auto provenance = make_data_provenance(source.provenance(), {}, static_cast<std::int64_t>(examples.size()),
                                         static_cast<std::int64_t>(features.size()));
  return Dataset::with_domains(std::move(examples), std::move(features), std::move(outputs),
                               std::move(provenance));
}

namespace {

ProvValue encode_examples(const std::vector<Example>& examples) {
  ProvValue::List items;
  items.reserve(examples.size());
  for (const auto& e : examples) {
    ProvValue::Map features;
    for (const auto& f : e.features()) features.emplace(f.name, ProvValue::real(f.value));
    ProvValue output = ProvValue::boolean(false);
    if (const auto task = e.output().task()) {
      output = *task == Task::Categorical ? ProvValue::str(e.output().label())
                                          : ProvValue::real(e.output().value());
    }
    items.push_back(ProvValue::map({{"features", ProvValue::map(std::move(features))},
                                    {"output", std::move(output)},
                                    {"weight", ProvValue::real(e.weight())}}));
  }
  return ProvValue::list(std::move(items));
}

}  // namespace

InMemorySource::InMemorySource(std::vector<Example> examples, std::string description)
    : examples_(std::move(examples)) {
  const std::string digest = sha256_hex(canonical_encode(encode_examples(examples_)));
  provenance_ = make_object_provenance(
      "pvml.InMemorySource", {{"description", ProvValue::str(std::move(description))}},
      {{"resource-hash", ProvValue::hash("SHA-256", digest)}, {"load-time", ProvValue::now()}});
}

}  // namespace pvml
