#include "pvml/model.hpp"

#include <cmath>

#include "pvml/error.hpp"
#include "pvml/rng.hpp"

namespace pvml {

const std::string& argmax_label(const Scores& scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptyScores, "cannot take argmax of no scores");
  // std::map iterates labels in ascending order; strict > keeps the first.
  auto best = scores.begin();
  for (auto it = std::next(scores.begin()); it != scores.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

Model::Model(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs)
    : name_(std::move(name)),
      provenance_(std::move(provenance)),
      feature_domain_(std::move(features)),
      output_domain_(std::move(outputs)) {
  if (!is_object_provenance(provenance_)) {
    throw Error(ErrorCode::InvalidValue, "a model must carry an object provenance");
  }
  if (!output_domain_.task()) throw Error(ErrorCode::InvalidValue, "a model needs a labelled output domain");
}

Prediction predict(const Model& model, const Example& example) {
  const auto& domain = model.feature_domain();
  const SparseVector x = domain.to_sparse(example);
  if (x.empty()) {
    throw Error(ErrorCode::NoFeatureOverlap, "example shares no features with model '" + model.name() + "'");
  }
  Prediction p;
  p.features_used = x.size();
  p.features_total = example.features().size();
  for (const auto& [id, value] : x) {
    const auto& stats = domain.at(id);
    if (value < stats.min || value > stats.max) p.warnings.push_back("out-of-range:" + stats.name);
  }
  RawPrediction raw = model.predict_sparse(x);
  p.output = std::move(raw.output);
  p.scores = std::move(raw.scores);
  return p;
}

Prediction predict(const Model& model, const Example& example, Task expected) {
  if (model.task() != expected) {
    throw Error(ErrorCode::OutputTypeMismatch, "model '" + model.name() + "' is " +
                                                   std::string(task_name(model.task())) + ", caller asked for " +
                                                   std::string(task_name(expected)));
  }
  return predict(model, example);
}

ProvValue make_model_provenance(const std::string& model_class, ProvValue trainer, ProvValue data,
                                ProvValue::List members, ProvValue::Map user_info) {
  return make_object_provenance(
      model_class, {{"trainer", std::move(trainer)}, {"data", std::move(data)}},
      {{"timestamp", ProvValue::now()},
       {"os-name", ProvValue::str(host_os_name())},
       {"architecture", ProvValue::str(host_architecture())},
       {"library-version", ProvValue::str(std::string(kLibraryVersion))},
       {"user-info", ProvValue::map(std::move(user_info))},
       {"members", ProvValue::list(std::move(members))}});
}

void Trainer::set_invocation_count(std::int64_t count) {
  if (count < 0) throw Error(ErrorCode::InvalidConfig, "invocation count must be >= 0");
  invocation_count_ = count;
}

ProvValue Trainer::provenance() const {
  ProvValue::Map config = configuration();
  config["seed"] = seed_value(seed_);
  return make_object_provenance(class_name(), std::move(config),
                                {{"invocation-count", ProvValue::integer(invocation_count_)}});
}

ModelPtr Trainer::train(const Dataset& dataset, ProvValue::Map user_info) {
  if (!dataset.task()) throw Error(ErrorCode::UnlabelledExample, "training data has no ground truth");
  ProvValue trainer_provenance = provenance();
  const std::uint64_t call_seed = derive_seed(seed_, static_cast<std::uint64_t>(invocation_count_));
  ++invocation_count_;
  return train_impl(dataset, call_seed, std::move(trainer_provenance), std::move(user_info));
}

}  // namespace pvml
