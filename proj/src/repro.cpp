#include "pvml/repro.hpp"

#include <map>
#include <mutex>
#include <set>
#include <shared_mutex>

#include "pvml/columnar.hpp"
#include "pvml/ensemble.hpp"
#include "pvml/error.hpp"
#include "pvml/linear.hpp"
#include "pvml/transform.hpp"
#include "pvml/tree.hpp"

namespace pvml {

namespace {

struct Registries {
  std::shared_mutex mutex;
  std::map<std::string, SourceFactory> loaders;
  std::map<std::string, TrainerFactory> trainers;

  Registries() {
    loaders[std::string(kCsvLoaderClass)] = CsvSource::from_config;
    trainers[std::string(kLinearTrainerClass)] = LinearSgdTrainer::from_config;
    trainers[std::string(kCartTrainerClass)] = CartTrainer::from_config;
    trainers[std::string(kEnsembleTrainerClass)] = [](const ConfigView& v) {
      return EnsembleTrainer::from_config(v, build_trainer);
    };
  }
};

Registries& registries() {
  static Registries r;
  return r;
}

template <typename Factory>
Factory lookup(const std::map<std::string, Factory>& table, const std::string& class_name, const char* what) {
  std::shared_lock lock(registries().mutex);
  const auto it = table.find(class_name);
  if (it == table.end()) {
    throw Error(ErrorCode::UnknownClass, std::string("no registered ") + what + " class '" + class_name + "'");
  }
  return it->second;
}

void collect_refs(const ProvValue& v, std::set<std::string>& out) {
  switch (v.kind()) {
    case ProvValue::Kind::List:
      for (const auto& item : v.as_list()) collect_refs(item, out);
      break;
    case ProvValue::Kind::Map:
      for (const auto& [k, item] : v.as_map()) collect_refs(item, out);
      break;
    case ProvValue::Kind::Obj:
      if (is_ref(v)) {
        out.insert(ref_target(v));
      } else {
        for (const auto& [k, item] : v.as_obj().fields) collect_refs(item, out);
      }
      break;
    default: break;
  }
}

}  // namespace

void register_loader_class(const std::string& class_name, SourceFactory factory) {
  std::unique_lock lock(registries().mutex);
  registries().loaders[class_name] = std::move(factory);
}

void register_trainer_class(const std::string& class_name, TrainerFactory factory) {
  std::unique_lock lock(registries().mutex);
  registries().trainers[class_name] = std::move(factory);
}

bool is_loader_class(const std::string& class_name) {
  std::shared_lock lock(registries().mutex);
  return registries().loaders.count(class_name) > 0;
}

bool is_trainer_class(const std::string& class_name) {
  std::shared_lock lock(registries().mutex);
  return registries().trainers.count(class_name) > 0;
}

std::unique_ptr<Trainer> build_trainer(const ConfigView& view) {
  return lookup(registries().trainers, view.class_name(), "trainer")(view);
}

std::unique_ptr<DataSource> reconstruct_source(const std::vector<ConfigRecord>& records) {
  for (const auto& r : records) {
    if (is_loader_class(r.class_name)) {
      return lookup(registries().loaders, r.class_name, "loader")(ConfigView(r, records));
    }
  }
  const std::string first = records.empty() ? std::string("<none>") : records.front().class_name;
  throw Error(ErrorCode::UnknownClass, "no registered loader class among the records (first: '" + first + "')");
}

std::unique_ptr<DataSource> reconstruct_source(const ProvValue& source_provenance) {
  const auto records = extract_configuration(source_provenance);
  auto source = lookup(registries().loaders, records.front().class_name, "loader")(ConfigView(records.front(), records));
  const auto& recorded = instance_of(source_provenance);
  const auto& fresh = instance_of(source->provenance());
  const auto before = recorded.find("resource-hash");
  const auto after = fresh.find("resource-hash");
  if (before != recorded.end() && (after == fresh.end() || !(before->second == after->second))) {
    const auto path = configuration_of(source_provenance).find("path");
    const std::string where = path != configuration_of(source_provenance).end() && path->second.is(ProvValue::Kind::Str)
                                  ? " '" + path->second.as_str() + "'"
                                  : "";
    throw Error(ErrorCode::ResourceChanged, "resource" + where + " changed since the provenance was recorded");
  }
  return source;
}

std::unique_ptr<Trainer> reconstruct_trainer(const std::vector<ConfigRecord>& records) {
  // Nested trainers (an ensemble's base) are referenced by another trainer.
  std::set<std::string> referenced;
  for (const auto& r : records) {
    if (!is_trainer_class(r.class_name)) continue;
    for (const auto& [k, v] : r.properties) collect_refs(v, referenced);
  }
  for (const auto& r : records) {
    if (!referenced.contains(r.name) && is_trainer_class(r.class_name)) return build_trainer(ConfigView(r, records));
  }
  throw Error(ErrorCode::UnknownClass, "config document has no registered trainer record");
}

std::unique_ptr<Trainer> reconstruct_trainer(const ProvValue& trainer_provenance) {
  const auto records = extract_configuration(trainer_provenance);
  auto trainer = build_trainer(ConfigView(records.front(), records));
  trainer->set_invocation_count(instance_field(trainer_provenance, "invocation-count").as_int());
  return trainer;
}

Dataset reconstruct_dataset(const ProvValue& data_provenance) {
  const auto source = reconstruct_source(config_field(data_provenance, "source"));
  Dataset dataset = build_dataset(*source);
  for (const auto& t : config_field(data_provenance, "transformations").as_list()) {
    const auto& name = t.as_obj().class_name;
    if (name != kTransformClass) {
      throw Error(ErrorCode::UnknownClass, "cannot replay data transformation '" + name + "'");
    }
    const auto records = extract_configuration(t);
    const auto spec = TransformSpec::from_config(ConfigView(records.front(), records));
    dataset = apply_transformers(dataset, fit_transformers(dataset, spec));
  }
  return dataset;
}

ModelPtr reproduce_model(const ProvValue& model_provenance) {
  const Dataset dataset = reconstruct_dataset(config_field(model_provenance, "data"));
  auto trainer = reconstruct_trainer(config_field(model_provenance, "trainer"));
  ProvValue::Map user_info;
  const auto& instance = instance_of(model_provenance);
  if (const auto it = instance.find("user-info"); it != instance.end() && it->second.is(ProvValue::Kind::Map)) {
    user_info = it->second.as_map();
  }
  auto model = trainer->train(dataset, std::move(user_info));
  const auto expected = provenance_hash(model_provenance);
  const auto actual = provenance_hash(model->provenance());
  if (expected != actual) {
    throw Error(ErrorCode::ReproductionMismatch,
                "reproduced provenance hash " + actual + " differs from recorded " + expected);
  }
  return model;
}

}  // namespace pvml
