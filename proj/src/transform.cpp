#include "pvml/transform.hpp"

#include <cmath>
#include <set>

#include "pvml/error.hpp"

namespace pvml {

std::string_view transform_kind_name(TransformKind kind) {
  return kind == TransformKind::ZScore ? "zscore" : "minmax";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "zscore") return TransformKind::ZScore;
  if (name == "minmax") return TransformKind::MinMax;
  throw Error(ErrorCode::InvalidConfig, "unknown transform kind '" + std::string(name) + "'");
}

TransformSpec TransformSpec::from_config(const ConfigView& view) {
  TransformSpec spec;
  spec.kind = parse_transform_kind(view.get_str("kind"));
  if (view.has("features")) {
    for (const auto& f : view.get("features").as_list()) spec.features.push_back(f.as_str());
  }
  return spec;
}

double FittedTransform::apply(TransformKind kind, double v) const {
  if (identity) return v;
  return kind == TransformKind::ZScore ? (v - first) / second : (v - first) / (second - first);
}

TransformerMap::TransformerMap(TransformSpec spec, std::map<std::string, FittedTransform> fitted,
                               std::vector<std::string> warnings)
    : spec_(std::move(spec)), fitted_(std::move(fitted)), warnings_(std::move(warnings)) {
  for (const auto& [name, t] : fitted_) {
    if (spec_.kind == TransformKind::ZScore && !(t.second >= 0.0)) {
      throw Error(ErrorCode::InvalidValue, "z-score std must be >= 0 for '" + name + "'");
    }
    if (spec_.kind == TransformKind::MinMax && !(t.second >= t.first)) {
      throw Error(ErrorCode::InvalidValue, "min-max range inverted for '" + name + "'");
    }
  }
}

double TransformerMap::apply(const std::string& feature, double v) const {
  const auto it = fitted_.find(feature);
  return it == fitted_.end() ? v : it->second.apply(spec_.kind, v);
}

ProvValue TransformerMap::provenance() const {
  ProvValue::List features;
  for (const auto& f : spec_.features) features.push_back(ProvValue::str(f));
  const bool zscore = spec_.kind == TransformKind::ZScore;
  ProvValue::Map fitted;
  ProvValue::List degenerate;
  for (const auto& [name, t] : fitted_) {
    fitted.emplace(name, ProvValue::map({{zscore ? "mean" : "min", ProvValue::real(t.first)},
                                         {zscore ? "std" : "max", ProvValue::real(t.second)}}));
    if (t.identity) degenerate.push_back(ProvValue::str(name));
  }
  return make_object_provenance(
      std::string(kTransformClass),
      {{"kind", ProvValue::str(std::string(transform_kind_name(spec_.kind)))},
       {"features", ProvValue::list(std::move(features))}},
      {{"fitted", ProvValue::map(std::move(fitted))}, {"degenerate", ProvValue::list(std::move(degenerate))}});
}

TransformerMap TransformerMap::from_provenance(const ProvValue& provenance) {
  if (!is_object_provenance(provenance) || provenance.as_obj().class_name != kTransformClass) {
    throw Error(ErrorCode::InvalidValue, "not a " + std::string(kTransformClass) + " provenance");
  }
  const auto records = extract_configuration(provenance);
  TransformSpec spec = TransformSpec::from_config(ConfigView(records.front(), records));
  const bool zscore = spec.kind == TransformKind::ZScore;
  std::set<std::string> degenerate;
  for (const auto& d : instance_field(provenance, "degenerate").as_list()) degenerate.insert(d.as_str());
  std::map<std::string, FittedTransform> fitted;
  std::vector<std::string> warnings;
  for (const auto& [name, params] : instance_field(provenance, "fitted").as_map()) {
    const auto& m = params.as_map();
    const auto first = m.find(zscore ? "mean" : "min");
    const auto second = m.find(zscore ? "std" : "max");
    if (first == m.end() || second == m.end()) {
      throw Error(ErrorCode::MissingProperty, "fitted parameters of '" + name + "' are incomplete");
    }
    FittedTransform t{first->second.as_flt(), second->second.as_flt(), degenerate.contains(name)};
    if (t.identity) warnings.push_back("degenerate:" + name);
    fitted.emplace(name, t);
  }
  return TransformerMap(std::move(spec), std::move(fitted), std::move(warnings));
}

std::vector<TransformerMap> recorded_transformers(const ProvValue& data_provenance) {
  std::vector<TransformerMap> out;
  for (const auto& t : config_field(data_provenance, "transformations").as_list()) {
    if (t.is(ProvValue::Kind::Obj) && t.as_obj().class_name == kTransformClass) {
      out.push_back(TransformerMap::from_provenance(t));
    }
  }
  return out;
}

TransformerMap fit_transformers(const Dataset& dataset, const TransformSpec& spec) {
  const auto& domain = dataset.feature_domain();
  std::vector<std::size_t> ids;
  if (spec.features.empty()) {
    for (std::size_t id = 0; id < domain.size(); ++id) ids.push_back(id);
  } else {
    for (const auto& name : spec.features) {
      // Unknown names are skipped; there is nothing observed to fit.
      if (const auto id = domain.id_of(name)) ids.push_back(*id);
    }
  }
  std::map<std::string, FittedTransform> fitted;
  std::vector<std::string> warnings;
  for (const auto id : ids) {
    const auto& s = domain.at(id);
    FittedTransform t;
    if (spec.kind == TransformKind::ZScore) {
      t.first = s.mean;
      t.second = std::sqrt(s.variance);
      t.identity = t.second == 0.0;
    } else {
      t.first = s.min;
      t.second = s.max;
      t.identity = s.min == s.max;
    }
    if (t.identity) warnings.push_back("degenerate:" + s.name);
    fitted.emplace(s.name, t);
  }
  return TransformerMap(spec, std::move(fitted), std::move(warnings));
}

Dataset apply_transformers(const Dataset& dataset, const TransformerMap& transformers) {
  std::vector<Example> out;
  out.reserve(dataset.size());
  for (const auto& e : dataset.examples()) {
    std::vector<FeatureValue> features = e.features();
    for (auto& f : features) f.value = transformers.apply(f.name, f.value);
    out.push_back(e.with_features(std::move(features)));
  }
  return Dataset::from_examples(std::move(out), dataset.provenance_with_transformation(transformers.provenance()));
}

std::vector<TransformSpec> parse_transform_specs(std::string_view text) {
  const auto records = parse_config(text);
  std::vector<TransformSpec> specs;
  for (const auto& r : records) {
    if (r.class_name == kTransformClass) specs.push_back(TransformSpec::from_config(ConfigView(r, records)));
  }
  if (specs.empty()) {
    throw Error(ErrorCode::InvalidConfig, "config document has no " + std::string(kTransformClass) + " record");
  }
  return specs;
}

}  // namespace pvml
