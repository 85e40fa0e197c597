#include "pvml/example.hpp"

#include <algorithm>
#include <cmath>

#include "pvml/error.hpp"

namespace pvml {

std::string_view task_name(Task task) {
  return task == Task::Categorical ? "categorical" : "real";
}

Task parse_task(std::string_view name) {
  if (name == "categorical") return Task::Categorical;
  if (name == "real") return Task::Real;
  throw Error(ErrorCode::InvalidConfig, "unknown task '" + std::string(name) + "'");
}

Output Output::categorical(std::string label) {
  Output out;
  out.value_ = Label{std::move(label)};
  return out;
}

Output Output::real(double value) {
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFiniteFeature, "regression target must be finite");
  Output out;
  out.value_ = Real{value};
  return out;
}

std::optional<Task> Output::task() const {
  if (std::holds_alternative<Label>(value_)) return Task::Categorical;
  if (std::holds_alternative<Real>(value_)) return Task::Real;
  return std::nullopt;
}

const std::string& Output::label() const {
  if (const auto* l = std::get_if<Label>(&value_)) return l->label;
  throw Error(ErrorCode::OutputTypeMismatch, "output is not categorical");
}

double Output::value() const {
  if (const auto* r = std::get_if<Real>(&value_)) return r->value;
  throw Error(ErrorCode::OutputTypeMismatch, "output is not a real value");
}

namespace {

void check_name(const std::string& name) {
  if (name.empty()) throw Error(ErrorCode::InvalidFeatureName, "feature name must be non-empty");
  for (const unsigned char c : name) {
    if (c < 0x20 || c == 0x7F) {
      throw Error(ErrorCode::InvalidFeatureName, "feature name contains a control character");
    }
  }
}

}  // namespace

Example make_example(std::vector<FeatureValue> features, Output output, double weight) {
  if (!(weight > 0.0) || !std::isfinite(weight)) {
    throw Error(ErrorCode::InvalidWeight, "example weight must be finite and > 0");
  }
  for (const auto& f : features) {
    check_name(f.name);
    if (!std::isfinite(f.value)) {
      throw Error(ErrorCode::NonFiniteFeature, "feature '" + f.name + "' has a non-finite value");
    }
  }
  std::stable_sort(features.begin(), features.end(),
                   [](const FeatureValue& a, const FeatureValue& b) { return a.name < b.name; });
  std::vector<FeatureValue> merged;
  merged.reserve(features.size());
  for (auto& f : features) {
    if (!merged.empty() && merged.back().name == f.name) {
      merged.back().value += f.value;
    } else {
      merged.push_back(std::move(f));
    }
  }
  for (const auto& f : merged) {
    if (!std::isfinite(f.value)) {
      throw Error(ErrorCode::NonFiniteFeature, "merged feature '" + f.name + "' overflowed");
    }
  }
  if (merged.empty()) throw Error(ErrorCode::EmptyExample, "example has no features");
  Example e;
  e.features_ = std::move(merged);
  e.output_ = std::move(output);
  e.weight_ = weight;
  return e;
}

Example Example::with_output(Output output) const {
  Example e = *this;
  e.output_ = std::move(output);
  return e;
}

Example Example::with_weight(double weight) const {
  return make_example(features_, output_, weight);
}

Example Example::with_features(std::vector<FeatureValue> features) const {
  return make_example(std::move(features), output_, weight_);
}

}  // namespace pvml
