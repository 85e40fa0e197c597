#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace pvml {

enum class Task { Categorical, Real };

std::string_view task_name(Task task);
/// Parses "categorical" / "real"; throws InvalidConfig otherwise.
Task parse_task(std::string_view name);

struct FeatureValue {
  std::string name;
  double value = 0.0;
  bool operator==(const FeatureValue&) const = default;
};

/// Ground truth: a label, a real target, or nothing.
class Output {
 public:
  Output() = default;
  static Output unknown() { return Output(); }
  static Output categorical(std::string label);
  /// Throws NonFiniteFeature for non-finite targets.
  static Output real(double value);

  bool is_unknown() const { return std::holds_alternative<std::monostate>(value_); }
  std::optional<Task> task() const;
  /// Throws OutputTypeMismatch when the output is not categorical.
  const std::string& label() const;
  /// Throws OutputTypeMismatch when the output is not real.
  double value() const;

  bool operator==(const Output& other) const = default;

 private:
  struct Label {
    std::string label;
    bool operator==(const Label&) const = default;
  };
  struct Real {
    double value;
    bool operator==(const Real&) const = default;
  };
  std::variant<std::monostate, Label, Real> value_;
};

/// Sparse named features (sorted by name, unique), an output and a weight.
class Example {
 public:
  const std::vector<FeatureValue>& features() const { return features_; }
  const Output& output() const { return output_; }
  double weight() const { return weight_; }

  Example with_output(Output output) const;
  Example with_weight(double weight) const;
  Example with_features(std::vector<FeatureValue> features) const;

  bool operator==(const Example&) const = default;

 private:
  friend Example make_example(std::vector<FeatureValue>, Output, double);
  Example() = default;

  std::vector<FeatureValue> features_;
  Output output_;
  double weight_ = 1.0;
};

/// Sorts by name and merges duplicate names by summing their values.
/// Throws NonFiniteFeature, InvalidFeatureName, InvalidWeight or EmptyExample.
Example make_example(std::vector<FeatureValue> features, Output output = Output::unknown(),
                     double weight = 1.0);

}  // namespace pvml
