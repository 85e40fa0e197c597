#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pvml/dataset.hpp"
#include "pvml/provenance.hpp"

namespace pvml {

enum class TransformKind { ZScore, MinMax };

std::string_view transform_kind_name(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

inline constexpr std::string_view kTransformClass = "pvml.FeatureTransformation";

/// What to fit: one kind applied to the listed features, or to every feature
/// when the list is empty.
struct TransformSpec {
  TransformKind kind = TransformKind::ZScore;
  std::vector<std::string> features;

  static TransformSpec from_config(const ConfigView& view);
  bool operator==(const TransformSpec&) const = default;
};

/// Fitted per-feature parameters: ZScore keeps {mean, std}, MinMax keeps
/// {min, max}. A degenerate fit (std = 0, or min = max) is an identity.
struct FittedTransform {
  double first = 0.0;
  double second = 0.0;
  bool identity = false;

  double apply(TransformKind kind, double v) const;
};

class TransformerMap {
 public:
  TransformerMap(TransformSpec spec, std::map<std::string, FittedTransform> fitted,
                 std::vector<std::string> warnings);

  const TransformSpec& spec() const { return spec_; }
  const std::map<std::string, FittedTransform>& fitted() const { return fitted_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  /// Features without a fitted transform pass through unchanged.
  double apply(const std::string& feature, double v) const;
  /// Obj pvml.FeatureTransformation: configuration = {kind, features},
  /// instance = {fitted, degenerate}.
  ProvValue provenance() const;
  /// Inverse of provenance(): restores the fitted parameters.
  static TransformerMap from_provenance(const ProvValue& provenance);

 private:
  TransformSpec spec_;
  std::map<std::string, FittedTransform> fitted_;
  std::vector<std::string> warnings_;
};

/// Fits over observed values only (implicit zeros are not counted).
TransformerMap fit_transformers(const Dataset& dataset, const TransformSpec& spec);

/// Transforms every example, recomputes the domains and appends the
/// transformer provenance to the data provenance.
Dataset apply_transformers(const Dataset& dataset, const TransformerMap& transformers);

/// The fitted transformers recorded in a data provenance, in application
/// order, so test data can be mapped the way the training data was.
std::vector<TransformerMap> recorded_transformers(const ProvValue& data_provenance);

/// Reads every pvml.FeatureTransformation record of a config document, in order.
std::vector<TransformSpec> parse_transform_specs(std::string_view text);

}  // namespace pvml
