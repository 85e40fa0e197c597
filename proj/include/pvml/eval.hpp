#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pvml/dataset.hpp"
#include "pvml/execution.hpp"
#include "pvml/model.hpp"

namespace pvml {

/// predict() over every example. The Parallel variant splits examples across
/// threads; results are in example order and identical to Serial.
std::vector<Prediction> predict_batch(const Model& model, std::span<const Example> examples,
                                      Execution execution = Execution::Serial);

inline constexpr std::string_view kEvaluationClass = "pvml.Evaluation";

/// Obj pvml.Evaluation: configuration = {model, test-data}, instance =
/// {num-examples, timestamp}.
ProvValue make_evaluation_provenance(const Model& model, const Dataset& test);

struct LabelMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
};

struct ClassificationEvaluation {
  std::vector<std::string> labels;
  /// confusion[truth][predicted]; every label pair is present.
  std::map<std::string, std::map<std::string, std::int64_t>> confusion;
  double accuracy = 0.0;
  std::map<std::string, LabelMetrics> per_label;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  ProvValue provenance;
};

struct RegressionEvaluation {
  double rmse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
  std::int64_t count = 0;
  ProvValue provenance;
};

/// Unweighted metrics; 0/0 is 0. Throws TaskMismatch, UnlabelledExample or
/// NoFeatureOverlap.
ClassificationEvaluation evaluate_classification(const Model& model, const Dataset& test,
                                                 Execution execution = Execution::Serial);

/// r2 with zero total variance is 1 for a perfect fit, else 0.
RegressionEvaluation evaluate_regression(const Model& model, const Dataset& test,
                                         Execution execution = Execution::Serial);

/// {"metrics": ..., "confusion": ..., "provenance": ...}
std::string evaluation_report(const ClassificationEvaluation& evaluation, int indent = 2);
std::string evaluation_report(const RegressionEvaluation& evaluation, int indent = 2);

}  // namespace pvml
