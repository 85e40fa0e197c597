#include "pvml/eval.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <set>

#include "json.hpp"
#include "pvml/error.hpp"

namespace pvml {

using json = nlohmann::json;

std::vector<Prediction> predict_batch(const Model& model, std::span<const Example> examples, Execution execution) {
  std::vector<Prediction> out(examples.size());
  if (execution == Execution::Serial) {
    for (std::size_t i = 0; i < examples.size(); ++i) out[i] = predict(model, examples[i]);
    return out;
  }
  std::vector<std::exception_ptr> failures(examples.size());
  const auto n = static_cast<std::int64_t>(examples.size());
#pragma omp parallel for schedule(static) num_threads(parallel_threads())
  for (std::int64_t i = 0; i < n; ++i) {
    const auto slot = static_cast<std::size_t>(i);
    try {
      out[slot] = predict(model, examples[slot]);
    } catch (...) {
      failures[slot] = std::current_exception();
    }
  }
  // The first failing example in order, as the serial loop would report.
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

ProvValue make_evaluation_provenance(const Model& model, const Dataset& test) {
  return make_object_provenance(std::string(kEvaluationClass),
                                {{"model", model.provenance()}, {"test-data", test.provenance()}},
                                {{"num-examples", ProvValue::integer(static_cast<std::int64_t>(test.size()))},
                                 {"timestamp", ProvValue::now()}});
}

namespace {

void require_labelled(const Dataset& test) {
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test.examples()[i].output().task()) {
      throw Error(ErrorCode::UnlabelledExample, "test example " + std::to_string(i) + " has no output");
    }
  }
}

double ratio(std::int64_t num, std::int64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

ClassificationEvaluation evaluate_classification(const Model& model, const Dataset& test, Execution execution) {
  if (model.task() != Task::Categorical) {
    throw Error(ErrorCode::TaskMismatch, "classification evaluation needs a categorical model");
  }
  require_labelled(test);
  if (test.task() != Task::Categorical) {
    throw Error(ErrorCode::TaskMismatch, "classification evaluation needs a categorical test set");
  }
  const auto predictions = predict_batch(model, test.examples(), execution);

  ClassificationEvaluation ev;
  std::set<std::string> universe;
  for (auto& l : model.output_domain().labels()) universe.insert(l);
  for (auto& l : test.output_domain().labels()) universe.insert(l);
  ev.labels.assign(universe.begin(), universe.end());
  for (const auto& t : ev.labels) {
    for (const auto& p : ev.labels) ev.confusion[t][p] = 0;
  }
  std::int64_t correct = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& truth = test.examples()[i].output().label();
    const auto& guess = predictions[i].output.label();
    ++ev.confusion[truth][guess];
    if (truth == guess) ++correct;
  }
  const auto n = static_cast<std::int64_t>(predictions.size());
  ev.accuracy = ratio(correct, n);

  std::int64_t pooled_tp = 0;
  std::int64_t pooled_fp = 0;
  std::int64_t pooled_fn = 0;
  for (const auto& label : ev.labels) {
    std::int64_t tp = ev.confusion[label][label];
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    for (const auto& other : ev.labels) {
      if (other == label) continue;
      fp += ev.confusion[other][label];
      fn += ev.confusion[label][other];
    }
    LabelMetrics m;
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = harmonic(m.precision, m.recall);
    m.support = tp + fn;
    ev.macro_precision += m.precision;
    ev.macro_recall += m.recall;
    ev.macro_f1 += m.f1;
    ev.per_label[label] = m;
    pooled_tp += tp;
    pooled_fp += fp;
    pooled_fn += fn;
  }
  const auto k = static_cast<double>(ev.labels.size());
  ev.macro_precision /= k;
  ev.macro_recall /= k;
  ev.macro_f1 /= k;
  ev.micro_precision = ratio(pooled_tp, pooled_tp + pooled_fp);
  ev.micro_recall = ratio(pooled_tp, pooled_tp + pooled_fn);
  ev.micro_f1 = harmonic(ev.micro_precision, ev.micro_recall);
  ev.provenance = make_evaluation_provenance(model, test);
  return ev;
}

RegressionEvaluation evaluate_regression(const Model& model, const Dataset& test, Execution execution) {
  if (model.task() != Task::Real) {
    throw Error(ErrorCode::TaskMismatch, "regression evaluation needs a real-valued model");
  }
  require_labelled(test);
  if (test.task() != Task::Real) {
    throw Error(ErrorCode::TaskMismatch, "regression evaluation needs a real-valued test set");
  }
  if (test.size() == 0) throw Error(ErrorCode::EmptySource, "regression evaluation needs examples");
  const auto predictions = predict_batch(model, test.examples(), execution);

  const double n = static_cast<double>(predictions.size());
  double mean = 0.0;
  for (const auto& e : test.examples()) mean += e.output().value();
  mean /= n;
  double sq = 0.0;
  double abs = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double y = test.examples()[i].output().value();
    const double r = predictions[i].output.value() - y;
    sq += r * r;
    abs += std::fabs(r);
    total += (y - mean) * (y - mean);
  }
  RegressionEvaluation ev;
  ev.count = static_cast<std::int64_t>(predictions.size());
  ev.rmse = std::sqrt(sq / n);
  ev.mae = abs / n;
  if (total == 0.0) {
    ev.r2 = sq == 0.0 ? 1.0 : 0.0;
  } else {
    ev.r2 = 1.0 - sq / total;
  }
  ev.provenance = make_evaluation_provenance(model, test);
  return ev;
}

std::string evaluation_report(const ClassificationEvaluation& ev, int indent) {
  json metrics;
  metrics["accuracy"] = ev.accuracy;
  metrics["macro"] = {{"precision", ev.macro_precision}, {"recall", ev.macro_recall}, {"f1", ev.macro_f1}};
  metrics["micro"] = {{"precision", ev.micro_precision}, {"recall", ev.micro_recall}, {"f1", ev.micro_f1}};
  json per_label = json::object();
  for (const auto& [label, m] : ev.per_label) {
    per_label[label] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}};
  }
  metrics["per-label"] = per_label;
  json report;
  report["metrics"] = metrics;
  report["confusion"] = ev.confusion;
  report["provenance"] = json::parse(serialize_provenance(ev.provenance));
  return report.dump(indent) + "\n";
}

std::string evaluation_report(const RegressionEvaluation& ev, int indent) {
  json report;
  report["metrics"] = {{"rmse", ev.rmse}, {"mae", ev.mae}, {"r2", ev.r2}, {"count", ev.count}};
  report["confusion"] = nullptr;
  report["provenance"] = json::parse(serialize_provenance(ev.provenance));
  return report.dump(indent) + "\n";
}

}  // namespace pvml
