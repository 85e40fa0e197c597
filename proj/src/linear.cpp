#include "pvml/linear.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pvml/error.hpp"
#include "pvml/rng.hpp"

namespace pvml {

std::string_view objective_name(Objective objective) {
  return objective == Objective::Logistic ? "logistic" : "squared";
}

Objective parse_objective(std::string_view name) {
  if (name == "logistic") return Objective::Logistic;
  if (name == "squared") return Objective::Squared;
  throw Error(ErrorCode::InvalidConfig, "unknown objective '" + std::string(name) + "'");
}

std::vector<double> LinearParameters::scores(const SparseVector& x) const {
  std::vector<double> z(num_outputs);
  for (std::size_t k = 0; k < num_outputs; ++k) z[k] = at(num_features, k);
  for (const auto& [id, value] : x) {
    if (id >= num_features) continue;
    for (std::size_t k = 0; k < num_outputs; ++k) z[k] += value * at(id, k);
  }
  return z;
}

namespace {

// Stable softmax in place; returns log-sum-exp.
double softmax(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return m + std::log(sum);
}

void add_outer(std::vector<double>& grads, const LinearParameters& p, const SparseVector& x,
               std::span<const double> delta, double scale) {
  const std::size_t bias = p.num_features * p.num_outputs;
  for (std::size_t k = 0; k < p.num_outputs; ++k) grads[bias + k] += scale * delta[k];
  for (const auto& [id, value] : x) {
    if (id >= p.num_features) continue;
    for (std::size_t k = 0; k < p.num_outputs; ++k) grads[id * p.num_outputs + k] += scale * value * delta[k];
  }
}

}  // namespace

LinearRows make_linear_rows(const Dataset& dataset, Objective objective, const std::vector<std::string>& labels) {
  LinearRows rows;
  const auto& examples = dataset.examples();
  rows.x.reserve(examples.size());
  for (const auto& e : examples) {
    if (e.output().is_unknown()) throw Error(ErrorCode::UnlabelledExample, "training example has no output");
    rows.x.push_back(dataset.feature_domain().to_sparse(e));
    rows.weight.push_back(e.weight());
    if (objective == Objective::Logistic) {
      const auto it = std::lower_bound(labels.begin(), labels.end(), e.output().label());
      if (it == labels.end() || *it != e.output().label()) {
        throw Error(ErrorCode::InvalidValue, "label '" + e.output().label() + "' is not in the label set");
      }
      rows.label.push_back(static_cast<std::size_t>(it - labels.begin()));
      rows.target.push_back(0.0);
    } else {
      rows.label.push_back(0);
      rows.target.push_back(e.output().value());
    }
  }
  return rows;
}

ObjectiveResult linear_objective(Objective objective, const LinearParameters& params, const LinearRows& rows,
                                 std::span<const std::size_t> indices) {
  ObjectiveResult result;
  result.grads.assign(params.weights.size(), 0.0);
  double total_weight = 0.0;
  for (const auto i : indices) total_weight += rows.weight[i];
  if (!(total_weight > 0.0)) return result;

  std::vector<double> delta(params.num_outputs);
  for (const auto i : indices) {
    std::vector<double> z = params.scores(rows.x[i]);
    const double w = rows.weight[i] / total_weight;
    if (objective == Objective::Logistic) {
      const double z_true = z[rows.label[i]];
      const double lse = softmax(z);
      result.loss += w * (lse - z_true);
      for (std::size_t k = 0; k < params.num_outputs; ++k) delta[k] = z[k] - (k == rows.label[i] ? 1.0 : 0.0);
    } else {
      const double r = z[0] - rows.target[i];
      result.loss += w * 0.5 * r * r;
      delta[0] = r;
    }
    add_outer(result.grads, params, rows.x[i], delta, w);
  }
  return result;
}

namespace {

void check_batch(std::span<const Example> batch, Objective objective) {
  if (batch.empty()) throw Error(ErrorCode::EmptySource, "objective needs a non-empty batch");
  const Task expected = objective == Objective::Logistic ? Task::Categorical : Task::Real;
  for (const auto& e : batch) {
    if (e.output().is_unknown()) throw Error(ErrorCode::UnlabelledExample, "batch example has no output");
    if (e.output().task() != expected) throw Error(ErrorCode::TaskMismatch, "batch output does not fit the objective");
  }
}

ObjectiveResult objective_over(Objective objective, const LinearParameters& params, std::span<const Example> batch,
                               const FeatureDomain& domain, const std::vector<std::string>& labels) {
  check_batch(batch, objective);
  LinearRows rows;
  for (const auto& e : batch) {
    rows.x.push_back(domain.to_sparse(e));
    rows.weight.push_back(e.weight());
    if (objective == Objective::Logistic) {
      const auto it = std::find(labels.begin(), labels.end(), e.output().label());
      if (it == labels.end()) throw Error(ErrorCode::InvalidValue, "label not in label set");
      rows.label.push_back(static_cast<std::size_t>(it - labels.begin()));
      rows.target.push_back(0.0);
    } else {
      rows.label.push_back(0);
      rows.target.push_back(e.output().value());
    }
  }
  std::vector<std::size_t> idx(batch.size());
  std::iota(idx.begin(), idx.end(), 0);
  return linear_objective(objective, params, rows, idx);
}

}  // namespace

ObjectiveResult logistic_objective(const LinearParameters& params, std::span<const Example> batch,
                                   const FeatureDomain& domain, const std::vector<std::string>& labels) {
  if (params.num_outputs != labels.size() || params.num_features != domain.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameters do not match the domain and label set");
  }
  return objective_over(Objective::Logistic, params, batch, domain, labels);
}

ObjectiveResult squared_objective(const LinearParameters& params, std::span<const Example> batch,
                                  const FeatureDomain& domain) {
  if (params.num_outputs != 1 || params.num_features != domain.size()) {
    throw Error(ErrorCode::ShapeMismatch, "parameters do not match the domain");
  }
  return objective_over(Objective::Squared, params, batch, domain, {});
}

LinearFit fit_linear(const Dataset& dataset, Objective objective, const OptimizerConfig& optimizer,
                     std::int64_t epochs, std::int64_t batch_size, std::uint64_t seed, bool record_losses) {
  const Task want = objective == Objective::Logistic ? Task::Categorical : Task::Real;
  if (dataset.task() != want) {
    throw Error(ErrorCode::TaskMismatch, std::string(objective_name(objective)) + " objective needs a " +
                                             std::string(task_name(want)) + " dataset");
  }
  if (epochs < 0 || batch_size < 1) throw Error(ErrorCode::InvalidConfig, "epochs >= 0 and batch size >= 1");
  validate(optimizer);

  LinearFit fit;
  fit.labels = dataset.output_domain().labels();
  const std::size_t outputs = objective == Objective::Logistic ? fit.labels.size() : 1;
  fit.params = LinearParameters(dataset.feature_domain().size(), outputs);
  const LinearRows rows = make_linear_rows(dataset, objective, fit.labels);

  OptimizerState state = make_optimizer_state(optimizer, fit.params.weights.size());
  Rng rng(seed);
  std::vector<std::size_t> order(rows.x.size());
  std::iota(order.begin(), order.end(), 0);
  const auto batch = static_cast<std::size_t>(batch_size);
  for (std::int64_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t len = std::min(batch, order.size() - start);
      const auto result = linear_objective(objective, fit.params, rows, std::span(order).subspan(start, len));
      optimizer_step(optimizer, state, fit.params.weights, result.grads);
    }
    if (record_losses) {
      std::vector<std::size_t> all(rows.x.size());
      std::iota(all.begin(), all.end(), 0);
      fit.epoch_losses.push_back(linear_objective(objective, fit.params, rows, all).loss);
    }
  }
  return fit;
}

LinearModel::LinearModel(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
                         Objective objective, std::vector<std::string> labels, LinearParameters params)
    : Model(std::move(name), std::move(provenance), std::move(features), std::move(outputs)),
      objective_(objective),
      labels_(std::move(labels)),
      params_(std::move(params)) {
  const std::size_t outputs_expected = objective_ == Objective::Logistic ? labels_.size() : 1;
  if (params_.num_features != feature_domain().size() || params_.num_outputs != outputs_expected ||
      params_.weights.size() != (params_.num_features + 1) * params_.num_outputs) {
    throw Error(ErrorCode::ShapeMismatch, "linear parameters do not match the model domains");
  }
  for (const double w : params_.weights) {
    if (!std::isfinite(w)) throw Error(ErrorCode::InvalidValue, "linear weights must be finite");
  }
}

RawPrediction LinearModel::predict_sparse(const SparseVector& x) const {
  std::vector<double> z = params_.scores(x);
  RawPrediction p;
  if (objective_ == Objective::Squared) {
    p.output = Output::real(z[0]);
    return p;
  }
  softmax(z);
  for (std::size_t k = 0; k < labels_.size(); ++k) p.scores.emplace(labels_[k], z[k]);
  p.output = Output::categorical(argmax_label(p.scores));
  return p;
}

LinearSgdTrainer::LinearSgdTrainer(Objective objective, OptimizerConfig optimizer, std::int64_t epochs,
                                   std::int64_t batch_size, std::uint64_t seed)
    : Trainer(seed), objective_(objective), optimizer_(optimizer), epochs_(epochs), batch_size_(batch_size) {
  validate(optimizer_);
  if (epochs_ < 0) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 0");
  if (batch_size_ < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 1");
}

ProvValue::Map LinearSgdTrainer::configuration() const {
  return {{"objective", ProvValue::str(std::string(objective_name(objective_)))},
          {"optimizer", optimizer_provenance(optimizer_)},
          {"epochs", ProvValue::integer(epochs_)},
          {"batch-size", ProvValue::integer(batch_size_)}};
}

std::unique_ptr<Trainer> LinearSgdTrainer::from_config(const ConfigView& view) {
  return std::make_unique<LinearSgdTrainer>(parse_objective(view.get_str("objective")),
                                            optimizer_from_config(view.get_object("optimizer")),
                                            view.get_int("epochs"), view.get_int("batch-size"),
                                            view.get_seed("seed"));
}

ModelPtr LinearSgdTrainer::train_impl(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                                      ProvValue::Map user_info) {
  LinearFit fit = fit_linear(dataset, objective_, optimizer_, epochs_, batch_size_, call_seed);
  auto provenance = make_model_provenance(std::string(kLinearModelClass), std::move(trainer_provenance),
                                          dataset.provenance(), {}, std::move(user_info));
  return std::make_shared<LinearModel>(
      objective_ == Objective::Logistic ? "logistic-regression" : "linear-regression", std::move(provenance),
      dataset.feature_domain(), dataset.output_domain(), objective_, std::move(fit.labels), std::move(fit.params));
}

}  // namespace pvml
