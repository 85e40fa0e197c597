#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pvml/dataset.hpp"
#include "pvml/model.hpp"
#include "pvml/optimizer.hpp"

namespace pvml {

enum class Objective { Logistic, Squared };

std::string_view objective_name(Objective objective);
Objective parse_objective(std::string_view name);

/// (num_features + 1) x num_outputs weights, row-major; the last row is the
/// bias.
struct LinearParameters {
  std::size_t num_features = 0;
  std::size_t num_outputs = 0;
  std::vector<double> weights;

  LinearParameters() = default;
  LinearParameters(std::size_t features, std::size_t outputs)
      : num_features(features), num_outputs(outputs), weights((features + 1) * outputs, 0.0) {}

  double& at(std::size_t row, std::size_t col) { return weights[row * num_outputs + col]; }
  double at(std::size_t row, std::size_t col) const { return weights[row * num_outputs + col]; }
  /// z_k = sum_i x_i w_ik + b_k
  std::vector<double> scores(const SparseVector& x) const;

  bool operator==(const LinearParameters&) const = default;
};

struct ObjectiveResult {
  double loss = 0.0;
  std::vector<double> grads;
};

/// Weighted mean of -log softmax(z)_y over the batch, with its exact gradient.
/// `labels` fixes the output column order. Throws UnlabelledExample.
ObjectiveResult logistic_objective(const LinearParameters& params, std::span<const Example> batch,
                                   const FeatureDomain& domain, const std::vector<std::string>& labels);

/// Weighted mean of 0.5 (z - y)^2 over the batch, with its exact gradient.
ObjectiveResult squared_objective(const LinearParameters& params, std::span<const Example> batch,
                                  const FeatureDomain& domain);

/// Pre-mapped training rows: the form the trainer iterates over.
struct LinearRows {
  std::vector<SparseVector> x;
  std::vector<std::size_t> label;
  std::vector<double> target;
  std::vector<double> weight;
};

LinearRows make_linear_rows(const Dataset& dataset, Objective objective, const std::vector<std::string>& labels);

/// Objective over rows[indices]; accumulates in index order.
ObjectiveResult linear_objective(Objective objective, const LinearParameters& params, const LinearRows& rows,
                                 std::span<const std::size_t> indices);

struct LinearFit {
  LinearParameters params;
  std::vector<std::string> labels;
  /// Full-data objective after each epoch, when requested.
  std::vector<double> epoch_losses;
};

/// Zero-initialised mini-batch training. Each epoch reshuffles the running
/// example order with Fisher-Yates on Rng(seed); the trailing partial batch
/// is kept. Throws TaskMismatch.
LinearFit fit_linear(const Dataset& dataset, Objective objective, const OptimizerConfig& optimizer,
                     std::int64_t epochs, std::int64_t batch_size, std::uint64_t seed,
                     bool record_losses = false);

inline constexpr std::string_view kLinearModelClass = "pvml.LinearModel";

class LinearModel : public Model {
 public:
  LinearModel(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
              Objective objective, std::vector<std::string> labels, LinearParameters params);

  std::string model_class() const override { return std::string(kLinearModelClass); }
  RawPrediction predict_sparse(const SparseVector& x) const override;

  Objective objective() const { return objective_; }
  const std::vector<std::string>& labels() const { return labels_; }
  const LinearParameters& parameters() const { return params_; }

 private:
  Objective objective_;
  std::vector<std::string> labels_;
  LinearParameters params_;
};

inline constexpr std::string_view kLinearTrainerClass = "pvml.LinearSgdTrainer";

class LinearSgdTrainer : public Trainer {
 public:
  LinearSgdTrainer(Objective objective, OptimizerConfig optimizer, std::int64_t epochs, std::int64_t batch_size,
                   std::uint64_t seed);

  std::string class_name() const override { return std::string(kLinearTrainerClass); }
  ProvValue::Map configuration() const override;
  std::unique_ptr<Trainer> clone() const override { return std::make_unique<LinearSgdTrainer>(*this); }

  static std::unique_ptr<Trainer> from_config(const ConfigView& view);

  Objective objective() const { return objective_; }
  const OptimizerConfig& optimizer() const { return optimizer_; }

 protected:
  ModelPtr train_impl(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                      ProvValue::Map user_info) override;

 private:
  Objective objective_;
  OptimizerConfig optimizer_;
  std::int64_t epochs_;
  std::int64_t batch_size_;
};

}  // namespace pvml
