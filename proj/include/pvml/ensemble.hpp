#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "pvml/dataset.hpp"
#include "pvml/execution.hpp"
#include "pvml/model.hpp"

namespace pvml {

enum class EnsembleVariant { Bagging, RandomForest, AdaBoost };

std::string_view ensemble_variant_name(EnsembleVariant variant);
EnsembleVariant parse_ensemble_variant(std::string_view name);

struct BootstrapSample {
  Dataset dataset;
  std::vector<std::size_t> indices;
};

/// Draws round(fraction * N) indices from Rng(member_seed): uniform with
/// replacement, or the prefix of a forward Fisher-Yates pass without. The
/// sample keeps the parent's domains; its provenance appends a
/// pvml.BootstrapSample record (seed + indices hash).
BootstrapSample bootstrap_sample(const Dataset& dataset, double fraction, bool with_replacement,
                                 std::uint64_t member_seed);

/// Weighted average of member score vectors, each normalised to sum 1, then
/// argmax_label; for regression the weighted mean. Throws InconsistentTask
/// or EmptyScores.
Prediction combine(std::span<const Prediction> members, std::span<const double> weights);

/// SAMME weight: ln((1 - err) / err) + ln(K - 1).
double samme_alpha(double error, std::size_t num_classes);
/// The alpha kept for a member with zero weighted error.
double samme_zero_error_alpha(std::size_t num_classes);

inline constexpr std::string_view kEnsembleModelClass = "pvml.EnsembleModel";

class EnsembleModel : public Model {
 public:
  EnsembleModel(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
                EnsembleVariant variant, std::vector<ModelPtr> members, std::vector<double> weights);

  std::string model_class() const override { return std::string(kEnsembleModelClass); }
  /// AdaBoost members vote with their predicted label (one-hot scores).
  RawPrediction predict_sparse(const SparseVector& x) const override;

  EnsembleVariant variant() const { return variant_; }
  const std::vector<ModelPtr>& members() const { return members_; }
  const std::vector<double>& member_weights() const { return weights_; }

 private:
  EnsembleVariant variant_;
  std::vector<ModelPtr> members_;
  std::vector<double> weights_;
};

struct EnsembleConfig {
  EnsembleVariant variant = EnsembleVariant::Bagging;
  std::int64_t num_members = 10;
  double sample_fraction = 1.0;
  bool with_replacement = true;
};

inline constexpr std::string_view kEnsembleTrainerClass = "pvml.EnsembleTrainer";

/// Bagging, random forest and SAMME AdaBoost over any base trainer.
///
/// Member i uses member seed derive_seed(call_seed, i): it seeds both the
/// member's sample and a copy of the base trainer, so members can be trained
/// in any order or concurrently with identical results.
class EnsembleTrainer : public Trainer {
 public:
  /// Throws InvalidConfig (random forest needs a CART base trainer with
  /// feature subsampling < 1).
  EnsembleTrainer(EnsembleConfig config, std::unique_ptr<Trainer> base, std::uint64_t seed);
  EnsembleTrainer(const EnsembleTrainer& other);

  std::string class_name() const override { return std::string(kEnsembleTrainerClass); }
  ProvValue::Map configuration() const override;
  std::unique_ptr<Trainer> clone() const override { return std::make_unique<EnsembleTrainer>(*this); }

  static std::unique_ptr<Trainer> from_config(const ConfigView& view,
                                              std::unique_ptr<Trainer> (*build)(const ConfigView&));

  const EnsembleConfig& config() const { return config_; }
  const Trainer& base() const { return *base_; }
  void set_execution(Execution execution) { execution_ = execution; }

 protected:
  ModelPtr train_impl(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                      ProvValue::Map user_info) override;

 private:
  ModelPtr train_bagging(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                         ProvValue::Map user_info) const;
  ModelPtr train_adaboost(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                          ProvValue::Map user_info) const;

  EnsembleConfig config_;
  std::unique_ptr<Trainer> base_;
  Execution execution_ = Execution::Serial;
};

/// Trains every bagging / random forest member. The Parallel variant runs
/// members concurrently and returns the same models as the Serial one.
std::vector<ModelPtr> train_bagged_members(const Dataset& dataset, const Trainer& base, const EnsembleConfig& config,
                                           std::uint64_t call_seed, Execution execution = Execution::Serial);

struct AdaBoostFit {
  std::vector<ModelPtr> members;
  std::vector<double> alphas;
  /// Weighted training error of every round, including a discarded last one.
  std::vector<double> errors;
  /// Sum of the example weights after each kept round's renormalisation.
  std::vector<double> weight_sums;
};

/// SAMME rounds over reweighted copies of `dataset`. Stops early when a
/// member's error reaches 1 - 1/K (member discarded) or 0 (kept with the
/// capped alpha). Throws AllMembersRejected when no member survives.
AdaBoostFit fit_adaboost(const Dataset& dataset, const Trainer& base, std::int64_t num_members,
                         std::uint64_t call_seed);

}  // namespace pvml
