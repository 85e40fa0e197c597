#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pvml/dataset.hpp"
#include "pvml/domain.hpp"
#include "pvml/example.hpp"
#include "pvml/provenance.hpp"

namespace pvml {

using Scores = std::map<std::string, double>;

/// What a model's parameters compute for an id-indexed sparse vector.
struct RawPrediction {
  Output output;
  Scores scores;
};

struct Prediction {
  Output output;
  Scores scores;
  std::size_t features_used = 0;
  std::size_t features_total = 0;
  std::vector<std::string> warnings;
};

/// Label with the maximum score; ties go to the lexicographically smallest
/// label. Throws EmptyScores.
const std::string& argmax_label(const Scores& scores);

/// A trained predictor. Immutable; share through shared_ptr<const Model>.
class Model {
 public:
  virtual ~Model() = default;

  const std::string& name() const { return name_; }
  const ProvValue& provenance() const { return provenance_; }
  const FeatureDomain& feature_domain() const { return feature_domain_; }
  const OutputDomain& output_domain() const { return output_domain_; }
  Task task() const { return *output_domain_.task(); }

  /// Registry key used by the model container format.
  virtual std::string model_class() const = 0;
  /// Missing ids are zeros.
  virtual RawPrediction predict_sparse(const SparseVector& x) const = 0;

 protected:
  /// Throws InvalidValue when the provenance is not an object provenance or
  /// the output domain is unlabelled.
  Model(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs);

 private:
  std::string name_;
  ProvValue provenance_;
  FeatureDomain feature_domain_;
  OutputDomain output_domain_;
};

using ModelPtr = std::shared_ptr<const Model>;

/// Drops unknown features, warns "out-of-range:<name>" for used values outside
/// the training [min, max], and runs the model. Throws NoFeatureOverlap.
Prediction predict(const Model& model, const Example& example);
/// As above, but throws OutputTypeMismatch unless the model's task is `expected`.
Prediction predict(const Model& model, const Example& example, Task expected);

/// ModelProvenance: configuration = {trainer, data}; instance = {timestamp,
/// os-name, architecture, library-version, user-info, members}.
ProvValue make_model_provenance(const std::string& model_class, ProvValue trainer, ProvValue data,
                                ProvValue::List members = {}, ProvValue::Map user_info = {});

/// An algorithm configuration plus an RNG seed and an invocation counter.
///
/// A train call records the counter value at call time in the trainer
/// provenance, draws its randomness from derive_seed(seed, count) and then
/// increments the counter. A Trainer must not be shared by concurrent train
/// calls.
class Trainer {
 public:
  virtual ~Trainer() = default;

  virtual std::string class_name() const = 0;
  /// Hyperparameters, excluding the seed. Nested trainers appear as their
  /// TrainerProvenance objects.
  virtual ProvValue::Map configuration() const = 0;
  virtual std::unique_ptr<Trainer> clone() const = 0;

  std::uint64_t seed() const { return seed_; }
  void set_seed(std::uint64_t seed) { seed_ = seed; }
  std::int64_t invocation_count() const { return invocation_count_; }
  void set_invocation_count(std::int64_t count);

  /// TrainerProvenance at the current counter value.
  ProvValue provenance() const;

  /// Throws UnlabelledExample or TaskMismatch, plus algorithm errors.
  ModelPtr train(const Dataset& dataset, ProvValue::Map user_info = {});

 protected:
  explicit Trainer(std::uint64_t seed) : seed_(seed) {}

  virtual ModelPtr train_impl(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                              ProvValue::Map user_info) = 0;

 private:
  std::uint64_t seed_;
  std::int64_t invocation_count_ = 0;
};

using TrainerPtr = std::unique_ptr<Trainer>;

/// Stores a uint64 seed as a provenance Int (bit-preserving).
inline ProvValue seed_value(std::uint64_t seed) { return ProvValue::integer(static_cast<std::int64_t>(seed)); }

}  // namespace pvml
