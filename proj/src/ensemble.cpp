#include "pvml/ensemble.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "pvml/error.hpp"
#include "pvml/rng.hpp"
#include "pvml/sha256.hpp"
#include "pvml/tree.hpp"

namespace pvml {

std::string_view ensemble_variant_name(EnsembleVariant variant) {
  switch (variant) {
    case EnsembleVariant::Bagging: return "bagging";
    case EnsembleVariant::RandomForest: return "random-forest";
    case EnsembleVariant::AdaBoost: return "adaboost";
  }
  return "?";
}

EnsembleVariant parse_ensemble_variant(std::string_view name) {
  if (name == "bagging") return EnsembleVariant::Bagging;
  if (name == "random-forest") return EnsembleVariant::RandomForest;
  if (name == "adaboost") return EnsembleVariant::AdaBoost;
  throw Error(ErrorCode::InvalidConfig, "unknown ensemble variant '" + std::string(name) + "'");
}

namespace {

std::string hash_indices(std::span<const std::size_t> indices) {
  ProvValue::List items;
  items.reserve(indices.size());
  for (const auto i : indices) items.push_back(ProvValue::integer(static_cast<std::int64_t>(i)));
  return sha256_hex(canonical_encode(ProvValue::list(std::move(items))));
}

std::string hash_weights(std::span<const double> weights) {
  ProvValue::List items;
  items.reserve(weights.size());
  for (const double w : weights) items.push_back(ProvValue::real(w));
  return sha256_hex(canonical_encode(ProvValue::list(std::move(items))));
}

}  // namespace

BootstrapSample bootstrap_sample(const Dataset& dataset, double fraction, bool with_replacement,
                                 std::uint64_t member_seed) {
  const std::size_t n = dataset.size();
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::InvalidConfig, "sample fraction must lie in (0, 1]");
  const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (count < 1) throw Error(ErrorCode::InvalidConfig, "sample fraction draws no examples");

  Rng rng(member_seed);
  std::vector<std::size_t> indices;
  if (with_replacement) {
    indices.reserve(count);
    for (std::size_t i = 0; i < count; ++i) indices.push_back(static_cast<std::size_t>(rng.below(n)));
  } else {
    indices.resize(n);
    std::iota(indices.begin(), indices.end(), 0);
    rng.partial_shuffle(std::span<std::size_t>(indices), count);
    indices.resize(count);
  }
  std::sort(indices.begin(), indices.end());

  std::vector<Example> examples;
  examples.reserve(count);
  for (const auto i : indices) examples.push_back(dataset.examples()[i]);
  auto record = make_object_provenance(
      "pvml.BootstrapSample",
      {{"fraction", ProvValue::real(fraction)},
       {"with-replacement", ProvValue::boolean(with_replacement)},
       {"seed", seed_value(member_seed)}},
      {{"indices-hash", ProvValue::hash("SHA-256", hash_indices(indices))},
       {"num-drawn", ProvValue::integer(static_cast<std::int64_t>(count))}});
  return {Dataset::with_domains(std::move(examples), dataset.feature_domain(), dataset.output_domain(),
                                dataset.provenance_with_transformation(std::move(record))),
          std::move(indices)};
}

Prediction combine(std::span<const Prediction> members, std::span<const double> weights) {
  if (members.empty() || members.size() != weights.size()) {
    throw Error(ErrorCode::InconsistentTask, "combine needs one weight per member prediction");
  }
  const auto task = members.front().output.task();
  for (const auto& p : members) {
    if (p.output.task() != task || !task) {
      throw Error(ErrorCode::InconsistentTask, "member predictions disagree on the task");
    }
  }
  double total_weight = 0.0;
  for (const double w : weights) total_weight += w;
  if (!(total_weight > 0.0)) throw Error(ErrorCode::InvalidValue, "member weights must sum to > 0");

  Prediction out;
  out.features_used = members.front().features_used;
  out.features_total = members.front().features_total;
  out.warnings = members.front().warnings;
  if (*task == Task::Real) {
    double sum = 0.0;
    for (std::size_t m = 0; m < members.size(); ++m) sum += weights[m] * members[m].output.value();
    out.output = Output::real(sum / total_weight);
    return out;
  }
  for (std::size_t m = 0; m < members.size(); ++m) {
    double norm = 0.0;
    for (const auto& [label, s] : members[m].scores) norm += s;
    if (!(norm > 0.0)) throw Error(ErrorCode::EmptyScores, "member scores sum to zero");
    for (const auto& [label, s] : members[m].scores) out.scores[label] += weights[m] * (s / norm);
  }
  for (auto& [label, s] : out.scores) s /= total_weight;
  out.output = Output::categorical(argmax_label(out.scores));
  return out;
}

double samme_alpha(double error, std::size_t num_classes) {
  return std::log((1.0 - error) / error) + std::log(static_cast<double>(num_classes) - 1.0);
}

double samme_zero_error_alpha(std::size_t num_classes) {
  return 10.0 + std::log(static_cast<double>(num_classes) - 1.0);
}

EnsembleModel::EnsembleModel(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
                             EnsembleVariant variant, std::vector<ModelPtr> members, std::vector<double> weights)
    : Model(std::move(name), std::move(provenance), std::move(features), std::move(outputs)),
      variant_(variant),
      members_(std::move(members)),
      weights_(std::move(weights)) {
  if (members_.empty() || members_.size() != weights_.size()) {
    throw Error(ErrorCode::InvalidValue, "an ensemble needs one weight per member and at least one member");
  }
  for (const auto& m : members_) {
    if (!m || m->task() != task()) throw Error(ErrorCode::InconsistentTask, "ensemble member task differs");
    if (!(m->feature_domain() == feature_domain())) {
      throw Error(ErrorCode::InvalidValue, "ensemble members must share the ensemble feature domain");
    }
  }
}

RawPrediction EnsembleModel::predict_sparse(const SparseVector& x) const {
  std::vector<Prediction> votes;
  votes.reserve(members_.size());
  const auto labels = output_domain().labels();
  for (const auto& m : members_) {
    RawPrediction raw = m->predict_sparse(x);
    Prediction p;
    p.output = raw.output;
    if (variant_ == EnsembleVariant::AdaBoost && task() == Task::Categorical) {
      for (const auto& label : labels) p.scores[label] = label == raw.output.label() ? 1.0 : 0.0;
    } else {
      p.scores = std::move(raw.scores);
    }
    votes.push_back(std::move(p));
  }
  Prediction combined = combine(votes, weights_);
  return {std::move(combined.output), std::move(combined.scores)};
}

// ---------------------------------------------------------------------------

namespace {

std::unique_ptr<Trainer> member_trainer(const Trainer& base, std::uint64_t member_seed) {
  auto trainer = base.clone();
  trainer->set_seed(member_seed);
  trainer->set_invocation_count(0);
  return trainer;
}

ModelPtr train_member(const Dataset& dataset, const Trainer& base, const EnsembleConfig& config,
                      std::uint64_t call_seed, std::size_t index) {
  const std::uint64_t member_seed = derive_seed(call_seed, index);
  const auto sample = bootstrap_sample(dataset, config.sample_fraction, config.with_replacement, member_seed);
  return member_trainer(base, member_seed)->train(sample.dataset);
}

}  // namespace

std::vector<ModelPtr> train_bagged_members(const Dataset& dataset, const Trainer& base, const EnsembleConfig& config,
                                           std::uint64_t call_seed, Execution execution) {
  const auto count = config.num_members;
  std::vector<ModelPtr> members(static_cast<std::size_t>(count));
  if (execution == Execution::Serial) {
    for (std::int64_t i = 0; i < count; ++i) {
      members[static_cast<std::size_t>(i)] = train_member(dataset, base, config, call_seed, static_cast<std::size_t>(i));
    }
    return members;
  }
  std::vector<std::exception_ptr> failures(members.size());
#pragma omp parallel for schedule(dynamic) num_threads(parallel_threads())
  for (std::int64_t i = 0; i < count; ++i) {
    const auto slot = static_cast<std::size_t>(i);
    try {
      members[slot] = train_member(dataset, base, config, call_seed, slot);
    } catch (...) {
      failures[slot] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return members;
}

AdaBoostFit fit_adaboost(const Dataset& dataset, const Trainer& base, std::int64_t num_members,
                         std::uint64_t call_seed) {
  if (dataset.task() != Task::Categorical) throw Error(ErrorCode::TaskMismatch, "AdaBoost needs a categorical dataset");
  const auto labels = dataset.output_domain().labels();
  const std::size_t k = labels.size();
  if (k < 2) throw Error(ErrorCode::InvalidValue, "AdaBoost needs at least two classes");
  const std::size_t n = dataset.size();
  const auto& examples = dataset.examples();

  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) total += examples[j].weight();
  for (std::size_t j = 0; j < n; ++j) w[j] = examples[j].weight() / total;
  const std::vector<SparseVector> rows = dataset.sparse_rows();

  AdaBoostFit fit;
  for (std::int64_t round = 0; round < num_members; ++round) {
    const std::uint64_t member_seed = derive_seed(call_seed, static_cast<std::uint64_t>(round));
    // Scaled by N so weights stay near 1 and never underflow to zero.
    std::vector<Example> reweighted;
    reweighted.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
      reweighted.push_back(examples[j].with_weight(std::max(w[j] * static_cast<double>(n), 1e-300)));
    }
    auto record = make_object_provenance("pvml.AdaBoostReweight", {{"round", ProvValue::integer(round)}},
                                         {{"weights-hash", ProvValue::hash("SHA-256", hash_weights(w))}});
    const Dataset view = Dataset::with_domains(std::move(reweighted), dataset.feature_domain(),
                                               dataset.output_domain(),
                                               dataset.provenance_with_transformation(std::move(record)));
    ModelPtr member = member_trainer(base, member_seed)->train(view);

    std::vector<char> wrong(n, 0);
    double error = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      wrong[j] = member->predict_sparse(rows[j]).output.label() != examples[j].output().label();
      if (wrong[j]) error += w[j];
    }
    fit.errors.push_back(error);
    if (error >= 1.0 - 1.0 / static_cast<double>(k)) break;
    if (error == 0.0) {
      fit.members.push_back(std::move(member));
      fit.alphas.push_back(samme_zero_error_alpha(k));
      double sum = 0.0;
      for (const double v : w) sum += v;
      fit.weight_sums.push_back(sum);
      break;
    }
    const double alpha = samme_alpha(error, k);
    fit.members.push_back(std::move(member));
    fit.alphas.push_back(alpha);
    const double boost = std::exp(alpha);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (wrong[j]) w[j] *= boost;
      sum += w[j];
    }
    double renormalised = 0.0;
    for (auto& v : w) {
      v /= sum;
      renormalised += v;
    }
    fit.weight_sums.push_back(renormalised);
  }
  if (fit.members.empty()) {
    throw Error(ErrorCode::AllMembersRejected, "no AdaBoost member beat chance on the training data");
  }
  return fit;
}

// ---------------------------------------------------------------------------

EnsembleTrainer::EnsembleTrainer(EnsembleConfig config, std::unique_ptr<Trainer> base, std::uint64_t seed)
    : Trainer(seed), config_(config), base_(std::move(base)) {
  if (!base_) throw Error(ErrorCode::InvalidConfig, "an ensemble needs a base trainer");
  if (config_.num_members < 1) throw Error(ErrorCode::InvalidConfig, "an ensemble needs at least one member");
  if (!(config_.sample_fraction > 0.0 && config_.sample_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "sample fraction must lie in (0, 1]");
  }
  if (config_.variant == EnsembleVariant::RandomForest) {
    const auto* tree = dynamic_cast<const CartTrainer*>(base_.get());
    if (tree == nullptr || !(tree->config().feature_subsampling_fraction < 1.0)) {
      throw Error(ErrorCode::InvalidConfig,
                  "a random forest needs a CART base trainer with feature subsampling fraction < 1");
    }
  }
}

EnsembleTrainer::EnsembleTrainer(const EnsembleTrainer& other)
    : Trainer(other), config_(other.config_), base_(other.base_->clone()), execution_(other.execution_) {}

ProvValue::Map EnsembleTrainer::configuration() const {
  return {{"variant", ProvValue::str(std::string(ensemble_variant_name(config_.variant)))},
          {"num-members", ProvValue::integer(config_.num_members)},
          {"sample-fraction", ProvValue::real(config_.sample_fraction)},
          {"with-replacement", ProvValue::boolean(config_.with_replacement)},
          {"base-trainer", base_->provenance()}};
}

std::unique_ptr<Trainer> EnsembleTrainer::from_config(const ConfigView& view,
                                                      std::unique_ptr<Trainer> (*build)(const ConfigView&)) {
  EnsembleConfig c;
  c.variant = parse_ensemble_variant(view.get_str("variant"));
  c.num_members = view.get_int("num-members");
  c.sample_fraction = view.get_flt("sample-fraction");
  c.with_replacement = view.get_bool("with-replacement");
  return std::make_unique<EnsembleTrainer>(c, build(view.get_object("base-trainer")), view.get_seed("seed"));
}

ModelPtr EnsembleTrainer::train_impl(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                                     ProvValue::Map user_info) {
  if (config_.variant == EnsembleVariant::AdaBoost) {
    return train_adaboost(dataset, call_seed, std::move(trainer_provenance), std::move(user_info));
  }
  return train_bagging(dataset, call_seed, std::move(trainer_provenance), std::move(user_info));
}

namespace {

ProvValue::List member_provenances(const std::vector<ModelPtr>& members) {
  ProvValue::List out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m->provenance());
  return out;
}

}  // namespace

ModelPtr EnsembleTrainer::train_bagging(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                                        ProvValue::Map user_info) const {
  auto members = train_bagged_members(dataset, *base_, config_, call_seed, execution_);
  std::vector<double> weights(members.size(), 1.0 / static_cast<double>(members.size()));
  auto provenance = make_model_provenance(std::string(kEnsembleModelClass), std::move(trainer_provenance),
                                          dataset.provenance(), member_provenances(members), std::move(user_info));
  return std::make_shared<EnsembleModel>(std::string(ensemble_variant_name(config_.variant)), std::move(provenance),
                                         dataset.feature_domain(), dataset.output_domain(), config_.variant,
                                         std::move(members), std::move(weights));
}

ModelPtr EnsembleTrainer::train_adaboost(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                                         ProvValue::Map user_info) const {
  AdaBoostFit fit = fit_adaboost(dataset, *base_, config_.num_members, call_seed);
  auto provenance = make_model_provenance(std::string(kEnsembleModelClass), std::move(trainer_provenance),
                                          dataset.provenance(), member_provenances(fit.members), std::move(user_info));
  return std::make_shared<EnsembleModel>("adaboost", std::move(provenance), dataset.feature_domain(),
                                         dataset.output_domain(), EnsembleVariant::AdaBoost, std::move(fit.members),
                                         std::move(fit.alphas));
}

}  // namespace pvml
