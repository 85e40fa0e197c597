#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pvml/dataset.hpp"
#include "pvml/execution.hpp"
#include "pvml/model.hpp"
#include "pvml/rng.hpp"

namespace pvml {

enum class SplitKind { Exhaustive, RandomThreshold };

std::string_view split_kind_name(SplitKind kind);
SplitKind parse_split_kind(std::string_view name);

struct TreeConfig {
  Task task = Task::Categorical;
  std::int64_t max_depth = 8;
  std::int64_t min_examples_per_leaf = 1;
  double min_impurity_decrease = 0.0;
  double feature_subsampling_fraction = 1.0;
  SplitKind split_kind = SplitKind::Exhaustive;

  /// Throws InvalidConfig.
  void validate() const;
  bool operator==(const TreeConfig&) const = default;
};

/// Gini impurity 1 - sum p_i^2 of class weights. Throws EmptyNode.
double gini_impurity(std::span<const double> class_weights);
/// Weighted population variance of targets. Throws EmptyNode.
double variance_impurity(std::span<const double> targets, std::span<const double> weights);

/// Dense column-major copy of a dataset for split search; absent features
/// are 0.0.
struct TreeData {
  Task task = Task::Categorical;
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<std::vector<double>> columns;
  std::vector<std::size_t> label;
  std::vector<double> target;
  std::vector<double> weight;

  static TreeData from_dataset(const Dataset& dataset);
  std::size_t size() const { return weight.size(); }
};

/// Impurity of the examples listed in `node`.
double node_impurity(const TreeData& data, std::span<const std::size_t> node);

struct Split {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
  bool operator==(const Split&) const = default;
};

/// Decreases closer than this (scaled by max(1, parent impurity)) are ties,
/// resolved by smaller feature id, then smaller threshold.
inline constexpr double kSplitTieTolerance = 1e-12;

/// True when `a` should replace `b` as the best split so far.
bool split_better(const Split& a, const Split& b, double parent_impurity);

/// Best split of `node` over `candidates` (ascending feature ids).
/// Exhaustive: midpoints between consecutive distinct values. Random
/// threshold: one uniform draw in [min, max) per non-constant candidate, in
/// candidate order. Values <= threshold go left. None when the node is pure,
/// smaller than 2 * min leaf size, or no valid split reaches the minimum
/// decrease.
std::optional<Split> best_split(const TreeData& data, std::span<const std::size_t> node,
                                std::span<const std::size_t> candidates, const TreeConfig& config, Rng& rng,
                                Execution execution = Execution::Serial);

struct TreeNode {
  bool leaf = true;
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  /// Leaf payload: per-label weights (categorical) or weighted mean target.
  std::vector<double> distribution;
  double value = 0.0;
  std::int64_t count = 0;
  bool operator==(const TreeNode&) const = default;
};

inline constexpr std::string_view kTreeModelClass = "pvml.TreeModel";

class TreeModel : public Model {
 public:
  /// nodes[0] is the root.
  TreeModel(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
            std::vector<TreeNode> nodes);

  std::string model_class() const override { return std::string(kTreeModelClass); }
  RawPrediction predict_sparse(const SparseVector& x) const override;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  /// Index of the leaf `x` lands in.
  std::size_t leaf_for(const SparseVector& x) const;
  std::int64_t depth() const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<std::string> labels_;
};

/// Grows a tree depth-first, left child first. Feature subsampling draws
/// ceil(fraction * F) features per node from one sequential stream.
std::vector<TreeNode> grow_tree(const TreeData& data, const TreeConfig& config, std::uint64_t seed,
                                Execution execution = Execution::Serial);

inline constexpr std::string_view kCartTrainerClass = "pvml.CartTrainer";

class CartTrainer : public Trainer {
 public:
  CartTrainer(TreeConfig config, std::uint64_t seed);

  std::string class_name() const override { return std::string(kCartTrainerClass); }
  ProvValue::Map configuration() const override;
  std::unique_ptr<Trainer> clone() const override { return std::make_unique<CartTrainer>(*this); }

  static std::unique_ptr<Trainer> from_config(const ConfigView& view);

  const TreeConfig& config() const { return config_; }
  void set_execution(Execution execution) { execution_ = execution; }

 protected:
  ModelPtr train_impl(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                      ProvValue::Map user_info) override;

 private:
  TreeConfig config_;
  Execution execution_ = Execution::Serial;
};

}  // namespace pvml
