#include "pvml/tree.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pvml/error.hpp"

namespace pvml {

std::string_view split_kind_name(SplitKind kind) {
  return kind == SplitKind::Exhaustive ? "exhaustive" : "random-threshold";
}

SplitKind parse_split_kind(std::string_view name) {
  if (name == "exhaustive") return SplitKind::Exhaustive;
  if (name == "random-threshold") return SplitKind::RandomThreshold;
  throw Error(ErrorCode::InvalidConfig, "unknown split kind '" + std::string(name) + "'");
}

void TreeConfig::validate() const {
  if (max_depth < 1) throw Error(ErrorCode::InvalidConfig, "max depth must be >= 1");
  if (min_examples_per_leaf < 1) throw Error(ErrorCode::InvalidConfig, "min examples per leaf must be >= 1");
  if (!(min_impurity_decrease >= 0.0)) throw Error(ErrorCode::InvalidConfig, "min impurity decrease must be >= 0");
  if (!(feature_subsampling_fraction > 0.0 && feature_subsampling_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "feature subsampling fraction must lie in (0, 1]");
  }
}

namespace {

double gini_of(std::span<const double> weights, double total) {
  double sum_sq = 0.0;
  for (const double w : weights) {
    const double p = w / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

}  // namespace

double gini_impurity(std::span<const double> class_weights) {
  double total = 0.0;
  for (const double w : class_weights) total += w;
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyNode, "impurity of a node with no weight");
  return gini_of(class_weights, total);
}

double variance_impurity(std::span<const double> targets, std::span<const double> weights) {
  double total = 0.0;
  double sum = 0.0;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    total += weights[i];
    sum += weights[i] * targets[i];
    lo = std::min(lo, targets[i]);
    hi = std::max(hi, targets[i]);
  }
  if (!(total > 0.0)) throw Error(ErrorCode::EmptyNode, "impurity of a node with no weight");
  const double mean = std::clamp(sum / total, lo, hi);
  double ss = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) ss += weights[i] * (targets[i] - mean) * (targets[i] - mean);
  return ss / total;
}

TreeData TreeData::from_dataset(const Dataset& dataset) {
  TreeData d;
  d.task = *dataset.task();
  d.num_features = dataset.feature_domain().size();
  const auto labels = dataset.output_domain().labels();
  d.num_classes = labels.size();
  const std::size_t n = dataset.size();
  d.columns.assign(d.num_features, std::vector<double>(n, 0.0));
  d.weight.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = dataset.examples()[i];
    for (const auto& [id, value] : dataset.feature_domain().to_sparse(e)) d.columns[id][i] = value;
    d.weight.push_back(e.weight());
    if (d.task == Task::Categorical) {
      const auto it = std::lower_bound(labels.begin(), labels.end(), e.output().label());
      d.label.push_back(static_cast<std::size_t>(it - labels.begin()));
      d.target.push_back(0.0);
    } else {
      d.label.push_back(0);
      d.target.push_back(e.output().value());
    }
  }
  return d;
}

double node_impurity(const TreeData& data, std::span<const std::size_t> node) {
  if (data.task == Task::Categorical) {
    std::vector<double> w(data.num_classes, 0.0);
    for (const auto i : node) w[data.label[i]] += data.weight[i];
    return gini_impurity(w);
  }
  std::vector<double> t;
  std::vector<double> w;
  for (const auto i : node) {
    t.push_back(data.target[i]);
    w.push_back(data.weight[i]);
  }
  return variance_impurity(t, w);
}

bool split_better(const Split& a, const Split& b, double parent_impurity) {
  const double tol = kSplitTieTolerance * std::max(1.0, parent_impurity);
  if (a.decrease > b.decrease + tol) return true;
  if (a.decrease < b.decrease - tol) return false;
  if (a.feature != b.feature) return a.feature < b.feature;
  return a.threshold < b.threshold;
}

namespace {

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  // Adjacent doubles can round the midpoint up to `hi`; keep it separating.
  return mid < hi ? mid : lo;
}

// Summary of the node shared by every feature's search.
struct NodeSummary {
  double impurity = 0.0;
  double total_weight = 0.0;
  std::vector<double> class_weights;  // categorical
  double mean = 0.0;                   // real: targets are centred on this
};

NodeSummary summarize(const TreeData& data, std::span<const std::size_t> node) {
  NodeSummary s;
  s.impurity = node_impurity(data, node);
  if (data.task == Task::Categorical) {
    s.class_weights.assign(data.num_classes, 0.0);
    for (const auto i : node) s.class_weights[data.label[i]] += data.weight[i];
  }
  double sum = 0.0;
  double lo = INFINITY;
  double hi = -INFINITY;
  for (const auto i : node) {
    s.total_weight += data.weight[i];
    sum += data.weight[i] * data.target[i];
    lo = std::min(lo, data.target[i]);
    hi = std::max(hi, data.target[i]);
  }
  s.mean = std::clamp(sum / s.total_weight, lo, hi);
  return s;
}

struct Moments {
  double w = 0.0;
  double wy = 0.0;
  double wyy = 0.0;
  void add(double weight, double y) {
    w += weight;
    wy += weight * y;
    wyy += weight * y * y;
  }
  // Weighted sum of squared deviations from the side's own mean.
  double sse() const { return std::max(0.0, wyy - wy * wy / w); }
};

double regression_decrease(const NodeSummary& s, const Moments& left, const Moments& right) {
  return s.impurity - (left.sse() + right.sse()) / s.total_weight;
}

double classification_decrease(const NodeSummary& s, std::span<const double> left, double left_w,
                               std::vector<double>& scratch) {
  const double right_w = s.total_weight - left_w;
  for (std::size_t k = 0; k < scratch.size(); ++k) scratch[k] = s.class_weights[k] - left[k];
  return s.impurity - (left_w / s.total_weight) * gini_of(left, left_w) -
         (right_w / s.total_weight) * gini_of(scratch, right_w);
}

std::optional<Split> exhaustive_for_feature(const TreeData& data, std::span<const std::size_t> node,
                                            std::size_t feature, const TreeConfig& config, const NodeSummary& s) {
  const auto& col = data.columns[feature];
  std::vector<std::size_t> order(node.begin(), node.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return col[a] < col[b] || (col[a] == col[b] && a < b);
  });
  const std::size_t n = order.size();
  const auto min_leaf = static_cast<std::size_t>(config.min_examples_per_leaf);
  std::optional<Split> best;

  if (data.task == Task::Categorical) {
    std::vector<double> left(data.num_classes, 0.0);
    std::vector<double> scratch(data.num_classes, 0.0);
    double left_w = 0.0;
    for (std::size_t pos = 0; pos + 1 < n; ++pos) {
      const auto i = order[pos];
      left[data.label[i]] += data.weight[i];
      left_w += data.weight[i];
      const double v = col[i];
      const double next = col[order[pos + 1]];
      if (!(v < next)) continue;
      if (pos + 1 < min_leaf || n - pos - 1 < min_leaf) continue;
      const Split cand{feature, midpoint(v, next), classification_decrease(s, left, left_w, scratch)};
      if (!best || split_better(cand, *best, s.impurity)) best = cand;
    }
    return best;
  }

  // Regression: prefix and suffix moments of targets centred on the node mean.
  std::vector<Moments> suffix(n + 1);
  for (std::size_t pos = n; pos-- > 0;) {
    suffix[pos] = suffix[pos + 1];
    const auto i = order[pos];
    suffix[pos].add(data.weight[i], data.target[i] - s.mean);
  }
  Moments left;
  for (std::size_t pos = 0; pos + 1 < n; ++pos) {
    const auto i = order[pos];
    left.add(data.weight[i], data.target[i] - s.mean);
    const double v = col[i];
    const double next = col[order[pos + 1]];
    if (!(v < next)) continue;
    if (pos + 1 < min_leaf || n - pos - 1 < min_leaf) continue;
    const Split cand{feature, midpoint(v, next), regression_decrease(s, left, suffix[pos + 1])};
    if (!best || split_better(cand, *best, s.impurity)) best = cand;
  }
  return best;
}

std::optional<Split> threshold_for_feature(const TreeData& data, std::span<const std::size_t> node,
                                           std::size_t feature, double threshold, const TreeConfig& config,
                                           const NodeSummary& s) {
  const auto& col = data.columns[feature];
  const auto min_leaf = static_cast<std::size_t>(config.min_examples_per_leaf);
  std::size_t left_count = 0;
  if (data.task == Task::Categorical) {
    std::vector<double> left(data.num_classes, 0.0);
    std::vector<double> scratch(data.num_classes, 0.0);
    double left_w = 0.0;
    for (const auto i : node) {
      if (col[i] <= threshold) {
        left[data.label[i]] += data.weight[i];
        left_w += data.weight[i];
        ++left_count;
      }
    }
    if (left_count < min_leaf || node.size() - left_count < min_leaf) return std::nullopt;
    return Split{feature, threshold, classification_decrease(s, left, left_w, scratch)};
  }
  Moments left;
  Moments right;
  for (const auto i : node) {
    if (col[i] <= threshold) {
      left.add(data.weight[i], data.target[i] - s.mean);
      ++left_count;
    } else {
      right.add(data.weight[i], data.target[i] - s.mean);
    }
  }
  if (left_count < min_leaf || node.size() - left_count < min_leaf) return std::nullopt;
  return Split{feature, threshold, regression_decrease(s, left, right)};
}

}  // namespace

std::optional<Split> best_split(const TreeData& data, std::span<const std::size_t> node,
                                std::span<const std::size_t> candidates, const TreeConfig& config, Rng& rng,
                                Execution execution) {
  const auto min_leaf = static_cast<std::size_t>(config.min_examples_per_leaf);
  if (node.size() < 2 * min_leaf || candidates.empty()) return std::nullopt;
  const NodeSummary s = summarize(data, node);
  if (s.impurity == 0.0) return std::nullopt;

  // Random thresholds are drawn up front, in candidate order, so the RNG
  // stream does not depend on how the evaluation is scheduled.
  std::vector<double> thresholds;
  std::vector<char> usable(candidates.size(), 1);
  if (config.split_kind == SplitKind::RandomThreshold) {
    thresholds.resize(candidates.size());
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      const auto& col = data.columns[candidates[j]];
      double lo = INFINITY;
      double hi = -INFINITY;
      for (const auto i : node) {
        lo = std::min(lo, col[i]);
        hi = std::max(hi, col[i]);
      }
      if (!(lo < hi)) {
        usable[j] = 0;
        continue;
      }
      const double t = lo + rng.uniform() * (hi - lo);
      thresholds[j] = t < hi ? t : lo;
    }
  }

  std::vector<std::optional<Split>> per_feature(candidates.size());
  auto evaluate = [&](std::size_t j) {
    if (!usable[j]) return;
    per_feature[j] = config.split_kind == SplitKind::Exhaustive
                         ? exhaustive_for_feature(data, node, candidates[j], config, s)
                         : threshold_for_feature(data, node, candidates[j], thresholds[j], config, s);
  };
  const auto count = static_cast<std::int64_t>(candidates.size());
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(parallel_threads())
    for (std::int64_t j = 0; j < count; ++j) evaluate(static_cast<std::size_t>(j));
  } else {
    for (std::int64_t j = 0; j < count; ++j) evaluate(static_cast<std::size_t>(j));
  }

  std::optional<Split> best;
  for (const auto& cand : per_feature) {
    if (cand && (!best || split_better(*cand, *best, s.impurity))) best = cand;
  }
  if (!best || best->decrease < config.min_impurity_decrease) return std::nullopt;
  return best;
}

namespace {

class TreeGrower {
 public:
  TreeGrower(const TreeData& data, const TreeConfig& config, std::uint64_t seed, Execution execution)
      : data_(data), config_(config), rng_(seed), execution_(execution) {
    all_features_.resize(data.num_features);
    std::iota(all_features_.begin(), all_features_.end(), 0);
    const double raw = config.feature_subsampling_fraction * static_cast<double>(data.num_features);
    // Guard against 0.3 * 10 = 3.0000000000000004 rounding up to 4.
    sample_size_ = std::min<std::size_t>(data.num_features, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
    sample_size_ = std::max<std::size_t>(sample_size_, 1);
  }

  std::vector<TreeNode> run() {
    std::vector<std::size_t> root(data_.size());
    std::iota(root.begin(), root.end(), 0);
    grow(root, 0);
    return std::move(nodes_);
  }

 private:
  std::vector<std::size_t> candidates() {
    if (config_.feature_subsampling_fraction >= 1.0) return all_features_;
    std::vector<std::size_t> pool = all_features_;
    rng_.partial_shuffle(std::span<std::size_t>(pool), sample_size_);
    pool.resize(sample_size_);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  std::int32_t grow(const std::vector<std::size_t>& node, std::int64_t depth) {
    const auto index = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    std::optional<Split> split;
    const auto min_leaf = static_cast<std::size_t>(config_.min_examples_per_leaf);
    if (depth < config_.max_depth && node.size() >= 2 * min_leaf && node_impurity(data_, node) > 0.0) {
      const auto cands = candidates();
      split = best_split(data_, node, cands, config_, rng_, execution_);
    }
    if (!split) {
      nodes_[index] = make_leaf(node);
      return index;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    const auto& col = data_.columns[split->feature];
    for (const auto i : node) (col[i] <= split->threshold ? left : right).push_back(i);
    TreeNode internal;
    internal.leaf = false;
    internal.feature = split->feature;
    internal.threshold = split->threshold;
    internal.decrease = split->decrease;
    internal.count = static_cast<std::int64_t>(node.size());
    const auto l = grow(left, depth + 1);
    const auto r = grow(right, depth + 1);
    internal.left = l;
    internal.right = r;
    nodes_[index] = std::move(internal);
    return index;
  }

  TreeNode make_leaf(const std::vector<std::size_t>& node) const {
    TreeNode leaf;
    leaf.count = static_cast<std::int64_t>(node.size());
    if (data_.task == Task::Categorical) {
      leaf.distribution.assign(data_.num_classes, 0.0);
      for (const auto i : node) leaf.distribution[data_.label[i]] += data_.weight[i];
    } else {
      double total = 0.0;
      double sum = 0.0;
      double lo = INFINITY;
      double hi = -INFINITY;
      for (const auto i : node) {
        total += data_.weight[i];
        sum += data_.weight[i] * data_.target[i];
        lo = std::min(lo, data_.target[i]);
        hi = std::max(hi, data_.target[i]);
      }
      leaf.value = std::clamp(sum / total, lo, hi);
    }
    return leaf;
  }

  const TreeData& data_;
  const TreeConfig& config_;
  Rng rng_;
  Execution execution_;
  std::vector<std::size_t> all_features_;
  std::size_t sample_size_ = 0;
  std::vector<TreeNode> nodes_;
};

}  // namespace

std::vector<TreeNode> grow_tree(const TreeData& data, const TreeConfig& config, std::uint64_t seed,
                                Execution execution) {
  config.validate();
  if (data.size() == 0) throw Error(ErrorCode::EmptyNode, "cannot grow a tree on no examples");
  return TreeGrower(data, config, seed, execution).run();
}

TreeModel::TreeModel(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
                     std::vector<TreeNode> nodes)
    : Model(std::move(name), std::move(provenance), std::move(features), std::move(outputs)),
      nodes_(std::move(nodes)),
      labels_(output_domain().labels()) {
  if (nodes_.empty()) throw Error(ErrorCode::FormatError, "a tree needs at least one node");
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t i = 0; i < n; ++i) {
    const auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.leaf) {
      if (task() == Task::Categorical && node.distribution.size() != labels_.size()) {
        throw Error(ErrorCode::FormatError, "leaf distribution does not match the label set");
      }
    } else if (node.left <= i || node.right <= i || node.left >= n || node.right >= n ||
               node.feature >= feature_domain().size()) {
      throw Error(ErrorCode::FormatError, "malformed tree node " + std::to_string(i));
    }
  }
}

std::size_t TreeModel::leaf_for(const SparseVector& x) const {
  std::size_t i = 0;
  while (!nodes_[i].leaf) {
    const auto& node = nodes_[i];
    const auto it = std::lower_bound(x.begin(), x.end(), node.feature,
                                     [](const auto& entry, std::size_t id) { return entry.first < id; });
    const double v = (it != x.end() && it->first == node.feature) ? it->second : 0.0;
    i = static_cast<std::size_t>(v <= node.threshold ? node.left : node.right);
  }
  return i;
}

RawPrediction TreeModel::predict_sparse(const SparseVector& x) const {
  const auto& leaf = nodes_[leaf_for(x)];
  RawPrediction p;
  if (task() == Task::Real) {
    p.output = Output::real(leaf.value);
    return p;
  }
  double total = 0.0;
  for (const double w : leaf.distribution) total += w;
  for (std::size_t k = 0; k < labels_.size(); ++k) p.scores.emplace(labels_[k], leaf.distribution[k] / total);
  p.output = Output::categorical(argmax_label(p.scores));
  return p;
}

std::int64_t TreeModel::depth() const {
  std::vector<std::int64_t> depth(nodes_.size(), 0);
  std::int64_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depth[i]);
    if (!nodes_[i].leaf) {
      depth[static_cast<std::size_t>(nodes_[i].left)] = depth[i] + 1;
      depth[static_cast<std::size_t>(nodes_[i].right)] = depth[i] + 1;
    }
  }
  return deepest;
}

CartTrainer::CartTrainer(TreeConfig config, std::uint64_t seed) : Trainer(seed), config_(config) {
  config_.validate();
}

ProvValue::Map CartTrainer::configuration() const {
  return {{"task", ProvValue::str(std::string(task_name(config_.task)))},
          {"max-depth", ProvValue::integer(config_.max_depth)},
          {"min-examples-per-leaf", ProvValue::integer(config_.min_examples_per_leaf)},
          {"min-impurity-decrease", ProvValue::real(config_.min_impurity_decrease)},
          {"feature-subsampling-fraction", ProvValue::real(config_.feature_subsampling_fraction)},
          {"split-kind", ProvValue::str(std::string(split_kind_name(config_.split_kind)))}};
}

std::unique_ptr<Trainer> CartTrainer::from_config(const ConfigView& view) {
  TreeConfig c;
  c.task = parse_task(view.get_str("task"));
  c.max_depth = view.get_int("max-depth");
  c.min_examples_per_leaf = view.get_int("min-examples-per-leaf");
  c.min_impurity_decrease = view.get_flt("min-impurity-decrease");
  c.feature_subsampling_fraction = view.get_flt("feature-subsampling-fraction");
  c.split_kind = parse_split_kind(view.get_str("split-kind"));
  return std::make_unique<CartTrainer>(c, view.get_seed("seed"));
}

ModelPtr CartTrainer::train_impl(const Dataset& dataset, std::uint64_t call_seed, ProvValue trainer_provenance,
                                 ProvValue::Map user_info) {
  if (dataset.task() != config_.task) {
    throw Error(ErrorCode::TaskMismatch, "CART trainer configured for " + std::string(task_name(config_.task)) +
                                             " data got a " + std::string(task_name(*dataset.task())) +
                                             " dataset");
  }
  const TreeData data = TreeData::from_dataset(dataset);
  auto nodes = grow_tree(data, config_, call_seed, execution_);
  auto provenance = make_model_provenance(std::string(kTreeModelClass), std::move(trainer_provenance),
                                          dataset.provenance(), {}, std::move(user_info));
  return std::make_shared<TreeModel>(config_.task == Task::Categorical ? "cart-classifier" : "cart-regressor",
                                     std::move(provenance), dataset.feature_domain(), dataset.output_domain(),
                                     std::move(nodes));
}

}  // namespace pvml
