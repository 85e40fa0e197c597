#include <cmath>
#include <numeric>

#include "doctest.h"
#include "pvml/error.hpp"
#include "pvml/eval.hpp"
#include "pvml/execution.hpp"
#include "pvml/tree.hpp"
#include "fixtures.hpp"
#include "split_oracle.hpp"
#include "support.hpp"

using namespace pvml;
using testing::code_of;
using testing::dataset_of;
using testing::ex;
using testing::lab;
using testing::real;
using testing::xor_data;

namespace {

std::vector<std::size_t> all_rows(const TreeData& d) {
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

std::vector<std::size_t> all_features(const TreeData& d) {
  std::vector<std::size_t> f(d.num_features);
  std::iota(f.begin(), f.end(), 0);
  return f;
}

std::optional<Split> split_of(const TreeData& d, const TreeConfig& cfg, Execution exec = Execution::Serial) {
  Rng rng(1);
  const auto rows = all_rows(d);
  const auto feats = all_features(d);
  return best_split(d, rows, feats, cfg, rng, exec);
}

TreeData one_feature(std::vector<double> x, std::vector<std::size_t> labels) {
  TreeData d;
  d.num_features = 1;
  d.num_classes = 2;
  d.columns = {std::move(x)};
  d.label = std::move(labels);
  d.weight.assign(d.label.size(), 1.0);
  d.target.assign(d.label.size(), 0.0);
  return d;
}

std::size_t training_errors(const Model& m, const Dataset& d) {
  std::size_t errors = 0;
  for (const auto& e : d.examples()) {
    if (predict(m, e).output.label() != e.output().label()) ++errors;
  }
  return errors;
}

}  // namespace

TEST_SUITE("trees") {
  TEST_CASE("impurity values") {
    CHECK(gini_impurity(std::vector<double>{1.0, 1.0}) == 0.5);
    CHECK(gini_impurity(std::vector<double>{3.0, 0.0}) == 0.0);
    CHECK(variance_impurity(std::vector<double>{1.0, 3.0}, std::vector<double>{1.0, 1.0}) == 1.0);
    CHECK(code_of([] { gini_impurity(std::vector<double>{}); }) == ErrorCode::EmptyNode);
  }

  TEST_CASE("split between two clusters lands on the midpoint") {
    const auto d = one_feature({1.0, 2.0, 10.0, 11.0}, {0, 0, 1, 1});
    const auto s = split_of(d, TreeConfig{});
    REQUIRE(s);
    CHECK(s->feature == 0);
    CHECK(s->threshold == 6.0);
    CHECK(s->decrease == doctest::Approx(0.5).epsilon(1e-15));
  }

  TEST_CASE("pure and undersized nodes do not split") {
    CHECK_FALSE(split_of(one_feature({1.0, 2.0, 3.0}, {1, 1, 1}), TreeConfig{}));
    TreeConfig big_leaves;
    big_leaves.min_examples_per_leaf = 3;
    CHECK_FALSE(split_of(one_feature({1.0, 2.0, 10.0, 11.0}, {0, 0, 1, 1}), big_leaves));
    TreeConfig demanding;
    demanding.min_impurity_decrease = 0.6;
    CHECK_FALSE(split_of(one_feature({1.0, 2.0, 10.0, 11.0}, {0, 0, 1, 1}), demanding));
  }

  TEST_CASE("equal decreases prefer the lower feature id") {
    auto d = one_feature({1.0, 2.0, 10.0, 11.0}, {0, 0, 1, 1});
    d.num_features = 2;
    d.columns.push_back({0.0, 0.0, 5.0, 5.0});
    const auto s = split_of(d, TreeConfig{});
    REQUIRE(s);
    CHECK(s->feature == 0);
    std::swap(d.columns[0], d.columns[1]);
    const auto t = split_of(d, TreeConfig{});
    REQUIRE(t);
    CHECK(t->feature == 0);
    CHECK(t->threshold == 2.5);
  }

  TEST_CASE("XOR needs depth two") {
    const auto d = xor_data();
    TreeConfig deep;
    deep.max_depth = 2;
    const auto m2 = CartTrainer(deep, 1).train(d);
    CHECK(training_errors(*m2, d) == 0);
    TreeConfig stump;
    stump.max_depth = 1;
    const auto m1 = CartTrainer(stump, 1).train(d);
    CHECK(training_errors(*m1, d) >= 1);
  }

  TEST_CASE("nodes are stored in pre-order with the left child first") {
    TreeConfig cfg;
    cfg.max_depth = 2;
    const auto m = CartTrainer(cfg, 1).train(xor_data());
    const auto& nodes = dynamic_cast<const TreeModel&>(*m).nodes();
    REQUIRE_FALSE(nodes[0].leaf);
    CHECK(nodes[0].left == 1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].leaf) continue;
      CHECK(nodes[i].left == static_cast<std::int32_t>(i) + 1);
      CHECK(nodes[i].right > nodes[i].left);
    }
    CHECK(dynamic_cast<const TreeModel&>(*m).depth() == 2);
  }

  TEST_CASE("regression leaves hold the weighted mean") {
    const auto d = dataset_of({ex({{"x", 0.0}}, real(1.0)), ex({{"x", 0.0}}, real(3.0)),
                               ex({{"x", 5.0}}, real(10.0)), ex({{"x", 6.0}}, real(10.0))});
    TreeConfig cfg;
    cfg.task = Task::Real;
    cfg.max_depth = 1;
    const auto m = CartTrainer(cfg, 1).train(d);
    CHECK(predict(*m, ex({{"x", 0.0}}, real(0.0))).output.value() == 2.0);
    CHECK(predict(*m, ex({{"x", 9.0}}, real(0.0))).output.value() == 10.0);
  }

  TEST_CASE("growth is deterministic under a fixed seed") {
    TreeConfig cfg;
    cfg.feature_subsampling_fraction = 0.5;
    cfg.split_kind = SplitKind::RandomThreshold;
    const auto d = TreeData::from_dataset(xor_data());
    CHECK(grow_tree(d, cfg, 77) == grow_tree(d, cfg, 77));
  }

  TEST_CASE("exhaustive search agrees with brute force on random data") {
    for (std::uint64_t seed = 1; seed <= 200; ++seed) {
      for (const Task task : {Task::Categorical, Task::Real}) {
        const auto d = testing::random_tree_data(seed, task);
        TreeConfig cfg;
        cfg.task = task;
        cfg.min_examples_per_leaf = 1 + static_cast<std::int64_t>(seed % 3);
        const auto expected = testing::brute_force_split(d, all_rows(d), static_cast<std::size_t>(cfg.min_examples_per_leaf));
        const auto got = split_of(d, cfg);
        REQUIRE(expected.has_value() == got.has_value());
        if (!got) continue;
        CHECK(got->feature == expected->feature);
        CHECK(got->threshold == expected->threshold);
        CHECK(std::fabs(got->decrease - expected->decrease) <= 1e-12);
      }
    }
  }

  TEST_CASE("random thresholds fall inside the observed range") {
    TreeConfig cfg;
    cfg.split_kind = SplitKind::RandomThreshold;
    const auto d = one_feature({1.0, 2.0, 10.0, 11.0}, {0, 0, 1, 1});
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      Rng rng(seed);
      const auto rows = all_rows(d);
      const auto feats = all_features(d);
      const auto s = best_split(d, rows, feats, cfg, rng);
      REQUIRE(s);
      CHECK(s->threshold >= 1.0);
      CHECK(s->threshold < 11.0);
    }
  }

  TEST_CASE("config validation") {
    TreeConfig c;
    c.max_depth = 0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = TreeConfig{};
    c.feature_subsampling_fraction = 0.0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
    c = TreeConfig{};
    c.min_examples_per_leaf = 0;
    CHECK(code_of([&] { c.validate(); }) == ErrorCode::InvalidConfig);
  }

  TEST_CASE("CART rejects data of the other task") {
    CartTrainer t(TreeConfig{}, 1);
    CHECK(code_of([&] { t.train(dataset_of({ex({{"x", 1.0}}, real(1.0))})); }) == ErrorCode::TaskMismatch);
  }

  TEST_CASE("parallel split search equals serial") {
    set_parallel_threads(4);
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const auto d = testing::random_tree_data(seed, Task::Categorical);
      CHECK(split_of(d, TreeConfig{}, Execution::Serial) == split_of(d, TreeConfig{}, Execution::Parallel));
      TreeConfig cfg;
      cfg.split_kind = SplitKind::RandomThreshold;
      cfg.feature_subsampling_fraction = 0.6;
      CHECK(grow_tree(d, cfg, seed, Execution::Serial) == grow_tree(d, cfg, seed, Execution::Parallel));
    }
    set_parallel_threads(0);
  }
}
