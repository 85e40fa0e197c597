// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <numeric>

#include "pvml/ensemble.hpp"
#include "pvml/eval.hpp"
#include "pvml/execution.hpp"
#include "pvml/tree.hpp"

namespace {

using pvml::Execution;

pvml::Dataset synthetic(std::size_t n, std::size_t features, std::uint64_t seed) {
  pvml::Rng rng(seed);
  std::vector<pvml::Example> examples;
  examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<pvml::FeatureValue> fv;
    double s = 0.0;
    for (std::size_t f = 0; f < features; ++f) {
      const double v = rng.uniform() * 2.0 - 1.0;
      s += (f % 3 == 0 ? 1.0 : -0.5) * v;
      fv.push_back({"f" + std::to_string(f), v});
    }
    const char* label = s > 0.3 ? "hi" : (s < -0.3 ? "lo" : "mid");
    examples.push_back(pvml::make_example(std::move(fv), pvml::Output::categorical(label), 1.0));
  }
  const pvml::InMemorySource source(std::move(examples), "synthetic");
  return pvml::build_dataset(source);
}

const pvml::Dataset& bench_data() {
  static const pvml::Dataset d = synthetic(4000, 32, 1);
  return d;
}

Execution mode(const benchmark::State& state) { return state.range(0) == 0 ? Execution::Serial : Execution::Parallel; }

void BM_BestSplit(benchmark::State& state) {
  const auto data = pvml::TreeData::from_dataset(bench_data());
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), 0);
  std::vector<std::size_t> features(data.num_features);
  std::iota(features.begin(), features.end(), 0);
  const pvml::TreeConfig config;
  for (auto _ : state) {
    pvml::Rng rng(1);
    benchmark::DoNotOptimize(pvml::best_split(data, rows, features, config, rng, mode(state)));
  }
}
BENCHMARK(BM_BestSplit)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_PredictBatch(benchmark::State& state) {
  pvml::TreeConfig config;
  config.max_depth = 10;
  const auto model = pvml::CartTrainer(config, 1).train(bench_data());
  for (auto _ : state) {
    benchmark::DoNotOptimize(pvml::predict_batch(*model, bench_data().examples(), mode(state)));
  }
}
BENCHMARK(BM_PredictBatch)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

void BM_ForestTraining(benchmark::State& state) {
  pvml::TreeConfig tree;
  tree.max_depth = 8;
  tree.feature_subsampling_fraction = 0.3;
  pvml::EnsembleConfig config;
  config.variant = pvml::EnsembleVariant::RandomForest;
  config.num_members = 8;
  const pvml::CartTrainer base(tree, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(pvml::train_bagged_members(bench_data(), base, config, 11, mode(state)));
  }
}
BENCHMARK(BM_ForestTraining)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
