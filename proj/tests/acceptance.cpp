// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "gradient_check.hpp"
#include "json.hpp"
#include "pipeline.hpp"
#include "pvml/ensemble.hpp"
#include "pvml/error.hpp"
#include "pvml/eval.hpp"
#include "pvml/linear.hpp"
#include "pvml/persist.hpp"
#include "pvml/provenance.hpp"
#include "pvml/repro.hpp"
#include "pvml/tree.hpp"
#include "random_prov.hpp"
#include "split_oracle.hpp"
#include "support.hpp"

using namespace pvml;

namespace {

constexpr int kRoundTripTrees = 10000;
constexpr double kRoundTripSeconds = 30.0;
constexpr double kReproduceSeconds = 60.0;
constexpr int kGradientInstances = 100;
constexpr double kGradientTolerance = 1e-6;
constexpr int kOracleDatasets = 200;
constexpr double kDecreaseTolerance = 1e-12;
constexpr double kZScoreTolerance = 1e-9;
constexpr int kParallelThreads = 4;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void shuffle_keys(nlohmann::ordered_json& j, Rng& rng) {
  if (j.is_object()) {
    std::vector<std::pair<std::string, nlohmann::ordered_json>> items;
    for (auto& [k, v] : j.items()) items.emplace_back(k, v);
    rng.shuffle(std::span(items));
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (auto& [k, v] : items) {
      shuffle_keys(v, rng);
      out[k] = std::move(v);
    }
    j = std::move(out);
  } else if (j.is_array()) {
    for (auto& v : j) shuffle_keys(v, rng);
  }
}

void round_trip(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  testing::ProvGenerator gen(20240601);
  Rng rng(7);
  for (int i = 0; i < kRoundTripTrees && o.pass; ++i) {
    const auto v = gen.value();
    const auto text = serialize_provenance(v);
    o.require(parse_provenance(text) == v, "serialize/parse identity, tree " + std::to_string(i));
    const auto hash = provenance_hash(v);
    auto j = nlohmann::ordered_json::parse(text);
    shuffle_keys(j, rng);
    const auto permuted = parse_provenance(j.dump());
    o.require(permuted == v && provenance_hash(permuted) == hash, "key-order permutation, tree " + std::to_string(i));
    o.require(provenance_hash(testing::perturb_volatile(v, static_cast<std::uint64_t>(i))) == hash,
              "volatile mutation, tree " + std::to_string(i));
  }
  const double t = seconds_since(start);
  o.require(t < kRoundTripSeconds, "runtime");
  o.detail << kRoundTripTrees << " trees in " << t << " s";
}

void reproducibility(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  for (const auto& p : testing::kPipelines) {
    const auto run = testing::run_pipeline(p);
    const auto again = reproduce_model(run.model->provenance());
    o.require(provenance_hash(again->provenance()) == provenance_hash(run.model->provenance()),
              std::string(p.name) + " hash");
    for (const auto& e : run.data.examples()) {
      const auto a = predict(*run.model, e);
      const auto b = predict(*again, e);
      o.require(a.output == b.output && a.scores == b.scores, std::string(p.name) + " predictions");
    }
  }
  const double t = seconds_since(start);
  o.require(t < kReproduceSeconds, "runtime");
  o.detail << testing::kPipelines.size() << " pipelines in " << t << " s";
}

void gradients(Outcome& o) {
  double worst = 0.0;
  for (int i = 0; i < kGradientInstances; ++i) {
    const auto seed = static_cast<std::uint64_t>(i + 1);
    auto cls = testing::random_instance(seed, true);
    worst = std::max(worst, testing::check_gradient(cls.params, [&](const LinearParameters& p) {
                              return logistic_objective(p, cls.examples, cls.dataset.feature_domain(), cls.labels);
                            }).max_relative_error);
    auto reg = testing::random_instance(seed + 100000, false);
    worst = std::max(worst, testing::check_gradient(reg.params, [&](const LinearParameters& p) {
                              return squared_objective(p, reg.examples, reg.dataset.feature_domain());
                            }).max_relative_error);
  }
  o.require(worst < kGradientTolerance, "relative error");
  o.detail << kGradientInstances << " instances per objective, worst relative error " << worst;
}

void oracle(Outcome& o) {
  int compared = 0;
  for (int i = 0; i < kOracleDatasets; ++i) {
    const auto d = testing::random_tree_data(static_cast<std::uint64_t>(9000 + i), Task::Categorical);
    std::vector<std::size_t> rows(d.size());
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<std::size_t> feats(d.num_features);
    std::iota(feats.begin(), feats.end(), 0);
    Rng rng(1);
    const auto got = best_split(d, rows, feats, TreeConfig{}, rng);
    const auto expected = testing::brute_force_split(d, rows, 1);
    o.require(got.has_value() == expected.has_value(), "split existence, dataset " + std::to_string(i));
    if (!got || !expected) continue;
    ++compared;
    o.require(got->feature == expected->feature && got->threshold == expected->threshold &&
                  std::fabs(got->decrease - expected->decrease) <= kDecreaseTolerance,
              "split, dataset " + std::to_string(i));
  }
  o.detail << kOracleDatasets << " datasets, " << compared << " with a split";
}

std::size_t training_errors(const Model& m, const Dataset& d) {
  std::size_t errors = 0;
  for (const auto& e : d.examples()) errors += predict(m, e).output != e.output() ? 1 : 0;
  return errors;
}

void desk_scale(Outcome& o) {
  const auto sep = testing::separable_1d();
  const auto logistic = LinearSgdTrainer(Objective::Logistic, AdaGradConfig{0.5, 1e-6}, 100, 10, 1).train(sep);
  const double acc = evaluate_classification(*logistic, sep).accuracy;
  o.require(acc == 1.0, "separable accuracy");

  const auto xor_data = testing::xor_data();
  TreeConfig depth2;
  depth2.max_depth = 2;
  const auto xor_errors = training_errors(*CartTrainer(depth2, 1).train(xor_data), xor_data);
  o.require(xor_errors == 0, "XOR errors");

  const auto grid = testing::diagonal_grid();
  TreeConfig stump;
  stump.max_depth = 1;
  std::vector<std::size_t> errors;
  for (const std::int64_t m : {1, 5, 10}) {
    EnsembleConfig ec;
    ec.variant = EnsembleVariant::AdaBoost;
    ec.num_members = m;
    errors.push_back(training_errors(*EnsembleTrainer(ec, std::make_unique<CartTrainer>(stump, 1), 4).train(grid), grid));
  }
  o.require(errors[0] >= errors[1] && errors[1] >= errors[2], "AdaBoost errors non-increasing");
  o.detail << "separable accuracy " << acc << ", XOR errors " << xor_errors << ", AdaBoost errors at M=1,5,10: "
           << errors[0] << "," << errors[1] << "," << errors[2];
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidValue;
}

void contracts(Outcome& o) {
  using testing::ex;
  using testing::lab;
  const auto d = testing::dataset_of({ex({{"f1", 0.0}, {"f2", 1.0}}, lab("x")), ex({{"f1", 1.0}, {"f2", 2.0}}, lab("y"))});
  const auto model = LinearSgdTrainer(Objective::Logistic, SgdConfig{0.1}, 2, 1, 1).train(d);

  o.require(code_of([&] { predict(*model, ex({{"other", 1.0}}, Output::unknown())); }) == ErrorCode::NoFeatureOverlap,
            "NoFeatureOverlap");

  const auto p = predict(*model, ex({{"f1", 0.5}, {"zzz", 3.0}, {"qqq", 1.0}}, Output::unknown()));
  o.require(p.features_used == 1 && p.features_total == 3, "unseen features dropped");

  testing::TempDir dir;
  save_model(*model, dir.file("m.json"));
  o.require(code_of([&] { load_model(dir.file("m.json"), Task::Real); }) == ErrorCode::TaskMismatch,
            "load_model TaskMismatch");

  const auto far = predict(*model, ex({{"f1", 0.5}, {"f2", 9.0}}, Output::unknown()));
  o.require(far.warnings == std::vector<std::string>{"out-of-range:f2"}, "out-of-range warning");
  o.detail << "4 contracts checked";
}

void transformation(Outcome& o) {
  const auto raw = build_dataset(
      CsvSource(testing::data_path("weather.csv"), parse_schema(read_file(testing::data_path("weather_schema.json")))));
  const auto once = apply_transformers(raw, fit_transformers(raw, TransformSpec{TransformKind::ZScore, {}}));
  double worst_mean = 0.0;
  double worst_var = 0.0;
  for (const auto& stats : once.feature_domain().features()) {
    std::vector<double> values;
    for (const auto& e : once.examples()) {
      for (const auto& f : e.features()) {
        if (f.name == stats.name) values.push_back(f.value);
      }
    }
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (const double v : values) mean += v;
    mean /= n;
    double var = 0.0;
    for (const double v : values) var += (v - mean) * (v - mean);
    var /= n;
    if (var == 0.0) continue;
    worst_mean = std::max(worst_mean, std::fabs(mean));
    worst_var = std::max(worst_var, std::fabs(var - 1.0));
  }
  o.require(worst_mean < kZScoreTolerance && worst_var < kZScoreTolerance, "moments");
  const auto twice = apply_transformers(once, fit_transformers(once, TransformSpec{TransformKind::MinMax, {}}));
  o.require(raw.transformations().empty() && once.transformations().size() == 1 && twice.transformations().size() == 2,
            "provenance list growth");
  o.detail << "worst |mean| " << worst_mean << ", worst |variance - 1| " << worst_var;
}

void parallel(Outcome& o) {
  set_parallel_threads(kParallelThreads);
  const auto data = testing::load_zscored(testing::data_path("weather.csv"), "weather_schema.json");
  const auto config = parse_config(read_file(testing::data_path("random_forest.json")));
  int seeds = 0;
  for (const std::uint64_t seed : {2024ULL, 1ULL, 99ULL}) {
    auto serial = reconstruct_trainer(config);
    auto concurrent = reconstruct_trainer(config);
    serial->set_seed(seed);
    concurrent->set_seed(seed);
    dynamic_cast<EnsembleTrainer&>(*concurrent).set_execution(Execution::Parallel);
    const auto a = serial->train(data);
    const auto b = concurrent->train(data);
    o.require(provenance_hash(a->provenance()) == provenance_hash(b->provenance()), "provenance hash");
    auto pa = nlohmann::json::parse(serialize_model(*a))["parameters"];
    auto pb = nlohmann::json::parse(serialize_model(*b))["parameters"];
    for (auto* p : {&pa, &pb}) {
      for (auto& m : (*p)["members"]) m.erase("provenance");
    }
    o.require(pa == pb, "member parameters");
    for (const auto& e : data.examples()) {
      const auto x = predict(*a, e);
      const auto y = predict(*b, e);
      o.require(x.output == y.output && x.scores == y.scores, "predictions");
    }
    ++seeds;
  }
  set_parallel_threads(0);
  o.detail << seeds << " seeds, " << kParallelThreads << " threads";
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, void (*)(Outcome&)>> criteria{
      {"provenance round-trip", round_trip},
      {"reproducibility", reproducibility},
      {"gradient checks", gradients},
      {"split oracle equivalence", oracle},
      {"desk-scale learning", desk_scale},
      {"prediction contracts", contracts},
      {"transformation correctness", transformation},
      {"parallel equals serial", parallel},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "threw: " << e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                o.detail.str().c_str());
  }
  return failed;
}
