#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "pvml/error.hpp"
#include "pvml/eval.hpp"
#include "pvml/tree.hpp"
#include "support.hpp"

using namespace pvml;
using testing::code_of;
using testing::dataset_of;
using testing::ex;
using testing::lab;
using testing::real;

namespace {

/// Predicts whatever the example's "p" feature says: label number p - 1 for
/// classification, the value p for regression.
class EchoModel : public Model {
 public:
  EchoModel(FeatureDomain fd, OutputDomain od)
      : Model("echo", make_object_provenance("test.Echo", {}, {}), std::move(fd), od), labels_(od.labels()) {}
  std::string model_class() const override { return "test.Echo"; }
  RawPrediction predict_sparse(const SparseVector& x) const override {
    double p = 0.0;
    for (const auto& [id, v] : x) {
      if (id == 0) p = v;
    }
    if (labels_.empty()) return {Output::real(p), {}};
    const auto& label = labels_.at(static_cast<std::size_t>(p) - 1);
    return {Output::categorical(label), {{label, 1.0}}};
  }

 private:
  std::vector<std::string> labels_;
};

EchoModel classifier() {
  const auto d = dataset_of({ex({{"p", 1.0}}, lab("a")), ex({{"p", 2.0}}, lab("b")), ex({{"p", 3.0}}, lab("c"))});
  return EchoModel(d.feature_domain(), d.output_domain());
}

EchoModel regressor() {
  const auto d = dataset_of({ex({{"p", 1.0}}, real(1.0))});
  return EchoModel(d.feature_domain(), d.output_domain());
}

Example case_of(double predicted, const std::string& truth) { return ex({{"p", predicted}}, lab(truth)); }
Example case_of(double predicted, double truth) { return ex({{"p", predicted}}, real(truth)); }

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("two labels with one error each way") {
    const auto m = classifier();
    const auto r = evaluate_classification(m, dataset_of({case_of(1, "a"), case_of(2, "a"), case_of(2, "b")}));
    CHECK(r.accuracy == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.confusion.at("a").at("a") == 1);
    CHECK(r.confusion.at("a").at("b") == 1);
    CHECK(r.confusion.at("b").at("b") == 1);
    CHECK(r.confusion.at("b").at("a") == 0);
    CHECK(r.per_label.at("a").precision == 1.0);
    CHECK(r.per_label.at("a").recall == 0.5);
    CHECK(r.per_label.at("a").f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.per_label.at("b").precision == 0.5);
    CHECK(r.per_label.at("b").recall == 1.0);
    CHECK(r.per_label.at("a").support == 2);
    CHECK(r.micro_f1 == doctest::Approx(r.accuracy).epsilon(1e-15));
  }

  TEST_CASE("perfect predictions score one everywhere") {
    const auto m = classifier();
    const auto r = evaluate_classification(m, dataset_of({case_of(1, "a"), case_of(2, "b"), case_of(3, "c")}));
    CHECK(r.accuracy == 1.0);
    CHECK(r.macro_f1 == 1.0);
    CHECK(r.micro_precision == 1.0);
    for (const auto& [label, metrics] : r.per_label) CHECK(metrics.f1 == 1.0);
  }

  TEST_CASE("a label that is never predicted has zero precision") {
    const auto m = classifier();
    const auto r = evaluate_classification(m, dataset_of({case_of(1, "a"), case_of(1, "c"), case_of(2, "b")}));
    CHECK(r.per_label.at("c").precision == 0.0);
    CHECK(r.per_label.at("c").recall == 0.0);
    CHECK(r.per_label.at("c").f1 == 0.0);
    CHECK(r.macro_recall == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }

  TEST_CASE("micro averages equal accuracy for single-label data") {
    const auto m = classifier();
    std::vector<Example> cases;
    for (int i = 0; i < 30; ++i) cases.push_back(case_of(1 + (i * 7) % 3, std::string(1, static_cast<char>('a' + (i * 5) % 3))));
    const auto r = evaluate_classification(m, dataset_of(cases));
    CHECK(r.micro_precision == doctest::Approx(r.accuracy).epsilon(1e-15));
    CHECK(r.micro_recall == doctest::Approx(r.accuracy).epsilon(1e-15));
  }

  TEST_CASE("regression metrics on a hand-computed case") {
    const auto m = regressor();
    const auto r = evaluate_regression(m, dataset_of({case_of(1.0, 1.0), case_of(2.0, 2.0), case_of(5.0, 3.0)}));
    CHECK(r.count == 3);
    CHECK(r.mae == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(r.rmse == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-15));
    // total sum of squares about the mean 2 is 2
    CHECK(r.r2 == doctest::Approx(-1.0).epsilon(1e-15));
  }

  TEST_CASE("r2 with constant targets") {
    const auto m = regressor();
    CHECK(evaluate_regression(m, dataset_of({case_of(2.0, 2.0), case_of(2.0, 2.0)})).r2 == 1.0);
    CHECK(evaluate_regression(m, dataset_of({case_of(2.0, 2.0), case_of(3.0, 2.0)})).r2 == 0.0);
  }

  TEST_CASE("evaluating against the wrong task fails") {
    CHECK(code_of([] { evaluate_regression(classifier(), dataset_of({case_of(1, "a")})); }) == ErrorCode::TaskMismatch);
    CHECK(code_of([] { evaluate_classification(regressor(), dataset_of({case_of(1.0, 1.0)})); }) ==
          ErrorCode::TaskMismatch);
  }

  TEST_CASE("unlabelled test examples are rejected") {
    CHECK(code_of([] {
            evaluate_classification(classifier(),
                                    dataset_of({ex({{"p", 1.0}}, Output::unknown())}));
          }) == ErrorCode::UnlabelledExample);
  }

  TEST_CASE("evaluation provenance links the model and the test data") {
    const auto m = classifier();
    const auto test = dataset_of({case_of(1, "a")});
    const auto r = evaluate_classification(m, test);
    CHECK(r.provenance.as_obj().class_name == "pvml.Evaluation");
    CHECK(config_field(r.provenance, "model") == m.provenance());
    CHECK(config_field(r.provenance, "test-data") == test.provenance());
    CHECK(instance_field(r.provenance, "num-examples").as_int() == 1);
    const auto report = nlohmann::json::parse(evaluation_report(r));
    CHECK(report.contains("metrics"));
    CHECK(report.contains("confusion"));
    CHECK(report.contains("provenance"));
    CHECK(report["metrics"]["accuracy"].get<double>() == 1.0);
  }

  TEST_CASE("parallel batch prediction equals serial") {
    set_parallel_threads(4);
    TreeConfig cfg;
    cfg.max_depth = 3;
    const auto d = testing::diagonal_grid();
    const auto model = CartTrainer(cfg, 1).train(d);
    const auto a = predict_batch(*model, d.examples(), Execution::Serial);
    const auto b = predict_batch(*model, d.examples(), Execution::Parallel);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].output == b[i].output);
      CHECK(a[i].scores == b[i].scores);
    }
    set_parallel_threads(0);
  }
}
