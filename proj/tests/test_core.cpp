#include <cmath>
#include <limits>

#include "doctest.h"
#include "pvml/error.hpp"
#include "pvml/model.hpp"
#include "support.hpp"

using namespace pvml;
using testing::dataset_of;
using testing::ex;
using testing::lab;
using testing::real;

namespace {

class ConstantModel : public Model {
 public:
  ConstantModel(FeatureDomain fd, OutputDomain od)
      : Model("constant", make_object_provenance("test.Constant", {}, {}), std::move(fd), std::move(od)) {}
  std::string model_class() const override { return "test.Constant"; }
  RawPrediction predict_sparse(const SparseVector&) const override {
    return {Output::categorical("x"), {{"x", 1.0}}};
  }
};

ConstantModel model_over_f1_f2() {
  const auto d = dataset_of({ex({{"f1", 0.0}, {"f2", 1.0}}, lab("x")), ex({{"f1", 1.0}, {"f2", 2.0}}, lab("y"))});
  return ConstantModel(d.feature_domain(), d.output_domain());
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("make_example sorts features by name") {
    const auto e = ex({{"b", 1.0}, {"a", 2.0}}, Output::unknown());
    REQUIRE(e.features().size() == 2);
    CHECK(e.features()[0] == FeatureValue{"a", 2.0});
    CHECK(e.features()[1] == FeatureValue{"b", 1.0});
  }

  TEST_CASE("make_example merges duplicate names by summing") {
    const auto e = ex({{"a", 1.0}, {"a", 2.0}}, Output::unknown());
    REQUIRE(e.features().size() == 1);
    CHECK(e.features()[0].value == 3.0);
  }

  TEST_CASE("make_example rejects bad input") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    const auto code_of = [](auto&& fn) {
      try {
        fn();
      } catch (const Error& e) {
        return e.code();
      }
      FAIL("no error");
      return ErrorCode::InvalidValue;
    };
    CHECK(code_of([&] { make_example({{"a", nan}}); }) == ErrorCode::NonFiniteFeature);
    CHECK(code_of([&] { make_example({{"a", INFINITY}}); }) == ErrorCode::NonFiniteFeature);
    CHECK(code_of([&] { make_example({}); }) == ErrorCode::EmptyExample);
    CHECK(code_of([&] { make_example({{"", 1.0}}); }) == ErrorCode::InvalidFeatureName);
    CHECK(code_of([&] { make_example({{"a", 1.0}}, Output::unknown(), -1.0); }) == ErrorCode::InvalidWeight);
    CHECK(code_of([&] { make_example({{"a", 1.0}}, Output::unknown(), 0.0); }) == ErrorCode::InvalidWeight);
  }

  TEST_CASE("output accessors enforce the task") {
    CHECK_THROWS_AS(lab("a").value(), Error);
    CHECK_THROWS_AS(real(1.0).label(), Error);
    CHECK(Output::unknown().is_unknown());
    CHECK(*lab("a").task() == Task::Categorical);
  }

  TEST_CASE("feature ids follow lexicographic order") {
    const auto d = dataset_of({ex({{"b", 1.0}}, lab("x")), ex({{"a", 1.0}}, lab("x")), ex({{"a", 2.0}, {"b", 3.0}}, lab("y"))});
    CHECK(*d.feature_domain().id_of("a") == 0);
    CHECK(*d.feature_domain().id_of("b") == 1);
    CHECK_FALSE(d.feature_domain().id_of("c").has_value());
  }

  TEST_CASE("feature statistics use population variance over observed values") {
    const auto d = dataset_of({ex({{"a", 1.0}}, lab("x")), ex({{"a", 2.0}}, lab("x")), ex({{"a", 3.0}, {"b", 1.0}}, lab("x"))});
    const auto& a = d.feature_domain().at(0);
    CHECK(a.count == 3);
    CHECK(a.mean == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(a.variance == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(a.min == 1.0);
    CHECK(a.max == 3.0);
    CHECK(d.feature_domain().at(1).count == 1);
  }

  TEST_CASE("mixed output types are rejected") {
    try {
      dataset_of({ex({{"a", 1.0}}, lab("x")), ex({{"a", 1.0}}, real(2.0))});
      FAIL("expected MixedOutputTypes");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MixedOutputTypes);
    }
  }

  TEST_CASE("output domain records label counts and target statistics") {
    const auto c = dataset_of({ex({{"a", 1.0}}, lab("x")), ex({{"a", 1.0}}, lab("y")), ex({{"a", 1.0}}, lab("x"))});
    CHECK(c.output_domain().categorical().counts.at("x") == 2);
    CHECK(c.output_domain().labels() == std::vector<std::string>{"x", "y"});
    const auto r = dataset_of({ex({{"a", 1.0}}, real(1.0)), ex({{"a", 1.0}}, real(3.0))});
    CHECK(r.output_domain().real().mean == 2.0);
    CHECK(r.output_domain().real().variance == 1.0);
  }

  TEST_CASE("prediction with no known feature raises NoFeatureOverlap") {
    const auto m = model_over_f1_f2();
    try {
      predict(m, ex({{"f3", 1.0}}, Output::unknown()));
      FAIL("expected NoFeatureOverlap");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::NoFeatureOverlap);
    }
  }

  TEST_CASE("unknown features are dropped and counted") {
    const auto m = model_over_f1_f2();
    const auto p = predict(m, ex({{"f1", 1.0}, {"f3", 5.0}}, Output::unknown()));
    CHECK(p.features_used == 1);
    CHECK(p.features_total == 2);
    CHECK(p.features_used <= p.features_total);
  }

  TEST_CASE("values outside the training range produce a named warning") {
    const auto m = model_over_f1_f2();
    const auto p = predict(m, ex({{"f1", 7.0}}, Output::unknown()));
    REQUIRE(p.warnings.size() == 1);
    CHECK(p.warnings[0] == "out-of-range:f1");
    CHECK(predict(m, ex({{"f1", 1.0}}, Output::unknown())).warnings.empty());
  }

  TEST_CASE("predict with an expected task checks the model task") {
    const auto m = model_over_f1_f2();
    CHECK_NOTHROW(predict(m, ex({{"f1", 1.0}}, Output::unknown()), Task::Categorical));
    try {
      predict(m, ex({{"f1", 1.0}}, Output::unknown()), Task::Real);
      FAIL("expected OutputTypeMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::OutputTypeMismatch);
    }
  }

  TEST_CASE("argmax_label picks the top score and breaks ties lexicographically") {
    CHECK(argmax_label({{"a", 0.2}, {"b", 0.8}}) == "b");
    CHECK(argmax_label({{"a", 0.5}, {"b", 0.5}}) == "a");
    CHECK(argmax_label({{"z", 1.0}}) == "z");
    CHECK_THROWS_AS(argmax_label({}), Error);
  }

  TEST_CASE("data provenance records counts and an empty transformation list") {
    const auto d = dataset_of({ex({{"a", 1.0}, {"b", 2.0}}, lab("x"))});
    CHECK(instance_field(d.provenance(), "num-examples").as_int() == 1);
    CHECK(instance_field(d.provenance(), "num-features").as_int() == 2);
    CHECK(config_field(d.provenance(), "transformations").as_list().empty());
    CHECK(config_field(d.provenance(), "source").as_obj().class_name == "pvml.InMemorySource");
  }
}
