#include <algorithm>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "pvml/ensemble.hpp"
#include "pvml/error.hpp"
#include "pvml/linear.hpp"
#include "pvml/provenance.hpp"
#include "pvml/sha256.hpp"
#include "pvml/tree.hpp"
#include "random_prov.hpp"
#include "support.hpp"

using namespace pvml;
using testing::code_of;

namespace {

std::vector<std::uint8_t> bytes(std::initializer_list<int> values) {
  std::vector<std::uint8_t> out;
  for (const int v : values) out.push_back(static_cast<std::uint8_t>(v));
  return out;
}

ProvValue sample_model_provenance(std::int64_t stamp) {
  auto source = make_object_provenance("pvml.CsvLoader", {{"path", ProvValue::str("/data/secret-file.csv")}},
                                       {{"resource-hash", ProvValue::hash("SHA-256", "ab")},
                                        {"load-time", ProvValue::timestamp(stamp, 5)}});
  auto data = make_data_provenance(source, {}, 3, 2);
  auto trainer = make_object_provenance("pvml.LinearSgdTrainer", {{"lr", ProvValue::real(0.1)}, {"seed", ProvValue::integer(42)}},
                                        {{"invocation-count", ProvValue::integer(3)}});
  return make_object_provenance(
      "pvml.LinearModel", {{"trainer", trainer}, {"data", data}},
      {{"timestamp", ProvValue::timestamp(stamp, 0)},
       {"os-name", ProvValue::str("Linux")},
       {"architecture", ProvValue::str("x86_64")},
       {"library-version", ProvValue::str("0.1.0")},
       {"user-info", ProvValue::map({{"who", ProvValue::str("someone")}})},
       {"members", ProvValue::list()}});
}

}  // namespace

TEST_SUITE("provenance") {
  TEST_CASE("canonical encoding of scalars") {
    CHECK(canonical_encode(ProvValue::boolean(true)) == bytes({0x04, 0x01}));
    CHECK(canonical_encode(ProvValue::real(1.0)) == bytes({0x03, 0x3F, 0xF0, 0, 0, 0, 0, 0, 0}));
    CHECK(canonical_encode(ProvValue::integer(1)) == bytes({0x02, 0, 0, 0, 0, 0, 0, 0, 1}));
    CHECK(canonical_encode(ProvValue::str("ab")) == bytes({0x01, 0, 0, 0, 2, 'a', 'b'}));
  }

  TEST_CASE("map entries are encoded in key order") {
    const auto m = ProvValue::map({{"b", ProvValue::integer(1)}, {"a", ProvValue::integer(2)}});
    const auto enc = canonical_encode(m);
    const auto a = std::search(enc.begin(), enc.end(), std::begin("a") , std::begin("a") + 1);
    const auto b = std::search(enc.begin(), enc.end(), std::begin("b"), std::begin("b") + 1);
    CHECK(a < b);
    CHECK(enc[0] == 0x08);
  }

  TEST_CASE("hash of Bool(true) matches an independent SHA-256") {
    // sha256sum of the two bytes 04 01
    CHECK(provenance_hash(ProvValue::boolean(true)) ==
          "38b8bc5c86db41a80615b2f4694fc754cccffb95e8933d5b376021feab83cea3");
  }

  TEST_CASE("hash ignores timestamps and volatile fields") {
    const auto a = sample_model_provenance(100);
    const auto b = sample_model_provenance(999);
    CHECK_FALSE(canonical_encode(a) == canonical_encode(b));
    CHECK(provenance_hash(a) == provenance_hash(b));
    const auto c = testing::perturb_volatile(a, 7);
    CHECK(provenance_hash(a) == provenance_hash(c));
  }

  TEST_CASE("hash changes when a configuration value changes") {
    auto a = sample_model_provenance(1);
    auto trainer = make_object_provenance("pvml.LinearSgdTrainer", {{"lr", ProvValue::real(0.2)}, {"seed", ProvValue::integer(42)}},
                                          {{"invocation-count", ProvValue::integer(3)}});
    auto b = make_object_provenance("pvml.LinearModel", {{"trainer", trainer}, {"data", config_field(a, "data")}},
                                    instance_of(a));
    CHECK(provenance_hash(a) != provenance_hash(b));
  }

  TEST_CASE("maps built in different insertion orders hash equally") {
    ProvValue::Map m1;
    m1.emplace("x", ProvValue::integer(1));
    m1.emplace("y", ProvValue::str("q"));
    ProvValue::Map m2;
    m2.emplace("y", ProvValue::str("q"));
    m2.emplace("x", ProvValue::integer(1));
    CHECK(provenance_hash(ProvValue::map(m1)) == provenance_hash(ProvValue::map(m2)));
  }

  TEST_CASE("JSON form of scalars") {
    CHECK(serialize_provenance(ProvValue::integer(5)) == R"({"type":"int","value":5})");
    CHECK(parse_provenance(R"({"type":"int","value":5})") == ProvValue::integer(5));
  }

  TEST_CASE("JSON parse errors") {
    CHECK(code_of([] { parse_provenance(R"({"type":"zzz","value":1})"); }) == ErrorCode::UnknownTag);
    CHECK(code_of([] { parse_provenance(R"({"type":"int"})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_provenance(R"({"type":"float","value":"x"})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_provenance("{\n  \"type\": "); }) == ErrorCode::ParseError);
    try {
      parse_provenance("{\n  \"type\": ]");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  TEST_CASE("model provenance fixture round-trips through JSON") {
    const auto v = sample_model_provenance(12345);
    CHECK(parse_provenance(serialize_provenance(v)) == v);
    CHECK(parse_provenance(serialize_provenance(v, 2)) == v);
  }

  TEST_CASE("random trees round-trip through JSON") {
    testing::ProvGenerator gen(2024);
    for (int i = 0; i < 500; ++i) {
      const auto v = gen.value();
      const auto text = serialize_provenance(v);
      const auto back = parse_provenance(text);
      REQUIRE(back == v);
      CHECK(canonical_encode(back) == canonical_encode(v));
    }
  }

  TEST_CASE("strings that are not UTF-8 cannot be written as JSON") {
    CHECK(code_of([] { serialize_provenance(ProvValue::str("\xff\xfe")); }) == ErrorCode::InvalidValue);
  }

  TEST_CASE("float equality is bitwise") {
    CHECK_FALSE(ProvValue::real(0.0) == ProvValue::real(-0.0));
    CHECK(code_of([] { ProvValue::real(std::nan("")); }) == ErrorCode::InvalidValue);
  }

  TEST_CASE("configuration extraction keeps configuration and drops instance fields") {
    const auto tp = make_object_provenance("pvml.LinearSgdTrainer",
                                           {{"lr", ProvValue::real(0.1)}, {"seed", ProvValue::integer(42)}},
                                           {{"invocation-count", ProvValue::integer(3)}});
    const auto records = extract_configuration(tp);
    REQUIRE(records.size() == 1);
    CHECK(records[0].class_name == "pvml.LinearSgdTrainer");
    CHECK(records[0].properties.size() == 2);
    CHECK(records[0].properties.count("lr") == 1);
    CHECK(records[0].properties.count("seed") == 1);
    CHECK(records[0].properties.count("invocation-count") == 0);
    CHECK(extract_configuration(tp) == records);
  }

  TEST_CASE("nested trainers become records linked by reference") {
    TreeConfig tc;
    tc.feature_subsampling_fraction = 0.5;
    EnsembleConfig ec;
    ec.variant = EnsembleVariant::RandomForest;
    const EnsembleTrainer trainer(ec, std::make_unique<CartTrainer>(tc, 3), 9);
    const auto records = extract_configuration(trainer.provenance());
    REQUIRE(records.size() == 2);
    CHECK(records[0].class_name == "pvml.EnsembleTrainer");
    CHECK(records[1].class_name == "pvml.CartTrainer");
    const auto& ref = records[0].properties.at("base-trainer");
    REQUIRE(is_ref(ref));
    CHECK(ref_target(ref) == records[1].name);
    CHECK(parse_config(serialize_config(records)) == records);
  }

  TEST_CASE("config documents reject malformed input") {
    CHECK(code_of([] { parse_config(R"({"nope":[]})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] {
            parse_config(R"({"config":[{"name":"a","className":"x"},{"name":"a","className":"y"}]})");
          }) == ErrorCode::ParseError);
  }

  TEST_CASE("redaction hides content but keeps a linkable digest") {
    const auto v = sample_model_provenance(77);
    const auto r = redact(v);
    CHECK(r.digest == provenance_hash(v));
    const auto text = serialize_provenance(r.redacted);
    CHECK(text.find("secret-file") == std::string::npos);
    CHECK(text.find("someone") == std::string::npos);
    CHECK(instance_field(r.redacted, "provenance-hash").as_hash().digest == r.digest);
    CHECK(instance_field(r.redacted, "library-version").as_str() == "0.1.0");
    const auto again = redact(v);
    CHECK(again.digest == r.digest);
    CHECK(again.redacted == r.redacted);
  }

  TEST_CASE("diff of equal trees is empty") {
    const auto v = sample_model_provenance(5);
    CHECK(diff_provenance(v, v).empty());
  }

  TEST_CASE("diff reports only volatile paths when timestamps differ") {
    const auto entries = diff_provenance(sample_model_provenance(5), sample_model_provenance(6));
    REQUIRE(entries.size() == 2);
    for (const auto& e : entries) CHECK(e.is_volatile);
    CHECK(entries[0].path == "configuration/data/configuration/source/instance/load-time");
    CHECK(entries[1].path == "instance/timestamp");
  }

  TEST_CASE("diff reports a single changed hyperparameter") {
    const auto a = make_object_provenance("t", {{"lr", ProvValue::real(0.1)}}, {});
    const auto b = make_object_provenance("t", {{"lr", ProvValue::real(0.2)}}, {});
    const auto entries = diff_provenance(a, b);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].path == "configuration/lr");
    CHECK_FALSE(entries[0].is_volatile);
    CHECK(*entries[0].left == ProvValue::real(0.1));
    CHECK(*entries[0].right == ProvValue::real(0.2));
  }

  TEST_CASE("diff is empty exactly when canonical encodings agree") {
    testing::ProvGenerator gen(99);
    for (int i = 0; i < 300; ++i) {
      const auto a = gen.value();
      const auto b = (i % 3 == 0) ? a : gen.value();
      CHECK(diff_provenance(a, b).empty() == (canonical_encode(a) == canonical_encode(b)));
    }
  }

  TEST_CASE("sha256 helper matches known vectors") {
    CHECK(sha256_hex(std::string_view("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex(std::string_view("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  }
}
