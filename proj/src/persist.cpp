#include "pvml/persist.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <sstream>

#include "pvml/ensemble.hpp"
#include "pvml/error.hpp"
#include "pvml/linear.hpp"
#include "pvml/tree.hpp"

namespace pvml {

using json = nlohmann::json;

std::string float_text(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_float_text(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::FormatError, "bad float text '" + std::string(text) + "'");
  }
  return v;
}

namespace {

double flt(const json& j, const char* key) { return parse_float_text(j.at(key).get<std::string>()); }

json float_array(const std::vector<double>& values) {
  json out = json::array();
  for (const double v : values) out.push_back(float_text(v));
  return out;
}

std::vector<double> float_vector(const json& j) {
  std::vector<double> out;
  for (const auto& item : j) out.push_back(parse_float_text(item.get<std::string>()));
  return out;
}

}  // namespace

json feature_domain_to_json(const FeatureDomain& domain) {
  json out = json::array();
  for (const auto& f : domain.features()) {
    out.push_back({{"name", f.name},
                   {"count", f.count},
                   {"min", float_text(f.min)},
                   {"max", float_text(f.max)},
                   {"mean", float_text(f.mean)},
                   {"variance", float_text(f.variance)}});
  }
  return out;
}

FeatureDomain feature_domain_from_json(const json& j) {
  std::vector<FeatureStats> stats;
  for (const auto& f : j) {
    FeatureStats s;
    s.name = f.at("name").get<std::string>();
    s.count = f.at("count").get<std::int64_t>();
    s.min = flt(f, "min");
    s.max = flt(f, "max");
    s.mean = flt(f, "mean");
    s.variance = flt(f, "variance");
    stats.push_back(std::move(s));
  }
  return FeatureDomain::from_stats(std::move(stats));
}

json output_domain_to_json(const OutputDomain& domain) {
  const auto task = domain.task();
  if (!task) throw Error(ErrorCode::FormatError, "cannot store an unlabelled output domain");
  if (*task == Task::Categorical) {
    return {{"task", "categorical"}, {"counts", domain.categorical().counts}};
  }
  const auto& r = domain.real();
  return {{"task", "real"},
          {"min", float_text(r.min)},
          {"max", float_text(r.max)},
          {"mean", float_text(r.mean)},
          {"variance", float_text(r.variance)},
          {"count", r.count}};
}

OutputDomain output_domain_from_json(const json& j) {
  const auto task = parse_task(j.at("task").get<std::string>());
  if (task == Task::Categorical) {
    CategoricalDomain d;
    d.counts = j.at("counts").get<std::map<std::string, std::int64_t>>();
    if (d.counts.empty()) throw Error(ErrorCode::FormatError, "categorical output domain has no labels");
    return OutputDomain(std::move(d));
  }
  RealDomain d;
  d.min = flt(j, "min");
  d.max = flt(j, "max");
  d.mean = flt(j, "mean");
  d.variance = flt(j, "variance");
  d.count = j.at("count").get<std::int64_t>();
  return OutputDomain(d);
}

// ---------------------------------------------------------------------------
// Built-in codecs.

namespace {

json save_linear(const Model& model) {
  const auto& m = dynamic_cast<const LinearModel&>(model);
  return {{"objective", std::string(objective_name(m.objective()))},
          {"labels", m.labels()},
          {"num-features", m.parameters().num_features},
          {"num-outputs", m.parameters().num_outputs},
          {"weights", float_array(m.parameters().weights)}};
}

ModelPtr load_linear(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
                     const json& p) {
  LinearParameters params;
  params.num_features = p.at("num-features").get<std::size_t>();
  params.num_outputs = p.at("num-outputs").get<std::size_t>();
  params.weights = float_vector(p.at("weights"));
  return std::make_shared<LinearModel>(std::move(name), std::move(provenance), std::move(features),
                                       std::move(outputs), parse_objective(p.at("objective").get<std::string>()),
                                       p.at("labels").get<std::vector<std::string>>(), std::move(params));
}

json save_node(const TreeModel& m, std::size_t index) {
  const auto& node = m.nodes()[index];
  json out = {{"leaf", node.leaf},
              {"count", node.count},
              {"value", float_text(node.value)},
              {"distribution", float_array(node.distribution)}};
  if (!node.leaf) {
    out["feature"] = m.feature_domain().at(node.feature).name;
    out["threshold"] = float_text(node.threshold);
    out["decrease"] = float_text(node.decrease);
    out["left"] = save_node(m, static_cast<std::size_t>(node.left));
    out["right"] = save_node(m, static_cast<std::size_t>(node.right));
  }
  return out;
}

// Rebuilds nodes in pre-order, left first: the order grow_tree produces.
std::int32_t load_node(const json& j, const FeatureDomain& features, std::vector<TreeNode>& nodes, int depth) {
  if (depth > 10000) throw Error(ErrorCode::FormatError, "tree is too deep");
  const auto index = static_cast<std::int32_t>(nodes.size());
  nodes.emplace_back();
  TreeNode node;
  node.leaf = j.at("leaf").get<bool>();
  node.count = j.at("count").get<std::int64_t>();
  node.value = flt(j, "value");
  node.distribution = float_vector(j.at("distribution"));
  if (!node.leaf) {
    const auto id = features.id_of(j.at("feature").get<std::string>());
    if (!id) throw Error(ErrorCode::FormatError, "tree splits on a feature outside its domain");
    node.feature = *id;
    node.threshold = flt(j, "threshold");
    node.decrease = flt(j, "decrease");
    node.left = load_node(j.at("left"), features, nodes, depth + 1);
    node.right = load_node(j.at("right"), features, nodes, depth + 1);
  }
  nodes[static_cast<std::size_t>(index)] = std::move(node);
  return index;
}

json save_tree(const Model& model) {
  const auto& m = dynamic_cast<const TreeModel&>(model);
  return {{"root", save_node(m, 0)}};
}

ModelPtr load_tree(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
                   const json& p) {
  std::vector<TreeNode> nodes;
  load_node(p.at("root"), features, nodes, 0);
  return std::make_shared<TreeModel>(std::move(name), std::move(provenance), std::move(features), std::move(outputs),
                                     std::move(nodes));
}

json save_ensemble(const Model& model) {
  const auto& m = dynamic_cast<const EnsembleModel&>(model);
  json members = json::array();
  for (const auto& member : m.members()) members.push_back(model_to_container(*member));
  return {{"variant", std::string(ensemble_variant_name(m.variant()))},
          {"weights", float_array(m.member_weights())},
          {"members", members}};
}

ModelPtr load_ensemble(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
                       const json& p) {
  std::vector<ModelPtr> members;
  for (const auto& c : p.at("members")) members.push_back(model_from_container(c));
  return std::make_shared<EnsembleModel>(std::move(name), std::move(provenance), std::move(features),
                                         std::move(outputs), parse_ensemble_variant(p.at("variant").get<std::string>()),
                                         std::move(members), float_vector(p.at("weights")));
}

struct Registry {
  std::shared_mutex mutex;
  std::map<std::string, ModelCodec> codecs;

  Registry() {
    codecs[std::string(kLinearModelClass)] = {save_linear, load_linear};
    codecs[std::string(kTreeModelClass)] = {save_tree, load_tree};
    codecs[std::string(kEnsembleModelClass)] = {save_ensemble, load_ensemble};
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

ModelCodec codec_for(const std::string& model_class) {
  auto& r = registry();
  std::shared_lock lock(r.mutex);
  const auto it = r.codecs.find(model_class);
  if (it == r.codecs.end()) throw Error(ErrorCode::UnknownModelClass, "no codec for model class '" + model_class + "'");
  return it->second;
}

}  // namespace

void register_model_class(const std::string& model_class, ModelCodec codec) {
  auto& r = registry();
  std::unique_lock lock(r.mutex);
  r.codecs[model_class] = std::move(codec);
}

bool is_model_class_registered(const std::string& model_class) {
  auto& r = registry();
  std::shared_lock lock(r.mutex);
  return r.codecs.count(model_class) > 0;
}

json model_to_container(const Model& model) {
  const auto codec = codec_for(model.model_class());
  return {{"formatName", kFormatName},
          {"version", kFormatVersion},
          {"modelClass", model.model_class()},
          {"name", model.name()},
          {"provenance", json::parse(serialize_provenance(model.provenance()))},
          {"featureDomain", feature_domain_to_json(model.feature_domain())},
          {"outputDomain", output_domain_to_json(model.output_domain())},
          {"parameters", codec.save(model)}};
}

ModelPtr model_from_container(const json& c) {
  if (!c.is_object() || !c.contains("formatName") || c["formatName"] != kFormatName) {
    throw Error(ErrorCode::FormatError, "not a PVML container");
  }
  if (!c.contains("version") || c["version"] != kFormatVersion) {
    throw Error(ErrorCode::FormatError, "unsupported PVML version");
  }
  try {
    const auto model_class = c.at("modelClass").get<std::string>();
    const auto codec = codec_for(model_class);
    auto provenance = parse_provenance(c.at("provenance").dump());
    auto model = codec.load(c.at("name").get<std::string>(), std::move(provenance),
                            feature_domain_from_json(c.at("featureDomain")),
                            output_domain_from_json(c.at("outputDomain")), c.at("parameters"));
    if (model->model_class() != model_class) throw Error(ErrorCode::FormatError, "codec built the wrong model class");
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("malformed PVML container: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownModelClass || e.code() == ErrorCode::FormatError) throw;
    throw Error(ErrorCode::FormatError, std::string("malformed PVML container: ") + e.what());
  }
}

std::string serialize_model(const Model& model) { return model_to_container(model).dump(1) + "\n"; }

ModelPtr parse_model(std::string_view text) {
  json c;
  try {
    c = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::FormatError, std::string("model file is not JSON: ") + e.what());
  }
  return model_from_container(c);
}

void save_model(const Model& model, const std::string& path) {
  const auto text = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

ModelPtr load_model(const std::string& path, std::optional<Task> expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto model = parse_model(buf.str());
  if (expected && model->task() != *expected) {
    throw Error(ErrorCode::TaskMismatch, "model '" + path + "' is " + std::string(task_name(model->task())) +
                                             ", expected " + std::string(task_name(*expected)));
  }
  return model;
}

}  // namespace pvml
