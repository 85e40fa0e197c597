#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "pvml/domain.hpp"
#include "pvml/model.hpp"

namespace pvml {

inline constexpr std::string_view kFormatName = "PVML";
inline constexpr int kFormatVersion = 1;

/// Shortest decimal text that parses back to the same double.
std::string float_text(double v);
/// Throws FormatError.
double parse_float_text(std::string_view text);

nlohmann::json feature_domain_to_json(const FeatureDomain& domain);
FeatureDomain feature_domain_from_json(const nlohmann::json& j);
nlohmann::json output_domain_to_json(const OutputDomain& domain);
OutputDomain output_domain_from_json(const nlohmann::json& j);

/// Writes and reads the model-specific "parameters" member of a container.
struct ModelCodec {
  std::function<nlohmann::json(const Model&)> save;
  std::function<ModelPtr(std::string name, ProvValue provenance, FeatureDomain features, OutputDomain outputs,
                         const nlohmann::json& parameters)>
      load;
};

/// Registers (or replaces) the codec for `model_class`. The built-in linear,
/// tree and ensemble classes are always registered.
void register_model_class(const std::string& model_class, ModelCodec codec);
bool is_model_class_registered(const std::string& model_class);

/// Throws UnknownModelClass.
nlohmann::json model_to_container(const Model& model);
/// Throws FormatError or UnknownModelClass.
ModelPtr model_from_container(const nlohmann::json& container);

/// Byte-deterministic JSON text, keys sorted.
std::string serialize_model(const Model& model);
ModelPtr parse_model(std::string_view text);

/// Throws IoError.
void save_model(const Model& model, const std::string& path);
/// Throws IoError, FormatError, UnknownModelClass, and TaskMismatch when the
/// stored task differs from `expected`.
ModelPtr load_model(const std::string& path, std::optional<Task> expected);

}  // namespace pvml
