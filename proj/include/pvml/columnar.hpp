#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pvml/dataset.hpp"
#include "pvml/example.hpp"
#include "pvml/provenance.hpp"

namespace pvml {

enum class FieldKind { Numeric, Categorical, Text };

std::string_view field_kind_name(FieldKind kind);
FieldKind parse_field_kind(std::string_view name);

struct FieldProcessor {
  std::string column;
  FieldKind kind = FieldKind::Numeric;
  bool operator==(const FieldProcessor&) const = default;
};

inline constexpr std::string_view kSchemaClass = "pvml.ColumnarSchema";

/// How string columns turn into features and which column is the response.
struct ColumnarSchema {
  std::string response_column;
  Task response_type = Task::Categorical;
  std::vector<FieldProcessor> fields;

  /// Throws InvalidSchema (response among processed columns, duplicates,
  /// empty names, no processors).
  void validate() const;
  ProvValue provenance() const;
  static ColumnarSchema from_config(const ConfigView& view);

  bool operator==(const ColumnarSchema&) const = default;
};

/// Reads a {"config": [...]} document holding a pvml.ColumnarSchema record.
ColumnarSchema parse_schema(std::string_view text);
std::string schema_to_config_json(const ColumnarSchema& schema);

/// Lowercases ASCII and splits on runs of characters that are neither ASCII
/// alphanumerics nor bytes >= 0x80 (so UTF-8 words stay whole).
std::vector<std::string> tokenize(std::string_view text);

using Row = std::map<std::string, std::string, std::less<>>;

/// numeric c -> ("c", value); categorical c=v -> ("c@v", 1); text c ->
/// ("c@token", count). Empty cells produce no feature. With
/// `require_response` false a missing or empty response gives Unknown.
/// Throws UnparseableNumeric, MissingResponse or EmptyExample.
Example featurize_row(const ColumnarSchema& schema, const Row& row, bool require_response = true);

inline constexpr std::string_view kCsvLoaderClass = "pvml.CsvLoader";

/// CSV file source. The file is read and hashed on construction; rows are
/// featurized on each examples() call.
class CsvSource : public DataSource {
 public:
  /// Throws FileNotFound, CsvParseError or HeaderMismatch.
  CsvSource(std::string path, ColumnarSchema schema, bool require_response = true);

  std::vector<Example> examples() const override;
  const ProvValue& provenance() const override { return provenance_; }
  const std::string& path() const { return path_; }
  const ColumnarSchema& schema() const { return schema_; }
  const std::string& resource_hash() const { return resource_hash_; }

  /// Rebuilds a source from a pvml.CsvLoader config record.
  static std::unique_ptr<DataSource> from_config(const ConfigView& view);

 private:
  std::string path_;
  ColumnarSchema schema_;
  bool require_response_;
  std::string resource_hash_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> row_lines_;
  ProvValue provenance_;
};

std::unique_ptr<DataSource> load_csv(const std::string& path, const ColumnarSchema& schema,
                                     bool require_response = true);

/// Reads a whole file; throws FileNotFound.
std::string read_file(const std::string& path);

}  // namespace pvml
