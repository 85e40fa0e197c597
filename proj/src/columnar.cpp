#include "pvml/columnar.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "pvml/csv.hpp"
#include "pvml/error.hpp"
#include "pvml/sha256.hpp"

namespace pvml {

std::string_view field_kind_name(FieldKind kind) {
  switch (kind) {
    case FieldKind::Numeric: return "numeric";
    case FieldKind::Categorical: return "categorical";
    case FieldKind::Text: return "text";
  }
  return "?";
}

FieldKind parse_field_kind(std::string_view name) {
  if (name == "numeric") return FieldKind::Numeric;
  if (name == "categorical") return FieldKind::Categorical;
  if (name == "text") return FieldKind::Text;
  throw Error(ErrorCode::InvalidSchema, "unknown field kind '" + std::string(name) + "'");
}

void ColumnarSchema::validate() const {
  if (response_column.empty()) throw Error(ErrorCode::InvalidSchema, "response column must be named");
  if (fields.empty()) throw Error(ErrorCode::InvalidSchema, "schema processes no columns");
  std::set<std::string> seen;
  for (const auto& f : fields) {
    if (f.column.empty()) throw Error(ErrorCode::InvalidSchema, "field processor with an empty column name");
    if (f.column == response_column) {
      throw Error(ErrorCode::InvalidSchema, "response column '" + f.column + "' is also a feature column");
    }
    if (!seen.insert(f.column).second) {
      throw Error(ErrorCode::InvalidSchema, "column '" + f.column + "' listed twice");
    }
  }
}

ProvValue ColumnarSchema::provenance() const {
  ProvValue::List processors;
  for (const auto& f : fields) {
    processors.push_back(ProvValue::map(
        {{"column", ProvValue::str(f.column)}, {"kind", ProvValue::str(std::string(field_kind_name(f.kind)))}}));
  }
  return make_object_provenance(std::string(kSchemaClass),
                                {{"response-column", ProvValue::str(response_column)},
                                 {"response-type", ProvValue::str(std::string(task_name(response_type)))},
                                 {"field-processors", ProvValue::list(std::move(processors))}},
                                {});
}

ColumnarSchema ColumnarSchema::from_config(const ConfigView& view) {
  ColumnarSchema s;
  s.response_column = view.get_str("response-column");
  try {
    s.response_type = parse_task(view.get_str("response-type"));
    for (const auto& item : view.get("field-processors").as_list()) {
      const auto& m = item.as_map();
      const auto column = m.find("column");
      const auto kind = m.find("kind");
      if (column == m.end() || kind == m.end()) {
        throw Error(ErrorCode::InvalidSchema, "field processor needs 'column' and 'kind'");
      }
      s.fields.push_back({column->second.as_str(), parse_field_kind(kind->second.as_str())});
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidValue || e.code() == ErrorCode::InvalidConfig) {
      throw Error(ErrorCode::InvalidSchema, e.what());
    }
    throw;
  }
  s.validate();
  return s;
}

ColumnarSchema parse_schema(std::string_view text) {
  const auto records = parse_config(text);
  for (const auto& r : records) {
    if (r.class_name == kSchemaClass) return ColumnarSchema::from_config(ConfigView(r, records));
  }
  throw Error(ErrorCode::InvalidSchema, "config document has no " + std::string(kSchemaClass) + " record");
}

std::string schema_to_config_json(const ColumnarSchema& schema) {
  return serialize_config(extract_configuration(schema.provenance()));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool word = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
    if (word) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

double parse_number(const std::string& column, std::string_view raw) {
  std::string_view text = trim(raw);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw Error(ErrorCode::UnparseableNumeric, "column '" + column + "' value '" + std::string(raw) + "'");
  }
  return value;
}

}  // namespace

Example featurize_row(const ColumnarSchema& schema, const Row& row, bool require_response) {
  std::vector<FeatureValue> features;
  for (const auto& f : schema.fields) {
    const auto it = row.find(f.column);
    if (it == row.end() || trim(it->second).empty()) continue;
    switch (f.kind) {
      case FieldKind::Numeric:
        features.push_back({f.column, parse_number(f.column, it->second)});
        break;
      case FieldKind::Categorical:
        features.push_back({f.column + "@" + std::string(trim(it->second)), 1.0});
        break;
      case FieldKind::Text:
        for (auto& token : tokenize(it->second)) features.push_back({f.column + "@" + token, 1.0});
        break;
    }
  }
  Output output;
  const auto response = row.find(schema.response_column);
  if (response == row.end() || trim(response->second).empty()) {
    if (require_response) {
      throw Error(ErrorCode::MissingResponse, "row has no value for '" + schema.response_column + "'");
    }
  } else if (schema.response_type == Task::Categorical) {
    output = Output::categorical(std::string(trim(response->second)));
  } else {
    output = Output::real(parse_number(schema.response_column, response->second));
  }
  return make_example(std::move(features), std::move(output));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CsvSource::CsvSource(std::string path, ColumnarSchema schema, bool require_response)
    : path_(std::move(path)), schema_(std::move(schema)), require_response_(require_response) {
  schema_.validate();
  const std::string bytes = read_file(path_);
  resource_hash_ = sha256_hex(bytes);
  CsvTable table = parse_csv(bytes);

  std::vector<std::string> missing;
  const std::set<std::string> present(table.header.begin(), table.header.end());
  if (present.size() != table.header.size()) {
    throw Error(ErrorCode::HeaderMismatch, "'" + path_ + "' has duplicate column names");
  }
  for (const auto& f : schema_.fields) {
    if (!present.contains(f.column)) missing.push_back(f.column);
  }
  if (require_response_ && !present.contains(schema_.response_column)) missing.push_back(schema_.response_column);
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::HeaderMismatch, "'" + path_ + "' is missing columns: " + list);
  }
  header_ = std::move(table.header);
  rows_ = std::move(table.rows);
  row_lines_ = std::move(table.row_lines);

  provenance_ = make_object_provenance(
      std::string(kCsvLoaderClass),
      {{"path", ProvValue::str(path_)},
       {"schema", schema_.provenance()},
       {"require-response", ProvValue::boolean(require_response_)},
       {"format", ProvValue::map({{"separator", ProvValue::str(",")},
                                  {"quote", ProvValue::str("\"")},
                                  {"header", ProvValue::boolean(true)},
                                  {"encoding", ProvValue::str("UTF-8")}})}},
      {{"resource-hash", ProvValue::hash("SHA-256", resource_hash_)}, {"load-time", ProvValue::now()}});
}

std::vector<Example> CsvSource::examples() const {
  std::vector<Example> out;
  out.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    Row row;
    for (std::size_t c = 0; c < header_.size(); ++c) row.emplace(header_[c], rows_[r][c]);
    try {
      out.push_back(featurize_row(schema_, row, require_response_));
    } catch (const Error& e) {
      throw Error(e.code(), "'" + path_ + "' line " + std::to_string(row_lines_[r]) + ": " + e.what());
    }
  }
  return out;
}

std::unique_ptr<DataSource> CsvSource::from_config(const ConfigView& view) {
  const auto schema = ColumnarSchema::from_config(view.get_object("schema"));
  const bool require = view.has("require-response") ? view.get_bool("require-response") : true;
  return std::make_unique<CsvSource>(view.get_str("path"), schema, require);
}

std::unique_ptr<DataSource> load_csv(const std::string& path, const ColumnarSchema& schema,
                                     bool require_response) {
  return std::make_unique<CsvSource>(path, schema, require_response);
}

}  // namespace pvml
