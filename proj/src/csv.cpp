#include "pvml/csv.hpp"

#include "pvml/error.hpp"

namespace pvml {

namespace {

[[noreturn]] void csv_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::CsvParseError, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  bool record_has_content = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    if (record_has_content) {
      records.push_back(std::move(record));
      record_lines.push_back(record_line);
    }
    record.clear();
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) csv_error(line, "unexpected quote inside a field");
        if (!record_has_content) record_line = line;
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        if (!record_has_content) record_line = line;
        record_has_content = true;
        end_field();
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        csv_error(line, "bare carriage return");
      case '\n':
        end_record();
        ++line;
        break;
      default:
        if (field_was_quoted) csv_error(line, "characters after a closing quote");
        if (!record_has_content) record_line = line;
        record_has_content = true;
        field.push_back(c);
    }
  }
  if (in_quotes) csv_error(line, "unterminated quoted field");
  end_record();

  if (records.empty()) csv_error(1, "missing header row");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      csv_error(record_lines[r], "expected " + std::to_string(table.header.size()) + " fields, found " +
                                     std::to_string(records[r].size()));
    }
    table.rows.push_back(std::move(records[r]));
    table.row_lines.push_back(record_lines[r]);
  }
  return table;
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace pvml
