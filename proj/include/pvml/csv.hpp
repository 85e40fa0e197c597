#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace pvml {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line on which each row starts.
  std::vector<std::size_t> row_lines;
};

/// RFC-4180 style: comma separator, double-quote quoting with "" escapes,
/// quoted fields may span lines, CRLF or LF line endings, header required.
/// Blank lines are skipped. Throws CsvParseError naming the line.
CsvTable parse_csv(std::string_view text);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

}  // namespace pvml
