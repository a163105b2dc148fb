#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

// Report model shared by every subcommand, and its three encodings.
//
// csv (version 1):
//   # msearch-report v1
//   # kind=<kind>
//   # <key>=<value>            one line per effective configuration entry
//   ## table=<name>            then a column header row and data rows
//
// jsonl (version 1): one object per line; the first is
//   {"record":"header","version":1,"kind":...,"config":{...}}
// followed by {"record":"row","table":<name>,<column>:<value>,...} per row.
//
// Numbers are printed with 12 significant digits ("%.12g"); non-finite
// values become "nan"/"inf" in text and null in jsonl.

namespace msearch::report {

inline constexpr int kReportVersion = 1;

using Cell = std::variant<std::string, double, std::int64_t, bool>;

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct Report {
  std::string kind;
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<Table> tables;

  Table& add_table(std::string name, std::vector<std::string> columns);
};

enum class Format { table, csv, jsonl };

Format parse_format(std::string_view name);
std::string_view to_string(Format f);

std::string format_number(double v);
std::string format_cell(const Cell& c);

std::string emit_report(const Report& report, Format format);

}  // namespace msearch::report
