#include "msearch/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace msearch::report {

Table& Report::add_table(std::string name, std::vector<std::string> columns) {
  tables.push_back({std::move(name), std::move(columns), {}});
  return tables.back();
}

Format parse_format(std::string_view name) {
  if (name == "table") return Format::table;
  if (name == "csv") return Format::csv;
  if (name == "jsonl" || name == "json-lines") return Format::jsonl;
  throw std::invalid_argument("unknown report format '" + std::string(name) + "'");
}

std::string_view to_string(Format f) {
  switch (f) {
    case Format::table: return "table";
    case Format::csv: return "csv";
    case Format::jsonl: return "jsonl";
  }
  return "unknown";
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_cell(const Cell& c) {
  struct V {
    std::string operator()(const std::string& s) const { return s; }
    std::string operator()(double d) const { return format_number(d); }
    std::string operator()(std::int64_t i) const { return std::to_string(i); }
    std::string operator()(bool b) const { return b ? "true" : "false"; }
  };
  return std::visit(V{}, c);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string json_string(const std::string& s) { return nlohmann::json(s).dump(); }

std::string json_cell(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? format_number(*d) : "null";
  if (const auto* s = std::get_if<std::string>(&c)) return json_string(*s);
  return format_cell(c);
}

std::string emit_table(const Report& r) {
  std::ostringstream os;
  os << "msearch " << r.kind << " report (v" << kReportVersion << ")\n";
  std::size_t kw = 0;
  for (const auto& [k, v] : r.header) kw = std::max(kw, k.size());
  for (const auto& [k, v] : r.header) os << "  " << k << std::string(kw - k.size(), ' ') << " : " << v << "\n";
  for (const auto& t : r.tables) {
    os << "\n[" << t.name << "]\n";
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width(t.columns.size());
    for (std::size_t j = 0; j < t.columns.size(); ++j) width[j] = t.columns[j].size();
    for (const auto& row : t.rows) {
      auto& out = cells.emplace_back();
      for (std::size_t j = 0; j < row.size(); ++j) {
        out.push_back(format_cell(row[j]));
        if (j < width.size()) width[j] = std::max(width[j], out.back().size());
      }
    }
    auto line = [&](const std::vector<std::string>& v) {
      std::string s;
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (j) s += "  ";
        s += v[j];
        if (j + 1 < v.size() && j < width.size()) s += std::string(width[j] - v[j].size(), ' ');
      }
      os << s << "\n";
    };
    line(t.columns);
    for (const auto& c : cells) line(c);
  }
  return os.str();
}

std::string emit_csv(const Report& r) {
  std::ostringstream os;
  os << "# msearch-report v" << kReportVersion << "\n";
  os << "# kind=" << r.kind << "\n";
  for (const auto& [k, v] : r.header) os << "# " << k << "=" << v << "\n";
  for (const auto& t : r.tables) {
    os << "## table=" << t.name << "\n";
    for (std::size_t j = 0; j < t.columns.size(); ++j) os << (j ? "," : "") << csv_field(t.columns[j]);
    os << "\n";
    for (const auto& row : t.rows) {
      for (std::size_t j = 0; j < row.size(); ++j) os << (j ? "," : "") << csv_field(format_cell(row[j]));
      os << "\n";
    }
  }
  return os.str();
}

std::string emit_jsonl(const Report& r) {
  std::ostringstream os;
  os << "{\"record\":\"header\",\"version\":" << kReportVersion << ",\"kind\":" << json_string(r.kind)
     << ",\"config\":{";
  for (std::size_t i = 0; i < r.header.size(); ++i)
    os << (i ? "," : "") << json_string(r.header[i].first) << ":" << json_string(r.header[i].second);
  os << "}}\n";
  for (const auto& t : r.tables) {
    for (const auto& row : t.rows) {
      os << "{\"record\":\"row\",\"table\":" << json_string(t.name);
      for (std::size_t j = 0; j < row.size() && j < t.columns.size(); ++j)
        os << "," << json_string(t.columns[j]) << ":" << json_cell(row[j]);
      os << "}\n";
    }
  }
  return os.str();
}

}  // namespace

std::string emit_report(const Report& report, Format format) {
  switch (format) {
    case Format::table: return emit_table(report);
    case Format::csv: return emit_csv(report);
    case Format::jsonl: return emit_jsonl(report);
  }
  throw std::invalid_argument("unknown report format");
}

}  // namespace msearch::report
