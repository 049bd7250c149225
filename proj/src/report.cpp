#include "ucplab/report.hpp"

#include "ucplab/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ucplab {

namespace {

std::string csv_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_number(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (char ch : v) {
            if (ch == '"') quoted += '"';
            quoted += ch;
          }
          return quoted + "\"";
        }
      },
      c);
}

// JSON has no encoding for non-finite numbers; they travel as strings.
nlohmann::json json_cell(const Cell& c) {
  return std::visit(
      [](const auto& v) -> nlohmann::json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (std::isnan(v)) return "NaN";
          if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
        }
        return v;
      },
      c);
}

Cell cell_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "NaN") return std::nan("");
  if (s == "Infinity") return HUGE_VAL;
  if (s == "-Infinity") return -HUGE_VAL;
  return s;
}

bool cells_equal(const Cell& a, const Cell& b) {
  if (a.index() != b.index()) return false;
  if (const auto* x = std::get_if<double>(&a)) {
    const double y = std::get<double>(b);
    return (std::isnan(*x) && std::isnan(y)) || *x == y;
  }
  return a == b;
}

}  // namespace

void ResultTable::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw ConfigError("row width does not match the column count");
  rows.push_back(std::move(row));
}

bool ResultTable::operator==(const ResultTable& other) const {
  if (kind != other.kind || columns != other.columns || units != other.units || summary != other.summary ||
      rows.size() != other.rows.size())
    return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != other.rows[i].size()) return false;
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      if (!cells_equal(rows[i][k], other.rows[i][k])) return false;
  }
  return true;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const ResultTable& table) {
  std::ostringstream out;
  for (std::size_t k = 0; k < table.columns.size(); ++k) out << (k ? "," : "") << table.columns[k];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << csv_cell(row[k]);
    out << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const ResultTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : table.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t k = 0; k < row.size(); ++k) r[table.columns[k]] = json_cell(row[k]);
    rows.push_back(std::move(r));
  }
  nlohmann::json units = nlohmann::json::object();
  for (std::size_t k = 0; k < table.columns.size(); ++k) units[table.columns[k]] = table.units[k];
  return {{"kind", table.kind}, {"columns", table.columns}, {"units", units}, {"rows", rows},
          {"summary", table.summary}};
}

ResultTable table_from_json(const nlohmann::json& j) {
  ResultTable t;
  t.kind = j.at("kind").get<std::string>();
  t.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& c : t.columns) t.units.push_back(j.at("units").at(c).get<std::string>());
  for (const auto& r : j.at("rows")) {
    std::vector<Cell> row;
    for (const auto& c : t.columns) row.push_back(cell_from_json(r.at(c)));
    t.rows.push_back(std::move(row));
  }
  t.summary = j.value("summary", nlohmann::json::object());
  return t;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ConfigError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::filesystem::path emit_report(const ResultTable& table, ReportFormat format, const std::filesystem::path& dir) {
  if (table.rows.empty()) throw ConfigError("emit_report: results are empty");
  const auto path = dir / (format == ReportFormat::Csv ? "results.csv" : "results.json");
  write_atomic(path, format == ReportFormat::Csv ? to_csv(table) : to_json(table).dump(2) + "\n");
  return path;
}

}  // namespace ucplab
