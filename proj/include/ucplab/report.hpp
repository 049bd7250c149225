#pragma once

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace ucplab {

using Cell = std::variant<double, std::int64_t, bool, std::string>;

// A results table with a fixed column order per experiment kind.
struct ResultTable {
  std::string kind;
  std::vector<std::string> columns;
  std::vector<std::string> units;  // one per column
  std::vector<std::vector<Cell>> rows;
  nlohmann::json summary = nlohmann::json::object();

  void add_row(std::vector<Cell> row);
  bool operator==(const ResultTable& other) const;
};

enum class ReportFormat { Csv, Json };

// %.17g, with nan / inf / -inf for non-finite values.
std::string format_number(double x);

std::string to_csv(const ResultTable& table);
nlohmann::json to_json(const ResultTable& table);
ResultTable table_from_json(const nlohmann::json& j);

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Writes results.csv or results.json into dir and returns the path.
std::filesystem::path emit_report(const ResultTable& table, ReportFormat format,
                                  const std::filesystem::path& dir);

}  // namespace ucplab
