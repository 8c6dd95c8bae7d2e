#pragma once

// Reports: PASS/FAIL checks with the measured value and threshold, extra
// machine-readable data, and tables for CSV dumps. The text rendering only
// shows numbers that are also in the JSON.

#include <json.hpp>

#include <string>
#include <vector>

namespace liesys {

inline constexpr const char* kVersion = "0.1.0";

struct Check {
  std::string name;
  bool pass = false;
  /// Measured value and the bound it is compared with; relation is one of
  /// "<=", ">", "==", or empty for purely boolean checks.
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;
  std::string detail;
};

Check check_le(std::string name, double value, double threshold, std::string detail = {});
Check check_gt(std::string name, double value, double threshold, std::string detail = {});
Check check_eq(std::string name, double value, double expected, std::string detail = {});
Check check_true(std::string name, bool ok, std::string detail = {});

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string command;
  std::string problem;
  std::vector<Check> checks;
  /// Ordered key/value lines rendered in the text output.
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  /// Further details (JSON only).
  nlohmann::ordered_json data = nlohmann::ordered_json::object();
  nlohmann::ordered_json settings = nlohmann::ordered_json::object();
  std::vector<Table> tables;
  /// Set when the command could not run; the report then fails.
  std::string error;

  bool pass() const;
  void add(Check c) { checks.push_back(std::move(c)); }
  /// Appends the other report's checks with a prefix, and nests its data.
  void merge(const Report& other, const std::string& prefix);

  nlohmann::ordered_json to_json() const;
  std::string text() const;
  /// Writes one CSV file per table into `directory` (created if missing).
  void write_csv(const std::string& directory) const;
};

std::string format_number(double v);

}  // namespace liesys
