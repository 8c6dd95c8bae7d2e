#include "liesys/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace liesys {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

Check check_le(std::string name, double value, double threshold, std::string detail) {
  return {std::move(name), value <= threshold, value, threshold, "<=", std::move(detail)};
}

Check check_gt(std::string name, double value, double threshold, std::string detail) {
  return {std::move(name), value > threshold, value, threshold, ">", std::move(detail)};
}

Check check_eq(std::string name, double value, double expected, std::string detail) {
  return {std::move(name), value == expected, value, expected, "==", std::move(detail)};
}

Check check_true(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok, ok ? 1.0 : 0.0, 1.0, "", std::move(detail)};
}

bool Report::pass() const {
  if (!error.empty()) return false;
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

void Report::merge(const Report& other, const std::string& prefix) {
  for (auto c : other.checks) {
    c.name = prefix + ": " + c.name;
    checks.push_back(std::move(c));
  }
  for (auto it = other.summary.begin(); it != other.summary.end(); ++it) summary[prefix + "." + it.key()] = it.value();
  data[prefix] = other.data;
  for (auto t : other.tables) {
    t.name = prefix + "_" + t.name;
    tables.push_back(std::move(t));
  }
  if (!other.error.empty()) error += (error.empty() ? "" : "; ") + prefix + ": " + other.error;
}

nlohmann::ordered_json Report::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["problem"] = problem;
  j["verdict"] = pass() ? "PASS" : "FAIL";
  j["version"] = kVersion;
  auto checks_json = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    nlohmann::ordered_json jc;
    jc["name"] = c.name;
    jc["verdict"] = c.pass ? "PASS" : "FAIL";
    if (!c.relation.empty()) {
      jc["value"] = std::isfinite(c.value) ? nlohmann::ordered_json(c.value) : nlohmann::ordered_json(format_number(c.value));
      jc["relation"] = c.relation;
      jc["threshold"] = c.threshold;
    }
    if (!c.detail.empty()) jc["detail"] = c.detail;
    checks_json.push_back(std::move(jc));
  }
  j["checks"] = std::move(checks_json);
  j["summary"] = summary;
  j["settings"] = settings;
  j["data"] = data;
  if (!error.empty()) j["error"] = error;
  return j;
}

std::string Report::text() const {
  std::ostringstream os;
  os << command;
  if (!problem.empty()) os << " " << problem;
  os << ": " << (pass() ? "PASS" : "FAIL") << "\n";
  if (!error.empty()) os << "  error: " << error << "\n";
  for (const auto& c : checks) {
    os << "  " << (c.pass ? "PASS" : "FAIL") << "  " << c.name;
    if (!c.relation.empty())
      os << ": " << format_number(c.value) << " " << c.relation << " " << format_number(c.threshold);
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << "\n";
  }
  for (auto it = summary.begin(); it != summary.end(); ++it) {
    os << "  " << it.key() << " = ";
    if (it.value().is_string()) os << it.value().get<std::string>();
    else if (it.value().is_number_float()) os << format_number(it.value().get<double>());
    else os << it.value().dump();
    os << "\n";
  }
  if (!settings.empty()) {
    os << "  settings:";
    for (auto it = settings.begin(); it != settings.end(); ++it) {
      os << " " << it.key() << "=";
      if (it.value().is_number_float()) os << format_number(it.value().get<double>());
      else os << it.value().dump();
    }
    os << "\n";
  }
  return os.str();
}

void Report::write_csv(const std::string& directory) const {
  std::filesystem::create_directories(directory);
  for (const auto& t : tables) {
    std::ofstream out(std::filesystem::path(directory) / (t.name + ".csv"));
    if (!out) throw std::runtime_error("cannot write " + t.name + ".csv in " + directory);
    for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
    out << "\n";
    out.precision(17);
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
  }
}

}  // namespace liesys
