#pragma once

// The bundled example problems. Each entry is an ordinary problem document,
// so `examples show NAME > file.json` gives an editable starting point.

#include "liesys/problem.hpp"
#include "liesys/report.hpp"
#include "liesys/tasks.hpp"

#include <string>
#include <vector>

namespace liesys {

std::vector<std::string> catalog_names();
/// Throws std::out_of_range for an unknown name.
nlohmann::json catalog_document(const std::string& name);
Problem catalog_problem(const std::string& name);

struct RunAllResult {
  std::vector<Report> reports;  // in catalog order
  double runtime_ms = 0.0;
  bool pass() const;
};

/// Runs every entry concurrently; entry i is seeded with
/// derive_seed(master, i), the master seed coming from the settings.
RunAllResult run_catalog(const Settings& settings = {});

}  // namespace liesys
