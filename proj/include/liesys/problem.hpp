#pragma once

// JSON problem files: the schema, strict parsing (unknown keys are errors),
// and construction of the library objects they describe.

#include "liesys/group.hpp"
#include "liesys/pde.hpp"

#include <json.hpp>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace liesys {

class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct RuleSpec {
  std::string name;
  int m = 1;
  std::vector<std::string> psi;
  std::optional<std::vector<std::string>> phi;
  std::vector<std::string> constraints;
  /// false marks a rule kept as a diagnostic: it is expected to fail tangency.
  bool expect_tangent = true;
};

struct ActionSpec {
  std::string name;  // "linear" or "mobius"
  /// Entry-wise matrix curve (row-major); when absent the coefficients are
  /// (b1, b2, b3) of the sl(2) curve.
  std::optional<std::vector<std::string>> matrix;
  std::vector<double> x0;
  /// Start point in R^2 for the linear/Riccati equivariance comparison.
  std::optional<std::vector<double>> equivariance;
};

struct PdeSpec {
  std::vector<std::string> parameters;
  std::vector<std::string> chart;
  std::vector<std::vector<std::string>> fields;
  /// u[a][alpha] and the basis fields on `chart`.
  std::optional<std::vector<std::vector<std::string>>> u;
  std::optional<std::vector<std::vector<std::string>>> basis;
  std::vector<double> x0;
  std::vector<double> base;
  std::vector<double> target;
  /// [lo, hi, count] per parameter.
  std::vector<std::array<double, 3>> axes;
  std::vector<std::vector<double>> particular;
};

struct ProlongationSpec {
  int copies = 2;
  /// sum_i coefficient_i * (prolongation of field index_i), coefficients on the product chart.
  std::vector<std::pair<std::string, std::size_t>> terms;
};

struct Expectation {
  std::optional<bool> closed;
  std::optional<int> dimension;
  std::optional<int> m;
  std::optional<bool> flat;
  /// Base field expected from the prolongation test, one string per component.
  std::optional<std::vector<std::string>> base;
  std::optional<bool> in_span;
};

struct Problem {
  std::string name;
  std::string description;
  std::vector<std::string> tasks;
  std::vector<std::string> chart;
  std::vector<std::vector<std::string>> fields;
  std::vector<std::string> coefficients;
  std::vector<RuleSpec> rules;
  std::optional<ActionSpec> action;
  std::optional<PdeSpec> pde;
  std::optional<ProlongationSpec> prolongation;
  std::optional<std::pair<double, double>> t_span;
  std::optional<double> tol;
  std::optional<double> tol_const;
  std::optional<std::uint64_t> seed;
  std::optional<int> m;
  std::optional<std::vector<double>> k;
  std::optional<std::vector<double>> x0;
  std::optional<std::vector<std::vector<double>>> particular;
  Expectation expect;
};

/// Throws SchemaError naming the offending JSON path.
Problem parse_problem(const nlohmann::json& doc);
Problem load_problem(const std::string& path);
nlohmann::json to_json(const Problem& problem);

// Construction of library objects; ParseError and std::invalid_argument
// from the library pass through.
Chart problem_chart(const Problem& p);
std::vector<VectorField> problem_fields(const Problem& p);
/// Throws SchemaError when the coefficient count does not match the fields.
LieSystem problem_system(const Problem& p);
SuperpositionRule problem_rule(const Problem& p, const RuleSpec& rule);
PdeSystem problem_pde(const PdeSpec& spec);
MatrixCurve problem_matrix_curve(const Problem& p);
std::vector<std::vector<double>> pde_axes(const PdeSpec& spec);

}  // namespace liesys
