#include "liesys/catalog.hpp"

#include "liesys/parallel.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <stdexcept>

namespace liesys {

using json = nlohmann::json;

namespace {

// Slot-indexed coordinate name, e.g. slot("x", 2) == "x_2".
std::string slot(const std::string& var, int a) { return var + "_" + std::to_string(a); }

std::string det2(const std::string& a, const std::string& b, const std::string& c, const std::string& d) {
  return "(" + a + ")*(" + d + ") - (" + b + ")*(" + c + ")";
}

// Determinant of the n x n matrix whose columns are the given slots, with
// column `replace` taken from slot 0 instead (replace < 0: no replacement).
std::string column_det(const std::vector<std::string>& vars, const std::vector<int>& cols, int replace) {
  auto entry = [&](std::size_t row, std::size_t col) {
    return slot(vars[row], static_cast<int>(col) == replace ? 0 : cols[col]);
  };
  if (vars.size() == 2) return det2(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1));
  std::string out;
  for (std::size_t j = 0; j < 3; ++j) {
    const std::size_t j1 = (j + 1) % 3, j2 = (j + 2) % 3;
    out += (j ? " + " : "") + entry(0, j) + "*(" + det2(entry(1, j1), entry(1, j2), entry(2, j1), entry(2, j2)) + ")";
  }
  return out;
}

// Linear superposition x = k1 x_1 + ... + kn x_n on R^n, with the constants
// recovered by Cramer's rule.
json linear_rule(const std::vector<std::string>& vars) {
  const int n = static_cast<int>(vars.size());
  std::vector<int> cols;
  for (int i = 1; i <= n; ++i) cols.push_back(i);
  const std::string den = column_det(vars, cols, -1);
  json psi = json::array(), phi = json::array();
  for (int i = 0; i < n; ++i) psi.push_back("(" + column_det(vars, cols, i) + ")/(" + den + ")");
  for (const auto& v : vars) {
    std::string c;
    for (int i = 1; i <= n; ++i) c += (i > 1 ? " + " : "") + ("k" + std::to_string(i)) + "*" + slot(v, i);
    phi.push_back(c);
  }
  return {{"name", "linear"}, {"m", n}, {"psi", psi}, {"phi", phi}};
}

// The fields x_j d/dx_i of gl(n), row-major in (i, j).
json gl_fields(const std::vector<std::string>& vars) {
  json fields = json::array();
  for (std::size_t i = 0; i < vars.size(); ++i)
    for (std::size_t j = 0; j < vars.size(); ++j) {
      json f = json::array();
      for (std::size_t c = 0; c < vars.size(); ++c) f.push_back(c == i ? vars[j] : "0");
      fields.push_back(f);
    }
  return fields;
}

json cross_ratio_rule(const std::string& v) {
  const auto x0 = slot(v, 0), x1 = slot(v, 1), x2 = slot(v, 2), x3 = slot(v, 3);
  const std::string psi = "((" + x0 + " - " + x1 + ")*(" + x2 + " - " + x3 + "))/((" + x0 + " - " + x3 + ")*(" + x2 +
                          " - " + x1 + "))";
  const std::string phi = "(k1*" + x3 + "*(" + x2 + " - " + x1 + ") - " + x1 + "*(" + x2 + " - " + x3 + "))/(k1*(" +
                          x2 + " - " + x1 + ") - (" + x2 + " - " + x3 + "))";
  return {{"name", "cross-ratio"}, {"m", 3}, {"psi", {psi}}, {"phi", {phi}}};
}

json riccati() {
  return {{"name", "riccati"},
          {"description", "Riccati equation x' = b1 + b2 x + b3 x^2 with b = (1, 0, 1); solutions tan(t + c)."},
          {"tasks", {"closure", "m", "verify", "superpose"}},
          {"chart", {"x"}},
          {"fields", {{"1"}, {"x"}, {"x^2"}}},
          {"coefficients", {"1", "0", "1"}},
          {"rule", cross_ratio_rule("x")},
          {"t_span", {0, 1.2}},
          {"x0", {0}},
          {"particular", {{-1}, {0.25}, {-3}}},
          {"expect", {{"closed", true}, {"dimension", 3}, {"m", 3}}}};
}

json linear2() {
  const std::vector<std::string> vars{"x", "y"};
  return {{"name", "linear2"},
          {"description", "Homogeneous linear system on R^2; two solutions and linear superposition."},
          {"tasks", {"closure", "m", "verify", "superpose"}},
          {"chart", vars},
          {"fields", gl_fields(vars)},
          {"coefficients", {"cos(t)", "1", "-t", "1/2"}},
          {"rule", linear_rule(vars)},
          {"t_span", {0, 2}},
          {"x0", {0.3, -0.7}},
          {"particular", {{1, 0}, {0, 1}}},
          {"expect", {{"closed", true}, {"dimension", 4}, {"m", 2}}}};
}

json linear_n() {
  const std::vector<std::string> vars{"x", "y", "z"};
  return {{"name", "linear_n"},
          {"description", "Homogeneous linear system on R^3; three solutions and linear superposition."},
          {"tasks", {"closure", "m", "verify", "superpose"}},
          {"chart", vars},
          {"fields", gl_fields(vars)},
          {"coefficients", {"sin(t)", "1", "0", "-1", "cos(t)", "t/2", "0", "1/3", "-t"}},
          {"rule", linear_rule(vars)},
          {"t_span", {0, 1.5}},
          {"x0", {0.2, -0.5, 1.1}},
          {"particular", {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
          {"expect", {{"closed", true}, {"dimension", 9}, {"m", 3}}}};
}

json euclidean_se2() {
  return {{"name", "euclidean_se2"},
          {"description",
           "x' = a12 y + b1, y' = -a12 x + b2: a Euclidean-group system with m = 2 and the distances to two "
           "particular solutions as first integrals."},
          {"tasks", {"closure", "m", "verify", "superpose"}},
          {"chart", {"x", "y"}},
          {"fields", json::array({json::array({"1", "0"}), json::array({"0", "1"}), json::array({"y", "-x"})})},
          {"coefficients", {"cos(2*t)", "sin(t)/2", "1 + sin(3*t)/3"}},
          {"rule",
           {{"name", "distances"},
            {"m", 2},
            {"psi", {"(x_0 - x_1)^2 + (y_0 - y_1)^2", "(x_0 - x_2)^2 + (y_0 - y_2)^2"}}}},
          {"t_span", {0, 3}},
          {"x0", {0.4, 0.9}},
          {"particular", {{-1, 0.2}, {1.3, -0.6}}},
          {"expect", {{"closed", true}, {"dimension", 3}, {"m", 2}}}};
}

json separable_invsq() {
  return {{"name", "separable_invsq"},
          {"description",
           "Separable equation x' = a(t)/x^2. The leaves are x_0^3 - x_1^3 = k; the rule x = x_1/(1 - k x_1) "
           "is kept as a second rule and fails tangency for this field."},
          {"tasks", {"closure", "m", "verify", "superpose"}},
          {"chart", {"x"}},
          {"fields", {{"1/x^2"}}},
          {"coefficients", {"1 + t/2"}},
          {"rules",
           {{{"name", "cubic"}, {"m", 1}, {"psi", {"x_0^3 - x_1^3"}}},
            {{"name", "reciprocal"},
             {"m", 1},
             {"psi", {"-1/x_0 + 1/x_1"}},
             {"phi", {"x_1/(1 - k1*x_1)"}},
             {"expect_tangent", false}}}},
          {"t_span", {0, 1}},
          {"x0", {1}},
          {"particular", {{1.5}}},
          {"expect", {{"closed", true}, {"dimension", 1}, {"m", 1}}}};
}

json translation_nonunique() {
  return {{"name", "translation_nonunique"},
          {"description",
           "x' = a(t), y' = 0: horizontal translations. Two different rules (y_0 - y_1 and y_0^3 + y_0 - y_1 "
           "in the second component) reconstruct the same solution."},
          {"tasks", {"closure", "m", "verify", "superpose"}},
          {"chart", {"x", "y"}},
          {"fields", json::array({json::array({"1", "0"})})},
          {"coefficients", {"cos(t)"}},
          {"rules",
           {{{"name", "standard"}, {"m", 1}, {"psi", {"x_0 - x_1", "y_0 - y_1"}}, {"phi", {"x_1 + k1", "y_1 + k2"}}},
            {{"name", "cubic"}, {"m", 1}, {"psi", {"x_0 - x_1", "y_0^3 + y_0 - y_1"}}}}},
          {"t_span", {0, 2}},
          {"x0", {1, 2}},
          {"particular", {{0.5, -1}}},
          {"expect", {{"closed", true}, {"dimension", 1}, {"m", 1}}}};
}

json sl2_group() {
  return {{"name", "sl2_group"},
          {"description",
           "The Riccati equation x' = 1 + (sin t / 2) x + x^2 solved through the SL(2, R) group equation and "
           "the Mobius action, across a pole of the solution."},
          {"tasks", {"closure", "group"}},
          {"chart", {"x"}},
          {"fields", {{"1"}, {"x"}, {"x^2"}}},
          {"coefficients", {"1", "sin(t)/2", "1"}},
          {"action", {{"name", "mobius"}, {"x0", {0.3}}, {"equivariance", {0, 1}}}},
          {"t_span", {0, 2.5}},
          {"expect", {{"closed", true}, {"dimension", 3}}}};
}

json pde_riccati() {
  return {{"name", "pde_riccati"},
          {"description",
           "The flat Riccati PDE system u_x = x u^2, u_y = y u^2, solved on a grid and by the cross-ratio rule "
           "from three particular solutions."},
          {"tasks", {"pde_check", "pde_solve", "pde_superpose"}},
          {"rule", cross_ratio_rule("u")},
          {"pde",
           {{"parameters", {"x", "y"}},
            {"chart", {"u"}},
            {"fields", {{"x*u^2"}, {"y*u^2"}}},
            {"decomposition", {{"basis", {{"1"}, {"u"}, {"u^2"}}}, {"u", {{"0", "0", "x"}, {"0", "0", "y"}}}}},
            {"x0", {0.7}},
            {"base", {0, 0}},
            {"target", {0.5, 0.5}},
            {"axes", {{0, 0.5, 11}, {0, 0.5, 11}}},
            {"particular", {{0.1}, {0.4}, {-0.6}}}}},
          {"expect", {{"flat", true}}}};
}

json lemma_counterexample() {
  return {{"name", "lemma_counterexample"},
          {"description",
           "x_0 x_1 X1~ - (x_0 + x_1) X2~ for X1 = d/dx, X2 = x d/dx is the diagonal prolongation of "
           "-x^2 d/dx, yet it is not a constant combination of X1~ and X2~."},
          {"tasks", {"prolongation"}},
          {"chart", {"x"}},
          {"fields", {{"1"}, {"x"}}},
          {"prolongation",
           {{"copies", 2},
            {"terms", {{{"coefficient", "x_0*x_1"}, {"field", 0}}, {{"coefficient", "-(x_0 + x_1)"}, {"field", 1}}}}}},
          {"expect", {{"base", {"-x^2"}}, {"in_span", false}}}};
}

json partial_linear_rank1() {
  const std::vector<std::string> vars{"x", "y"};
  return {{"name", "partial_linear_rank1"},
          {"description", "Rank-one partial rule x = k x_1 for solutions proportional to a particular one."},
          {"tasks", {"verify", "superpose"}},
          {"chart", vars},
          {"fields", gl_fields(vars)},
          {"coefficients", {"cos(t)", "1", "-t", "1/2"}},
          {"rule",
           {{"name", "proportional"},
            {"m", 1},
            {"psi", {"x_0/x_1"}},
            {"phi", {"k1*x_1", "k1*y_1"}},
            {"constraints", {"x_0*y_1 - y_0*x_1"}}}},
          {"t_span", {0, 1}},
          {"x0", {2, 1}},
          {"particular", {{1, 0.5}}}};
}

json partial_linear_rank1_m2() {
  const std::vector<std::string> vars{"x", "y"};
  return {{"name", "partial_linear_rank1_m2"},
          {"description", "Rank-one partial rule x = x_1 + k x_2 on the line through x_1 in the direction x_2."},
          {"tasks", {"verify", "superpose"}},
          {"chart", vars},
          {"fields", gl_fields(vars)},
          {"coefficients", {"cos(t)", "1", "-t", "1/2"}},
          {"rule",
           {{"name", "affine line"},
            {"m", 2},
            {"psi", {"(x_0 - x_1)/x_2"}},
            {"phi", {"x_1 + k1*x_2", "y_1 + k1*y_2"}},
            {"constraints", {"x_2*(y_0 - y_1) - y_2*(x_0 - x_1)"}}}},
          {"t_span", {0, 1}},
          {"x0", {1.15, 0.5}},
          {"particular", {{1, 0}, {0.3, 1}}}};
}

const std::vector<std::pair<std::string, std::function<json()>>>& entries() {
  static const std::vector<std::pair<std::string, std::function<json()>>> list{
      {"riccati", riccati},
      {"linear2", linear2},
      {"linear_n", linear_n},
      {"euclidean_se2", euclidean_se2},
      {"separable_invsq", separable_invsq},
      {"translation_nonunique", translation_nonunique},
      {"sl2_group", sl2_group},
      {"pde_riccati", pde_riccati},
      {"lemma_counterexample", lemma_counterexample},
      {"partial_linear_rank1", partial_linear_rank1},
      {"partial_linear_rank1_m2", partial_linear_rank1_m2},
  };
  return list;
}

}  // namespace

std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  for (const auto& [name, _] : entries()) out.push_back(name);
  return out;
}

json catalog_document(const std::string& name) {
  for (const auto& [n, make] : entries())
    if (n == name) return make();
  throw std::out_of_range("no example named '" + name + "'");
}

Problem catalog_problem(const std::string& name) { return parse_problem(catalog_document(name)); }

bool RunAllResult::pass() const {
  for (const auto& r : reports)
    if (!r.pass()) return false;
  return !reports.empty();
}

RunAllResult run_catalog(const Settings& settings) {
  const auto names = catalog_names();
  const std::uint64_t master = settings.seed.value_or(kDefaultSeed);
  RunAllResult out;
  out.reports.resize(names.size());
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(names.size(), [&](std::size_t i) {
    Settings s = settings;
    s.seed = derive_seed(master, i);
    try {
      out.reports[i] = run_problem(catalog_problem(names[i]), s);
    } catch (const std::exception& e) {
      out.reports[i].command = "run";
      out.reports[i].problem = names[i];
      out.reports[i].error = e.what();
      out.reports[i].settings = {{"tol", s.tol.value_or(1e-9)},
                                 {"tol_const", s.tol_const.value_or(1e-6)},
                                 {"seed", *s.seed},
                                 {"t_span", {0.0, 1.0}},
                                 {"samples", s.samples.value_or(32)}};
    }
  });
  out.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace liesys
