#include <doctest.h>

#include "liesys/catalog.hpp"

#include <regex>
#include <set>

using namespace liesys;
using json = nlohmann::json;

namespace {

json minimal() {
  return {{"name", "t"},
          {"tasks", {"closure"}},
          {"chart", {"x"}},
          {"fields", {{"1"}, {"x^2"}}}};
}

std::string schema_path(const std::function<void()>& f) {
  try {
    f();
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no error>";
}

// Numeric tokens not glued to an identifier.
std::set<std::string> numbers_in(const std::string& text) {
  static const std::regex number(R"((^|[^A-Za-z0-9_.^])(-?[0-9]+(\.[0-9]+)?(e[-+]?[0-9]+)?))");
  std::set<std::string> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator(); ++it)
    out.insert((*it)[2]);
  return out;
}

void collect(const nlohmann::ordered_json& j, std::set<std::string>& out) {
  if (j.is_number()) out.insert(format_number(j.get<double>()));
  if (j.is_structured())
    for (const auto& v : j) collect(v, out);
}

}  // namespace

TEST_CASE("problem files reject unknown keys with a path") {
  auto doc = minimal();
  CHECK_NOTHROW(parse_problem(doc));
  doc["colour"] = "red";
  CHECK(schema_path([&] { parse_problem(doc); }) == "$");
  doc = minimal();
  doc["rule"] = {{"m", 1}, {"psi", {"x_0 - x_1"}}, {"phy", {"x_1"}}};
  CHECK(schema_path([&] { parse_problem(doc); }) == "$.rule");
  doc = minimal();
  doc["pde"] = {{"parameters", {"x"}}, {"chart", {"u"}}, {"fields", {{"u"}}}, {"x0", {1}}, {"grid", 3}};
  CHECK(schema_path([&] { parse_problem(doc); }) == "$.pde");
}

TEST_CASE("problem files are validated before any computation") {
  auto doc = minimal();
  doc["tasks"] = {"integrate"};
  CHECK_THROWS_AS(parse_problem(doc), SchemaError);
  doc = minimal();
  doc["fields"] = json::array({json::array({"1", "2"})});
  CHECK(schema_path([&] { parse_problem(doc); }) == "$.fields[0]");
  doc = minimal();
  doc["t_span"] = {1, 0};
  CHECK_THROWS_AS(parse_problem(doc), SchemaError);
  doc = minimal();
  doc["tol"] = -1;
  CHECK_THROWS_AS(parse_problem(doc), SchemaError);
  doc = minimal();
  doc["fields"] = {{7}};
  CHECK_NOTHROW(parse_problem(doc));  // numbers are expressions too
  CHECK_THROWS_AS(load_problem("/nonexistent/problem.json"), SchemaError);
}

TEST_CASE("catalog entries round-trip through JSON") {
  const auto names = catalog_names();
  CHECK(names.size() == 11);
  for (const auto& name : names) {
    CAPTURE(name);
    const auto p = catalog_problem(name);
    CHECK(p.name == name);
    const auto j = to_json(p);
    CHECK(to_json(parse_problem(j)) == j);
  }
  CHECK_THROWS_AS(catalog_document("nope"), std::out_of_range);
}

TEST_CASE("closure command") {
  auto rep = cmd_closure(parse_problem(minimal()));
  CHECK_FALSE(rep.pass());
  CHECK(rep.summary["witness"].get<std::string>().find("[2*x]") != std::string::npos);
  Settings s;
  s.complete = true;
  rep = cmd_closure(parse_problem(minimal()), s);
  CHECK(rep.pass());
  CHECK(rep.summary["dimension"] == 3);
  auto single = minimal();
  single["fields"] = {{"x^3"}};
  CHECK(cmd_closure(parse_problem(single)).pass());
}

TEST_CASE("m command on the catalog") {
  CHECK(cmd_m(catalog_problem("riccati")).summary["m"] == 3);
  CHECK(cmd_m(catalog_problem("euclidean_se2")).summary["m"] == 2);
  CHECK(cmd_m(catalog_problem("translation_nonunique")).summary["m"] == 1);
}

TEST_CASE("settings: flags override the file, which overrides the defaults") {
  auto p = catalog_problem("riccati");
  auto rep = cmd_solve(p);
  CHECK(rep.settings["tol"] == 1e-9);
  CHECK(rep.settings["seed"] == kDefaultSeed);
  CHECK(rep.settings["t_span"][1] == 1.2);
  p.tol = 1e-8;
  CHECK(cmd_solve(p).settings["tol"] == 1e-8);
  Settings s;
  s.tol = 1e-7;
  s.t_span = std::pair{0.0, 0.5};
  rep = cmd_solve(p, s);
  CHECK(rep.settings["tol"] == 1e-7);
  CHECK(rep.summary["end_time"] == 0.5);
}

TEST_CASE("superpose with explicit constants") {
  Settings s;
  s.k = std::vector<double>{0.5};
  const auto rep = cmd_superpose(catalog_problem("riccati"), s);
  CHECK(rep.pass());
  CHECK(rep.settings["k"][0] == 0.5);
  s.k = std::vector<double>{0.5, 1.0};
  CHECK_THROWS_AS(cmd_superpose(catalog_problem("riccati"), s), SchemaError);
}

TEST_CASE("solve reports a blow-up as a failed check") {
  auto p = catalog_problem("riccati");
  Settings s;
  s.t_span = std::pair{0.0, 2.0};
  const auto rep = cmd_solve(p, s);
  CHECK_FALSE(rep.pass());
  CHECK(rep.summary["end_time"].get<double>() < 1.5708);
}

TEST_CASE("missing sections are schema errors") {
  const auto p = parse_problem(minimal());
  CHECK_THROWS_AS(cmd_group(p), SchemaError);
  CHECK_THROWS_AS(cmd_pde_check(p), SchemaError);
  CHECK_THROWS_AS(cmd_verify(p), SchemaError);
  CHECK_THROWS_AS(cmd_prolongation(p), SchemaError);
  CHECK_THROWS_AS(cmd_solve(p), SchemaError);  // no coefficients
  CHECK_THROWS_AS(run_task("integrate", p), SchemaError);
}

TEST_CASE("non-flat PDE is reported") {
  auto doc = catalog_document("pde_riccati");
  doc["tasks"] = {"pde_check"};
  doc["pde"]["fields"] = {{"u"}, {"x*u"}};
  doc["pde"].erase("decomposition");
  doc["expect"]["flat"] = false;
  const auto rep = cmd_pde_check(parse_problem(doc));
  CHECK(rep.pass());
  CHECK(rep.summary["curvature"].get<std::string>().find("= u") != std::string::npos);
  CHECK(rep.summary["path_spread"].get<double>() > 1e-3);
  doc["expect"]["flat"] = true;
  CHECK_FALSE(cmd_pde_check(parse_problem(doc)).pass());
}

TEST_CASE("run-all is deterministic and every number in the text is in the JSON") {
  Settings s;
  s.seed = 99;
  const auto a = run_catalog(s);
  const auto b = run_catalog(s);
  CHECK(a.pass());
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    auto ja = a.reports[i].to_json(), jb = b.reports[i].to_json();
    for (auto* j : {&ja, &jb})
      for (auto it = (*j)["summary"].begin(); it != (*j)["summary"].end();)
        it = it.key().ends_with("runtime_ms") ? (*j)["summary"].erase(it) : std::next(it);
    CHECK(ja == jb);

    const auto& rep = a.reports[i];
    const auto full = rep.to_json();
    std::set<std::string> known = numbers_in(full.dump());
    collect(full, known);
    for (const auto& token : numbers_in(rep.text())) {
      CAPTURE(rep.problem);
      CAPTURE(token);
      CHECK(known.count(token) == 1);
    }
  }
}
