#include "liesys/problem.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace liesys {

using nlohmann::json;

namespace {

const std::set<std::string> kTasks{"closure", "m",     "solve",     "verify",    "superpose",   "group",
                                   "pde_check", "pde_solve", "pde_superpose", "prolongation"};

// Reads an object while recording which keys were consumed; finish() rejects
// the rest.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw SchemaError(path_, "missing required key '" + key + "'");
    return j_.at(key);
  }
  std::string child(const std::string& key) const { return path_ + "." + key; }
  const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw SchemaError(path_, "unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw SchemaError(path, "expected a string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

// Expressions may be written as strings or plain numbers.
std::string as_expr(const json& j, const std::string& path) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << j.get<double>();
    return os.str();
  }
  throw SchemaError(path, "expected an expression string");
}

template <class T, class F>
std::vector<T> as_array(const json& j, const std::string& path, F&& element) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  std::vector<T> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(element(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> strings(const json& j, const std::string& path) {
  return as_array<std::string>(j, path, as_string);
}
std::vector<std::string> exprs(const json& j, const std::string& path) {
  return as_array<std::string>(j, path, as_expr);
}
std::vector<std::vector<std::string>> expr_rows(const json& j, const std::string& path) {
  return as_array<std::vector<std::string>>(j, path, exprs);
}
std::vector<double> numbers(const json& j, const std::string& path) {
  return as_array<double>(j, path, as_number);
}
std::vector<std::vector<double>> number_rows(const json& j, const std::string& path) {
  return as_array<std::vector<double>>(j, path, numbers);
}

RuleSpec parse_rule(const json& j, const std::string& path) {
  Reader r(j, path);
  RuleSpec rule;
  if (r.has("name")) rule.name = as_string(r.at("name"), r.child("name"));
  const json& m = r.at("m");
  if (!m.is_number_integer() || m.get<int>() < 1) throw SchemaError(r.child("m"), "expected a positive integer");
  rule.m = m.get<int>();
  rule.psi = exprs(r.at("psi"), r.child("psi"));
  if (r.has("phi")) rule.phi = exprs(r.at("phi"), r.child("phi"));
  if (r.has("constraints")) rule.constraints = exprs(r.at("constraints"), r.child("constraints"));
  if (r.has("expect_tangent")) {
    if (!r.at("expect_tangent").is_boolean()) throw SchemaError(r.child("expect_tangent"), "expected a boolean");
    rule.expect_tangent = r.at("expect_tangent").get<bool>();
  }
  r.finish();
  return rule;
}

ActionSpec parse_action(const json& j, const std::string& path) {
  Reader r(j, path);
  ActionSpec a;
  a.name = as_string(r.at("name"), r.child("name"));
  if (a.name != "linear" && a.name != "mobius") throw SchemaError(r.child("name"), "expected 'linear' or 'mobius'");
  if (r.has("matrix")) a.matrix = exprs(r.at("matrix"), r.child("matrix"));
  a.x0 = numbers(r.at("x0"), r.child("x0"));
  if (r.has("equivariance")) a.equivariance = numbers(r.at("equivariance"), r.child("equivariance"));
  r.finish();
  return a;
}

PdeSpec parse_pde(const json& j, const std::string& path) {
  Reader r(j, path);
  PdeSpec p;
  p.parameters = strings(r.at("parameters"), r.child("parameters"));
  p.chart = strings(r.at("chart"), r.child("chart"));
  p.fields = expr_rows(r.at("fields"), r.child("fields"));
  if (r.has("decomposition")) {
    Reader d(r.at("decomposition"), r.child("decomposition"));
    p.u = expr_rows(d.at("u"), d.child("u"));
    p.basis = expr_rows(d.at("basis"), d.child("basis"));
    d.finish();
  }
  p.x0 = numbers(r.at("x0"), r.child("x0"));
  if (r.has("base")) p.base = numbers(r.at("base"), r.child("base"));
  else p.base.assign(p.parameters.size(), 0.0);
  if (r.has("target")) p.target = numbers(r.at("target"), r.child("target"));
  if (r.has("axes")) {
    for (const auto& row : number_rows(r.at("axes"), r.child("axes"))) {
      if (row.size() != 3 || row[2] < 1 || row[2] != static_cast<int>(row[2]))
        throw SchemaError(r.child("axes"), "each axis is [lo, hi, count]");
      p.axes.push_back({row[0], row[1], row[2]});
    }
  }
  if (r.has("particular")) p.particular = number_rows(r.at("particular"), r.child("particular"));
  r.finish();
  if (p.base.size() != p.parameters.size()) throw SchemaError(path + ".base", "needs one entry per parameter");
  if (!p.target.empty() && p.target.size() != p.parameters.size())
    throw SchemaError(path + ".target", "needs one entry per parameter");
  if (!p.axes.empty() && p.axes.size() != p.parameters.size())
    throw SchemaError(path + ".axes", "needs one axis per parameter");
  return p;
}

ProlongationSpec parse_prolongation(const json& j, const std::string& path) {
  Reader r(j, path);
  ProlongationSpec p;
  const json& copies = r.at("copies");
  if (!copies.is_number_integer() || copies.get<int>() < 1) throw SchemaError(r.child("copies"), "expected a positive integer");
  p.copies = copies.get<int>();
  const json& terms = r.at("terms");
  if (!terms.is_array()) throw SchemaError(r.child("terms"), "expected an array");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    Reader t(terms[i], r.child("terms") + "[" + std::to_string(i) + "]");
    const json& field = t.at("field");
    if (!field.is_number_integer() || field.get<long long>() < 0) throw SchemaError(t.child("field"), "expected an index");
    p.terms.emplace_back(as_expr(t.at("coefficient"), t.child("coefficient")), field.get<std::size_t>());
    t.finish();
  }
  r.finish();
  return p;
}

Expectation parse_expect(const json& j, const std::string& path) {
  Reader r(j, path);
  Expectation e;
  auto boolean = [&](const char* key, std::optional<bool>& out) {
    if (!r.has(key)) return;
    if (!r.at(key).is_boolean()) throw SchemaError(r.child(key), "expected a boolean");
    out = r.at(key).get<bool>();
  };
  auto integer = [&](const char* key, std::optional<int>& out) {
    if (!r.has(key)) return;
    if (!r.at(key).is_number_integer()) throw SchemaError(r.child(key), "expected an integer");
    out = r.at(key).get<int>();
  };
  boolean("closed", e.closed);
  integer("dimension", e.dimension);
  integer("m", e.m);
  boolean("flat", e.flat);
  boolean("in_span", e.in_span);
  if (r.has("base")) e.base = exprs(r.at("base"), r.child("base"));
  r.finish();
  return e;
}

}  // namespace

Problem parse_problem(const json& doc) {
  Reader r(doc, "$");
  Problem p;
  if (r.has("name")) p.name = as_string(r.at("name"), "$.name");
  if (r.has("description")) p.description = as_string(r.at("description"), "$.description");
  if (r.has("tasks")) {
    p.tasks = strings(r.at("tasks"), "$.tasks");
    for (const auto& t : p.tasks)
      if (!kTasks.count(t)) throw SchemaError("$.tasks", "unknown task '" + t + "'");
  }
  if (r.has("chart")) p.chart = strings(r.at("chart"), "$.chart");
  if (r.has("fields")) p.fields = expr_rows(r.at("fields"), "$.fields");
  if (r.has("coefficients")) p.coefficients = exprs(r.at("coefficients"), "$.coefficients");
  if (r.has("rule")) p.rules.push_back(parse_rule(r.at("rule"), "$.rule"));
  if (r.has("rules")) {
    const json& rules = r.at("rules");
    if (!rules.is_array()) throw SchemaError("$.rules", "expected an array");
    for (std::size_t i = 0; i < rules.size(); ++i)
      p.rules.push_back(parse_rule(rules[i], "$.rules[" + std::to_string(i) + "]"));
  }
  if (r.has("action")) p.action = parse_action(r.at("action"), "$.action");
  if (r.has("pde")) p.pde = parse_pde(r.at("pde"), "$.pde");
  if (r.has("prolongation")) p.prolongation = parse_prolongation(r.at("prolongation"), "$.prolongation");
  if (r.has("t_span")) {
    auto span = numbers(r.at("t_span"), "$.t_span");
    if (span.size() != 2 || !(span[1] >= span[0])) throw SchemaError("$.t_span", "expected [t0, t1] with t1 >= t0");
    p.t_span = std::pair{span[0], span[1]};
  }
  auto positive = [&](const char* key, std::optional<double>& out) {
    if (!r.has(key)) return;
    const double v = as_number(r.at(key), std::string("$.") + key);
    if (!(v > 0)) throw SchemaError(std::string("$.") + key, "must be positive");
    out = v;
  };
  positive("tol", p.tol);
  positive("tol_const", p.tol_const);
  if (r.has("seed")) {
    const json& s = r.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw SchemaError("$.seed", "expected a non-negative integer");
    p.seed = s.get<std::uint64_t>();
  }
  if (r.has("m")) {
    const json& m = r.at("m");
    if (!m.is_number_integer() || m.get<int>() < 1) throw SchemaError("$.m", "expected a positive integer");
    p.m = m.get<int>();
  }
  if (r.has("k")) p.k = numbers(r.at("k"), "$.k");
  if (r.has("x0")) p.x0 = numbers(r.at("x0"), "$.x0");
  if (r.has("particular")) p.particular = number_rows(r.at("particular"), "$.particular");
  if (r.has("expect")) p.expect = parse_expect(r.at("expect"), "$.expect");
  r.finish();

  if (!p.fields.empty() && p.chart.empty()) throw SchemaError("$.chart", "fields need a chart");
  for (std::size_t i = 0; i < p.fields.size(); ++i)
    if (p.fields[i].size() != p.chart.size())
      throw SchemaError("$.fields[" + std::to_string(i) + "]", "expected " + std::to_string(p.chart.size()) + " components");
  if (p.x0 && !p.chart.empty() && p.x0->size() != p.chart.size())
    throw SchemaError("$.x0", "expected " + std::to_string(p.chart.size()) + " coordinates");
  if (p.particular)
    for (std::size_t i = 0; i < p.particular->size(); ++i)
      if ((*p.particular)[i].size() != p.chart.size())
        throw SchemaError("$.particular[" + std::to_string(i) + "]", "wrong number of coordinates");
  return p;
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "cannot open file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path, std::string("invalid JSON: ") + e.what());
  }
  return parse_problem(doc);
}

json to_json(const Problem& p) {
  json j = json::object();
  if (!p.name.empty()) j["name"] = p.name;
  if (!p.description.empty()) j["description"] = p.description;
  if (!p.tasks.empty()) j["tasks"] = p.tasks;
  if (!p.chart.empty()) j["chart"] = p.chart;
  if (!p.fields.empty()) j["fields"] = p.fields;
  if (!p.coefficients.empty()) j["coefficients"] = p.coefficients;
  if (!p.rules.empty()) {
    json rules = json::array();
    for (const auto& r : p.rules) {
      json jr{{"m", r.m}, {"psi", r.psi}};
      if (!r.name.empty()) jr["name"] = r.name;
      if (r.phi) jr["phi"] = *r.phi;
      if (!r.constraints.empty()) jr["constraints"] = r.constraints;
      if (!r.expect_tangent) jr["expect_tangent"] = false;
      rules.push_back(std::move(jr));
    }
    j["rules"] = std::move(rules);
  }
  if (p.action) {
    json a{{"name", p.action->name}, {"x0", p.action->x0}};
    if (p.action->matrix) a["matrix"] = *p.action->matrix;
    if (p.action->equivariance) a["equivariance"] = *p.action->equivariance;
    j["action"] = std::move(a);
  }
  if (p.pde) {
    const auto& s = *p.pde;
    json d{{"parameters", s.parameters}, {"chart", s.chart}, {"fields", s.fields}, {"x0", s.x0}, {"base", s.base}};
    if (s.u) d["decomposition"] = {{"u", *s.u}, {"basis", *s.basis}};
    if (!s.target.empty()) d["target"] = s.target;
    if (!s.axes.empty()) d["axes"] = s.axes;
    if (!s.particular.empty()) d["particular"] = s.particular;
    j["pde"] = std::move(d);
  }
  if (p.prolongation) {
    json terms = json::array();
    for (const auto& [c, f] : p.prolongation->terms) terms.push_back({{"coefficient", c}, {"field", f}});
    j["prolongation"] = {{"copies", p.prolongation->copies}, {"terms", terms}};
  }
  if (p.t_span) j["t_span"] = {p.t_span->first, p.t_span->second};
  if (p.tol) j["tol"] = *p.tol;
  if (p.tol_const) j["tol_const"] = *p.tol_const;
  if (p.seed) j["seed"] = *p.seed;
  if (p.m) j["m"] = *p.m;
  if (p.k) j["k"] = *p.k;
  if (p.x0) j["x0"] = *p.x0;
  if (p.particular) j["particular"] = *p.particular;
  json e = json::object();
  if (p.expect.closed) e["closed"] = *p.expect.closed;
  if (p.expect.dimension) e["dimension"] = *p.expect.dimension;
  if (p.expect.m) e["m"] = *p.expect.m;
  if (p.expect.flat) e["flat"] = *p.expect.flat;
  if (p.expect.base) e["base"] = *p.expect.base;
  if (p.expect.in_span) e["in_span"] = *p.expect.in_span;
  if (!e.empty()) j["expect"] = std::move(e);
  return j;
}

// ---------------------------------------------------------------------------
// Construction

Chart problem_chart(const Problem& p) {
  if (p.chart.empty()) throw SchemaError("$.chart", "the problem has no chart");
  return Chart(p.chart);
}

std::vector<VectorField> problem_fields(const Problem& p) {
  if (p.fields.empty()) throw SchemaError("$.fields", "the problem has no fields");
  const Chart chart = problem_chart(p);
  std::vector<VectorField> out;
  for (const auto& f : p.fields) out.push_back(VectorField::parse(chart, f));
  return out;
}

LieSystem problem_system(const Problem& p) {
  auto fields = problem_fields(p);
  if (p.coefficients.size() != fields.size())
    throw SchemaError("$.coefficients", "expected " + std::to_string(fields.size()) + " coefficient curves");
  std::vector<CoefficientCurve> coeffs;
  for (const auto& c : p.coefficients) coeffs.push_back(CoefficientCurve::parse(c));
  return LieSystem(std::move(fields), std::move(coeffs));
}

SuperpositionRule problem_rule(const Problem& p, const RuleSpec& rule) {
  return SuperpositionRule(problem_chart(p), rule.m, rule.psi, rule.phi, rule.constraints);
}

PdeSystem problem_pde(const PdeSpec& spec) {
  const Chart params(spec.parameters), chart(spec.chart);
  auto sys = PdeSystem::parse(params, chart, spec.fields);
  if (!spec.u) return sys;
  LieDecomposition d;
  for (const auto& b : *spec.basis) d.basis.push_back(VectorField::parse(chart, b));
  for (const auto& row : *spec.u) {
    std::vector<Expr> r;
    for (const auto& e : row) r.push_back(parse(e, params));
    d.u.push_back(std::move(r));
  }
  return PdeSystem(params, chart, sys.fields(), std::move(d));
}

MatrixCurve problem_matrix_curve(const Problem& p) {
  if (p.action && p.action->matrix) {
    const std::size_t size = p.action->matrix->size();
    std::size_t d = 1;
    while (d * d < size) ++d;
    if (d * d != size) throw SchemaError("$.action.matrix", "expected d*d entries");
    return MatrixCurve::from_entries(d, *p.action->matrix);
  }
  if (p.coefficients.size() != 3)
    throw SchemaError("$.coefficients", "an sl(2) curve needs three coefficients b1, b2, b3");
  return MatrixCurve::sl2(CoefficientCurve::parse(p.coefficients[0]), CoefficientCurve::parse(p.coefficients[1]),
                          CoefficientCurve::parse(p.coefficients[2]));
}

std::vector<std::vector<double>> pde_axes(const PdeSpec& spec) {
  std::vector<std::vector<double>> axes;
  for (const auto& [lo, hi, count] : spec.axes) {
    const int n = static_cast<int>(count);
    std::vector<double> ax(n);
    for (int i = 0; i < n; ++i) ax[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    axes.push_back(std::move(ax));
  }
  return axes;
}

}  // namespace liesys
