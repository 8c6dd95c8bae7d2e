#include "liesys/catalog.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace liesys;

namespace {

std::vector<std::string> components(const VectorField& x) {
  std::vector<std::string> out;
  for (const auto& c : x.components()) out.push_back(c.canonical_str());
  return out;
}

std::vector<VectorField> fields_of(const Chart& chart, const std::vector<std::vector<std::string>>& fields) {
  std::vector<VectorField> out;
  for (const auto& f : fields) out.push_back(VectorField::parse(chart, f));
  return out;
}

Settings make_settings(std::optional<double> tol, std::optional<double> tol_const, std::optional<std::uint64_t> seed,
                       std::optional<std::pair<double, double>> t_span, bool complete, std::optional<int> samples,
                       std::optional<std::vector<double>> k) {
  Settings s;
  s.tol = tol;
  s.tol_const = tol_const;
  s.seed = seed;
  s.t_span = t_span;
  s.complete = complete;
  s.samples = samples;
  s.k = std::move(k);
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Lie systems: closure, superposition rules, group and PDE solvers";
  m.attr("__version__") = kVersion;

  auto schema_error = py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ExprParseError", PyExc_ValueError);
  (void)schema_error;

  m.def(
      "simplify", [](const std::string& text, const std::vector<std::string>& chart) {
        return parse(text, Chart(chart)).canonical_str();
      },
      py::arg("expr"), py::arg("chart"));
  m.def(
      "derivative",
      [](const std::string& text, const std::string& var, const std::vector<std::string>& chart) {
        return differentiate(parse(text, Chart(chart)), var).canonical_str();
      },
      py::arg("expr"), py::arg("variable"), py::arg("chart"));
  m.def(
      "evaluate",
      [](const std::string& text, const std::vector<std::string>& chart, const std::map<std::string, double>& point) {
        return evaluate(parse(text, Chart(chart)), point);
      },
      py::arg("expr"), py::arg("chart"), py::arg("point"));

  m.def(
      "lie_bracket",
      [](const std::vector<std::string>& chart, const std::vector<std::string>& x, const std::vector<std::string>& y) {
        const Chart c(chart);
        return components(lie_bracket(VectorField::parse(c, x), VectorField::parse(c, y)));
      },
      py::arg("chart"), py::arg("x"), py::arg("y"));
  m.def(
      "diagonal_prolongation",
      [](const std::vector<std::string>& chart, const std::vector<std::string>& x, int copies) {
        const ProductChart p(Chart(chart), copies);
        return py::make_tuple(p.chart().names(), components(diagonal_prolongation(VectorField::parse(Chart(chart), x), p)));
      },
      py::arg("chart"), py::arg("field"), py::arg("copies"));

  m.def(
      "closure",
      [](const std::vector<std::string>& chart, const std::vector<std::vector<std::string>>& fields, bool complete) {
        const auto r = closure_test(fields_of(Chart(chart), fields), {.complete = complete});
        py::dict out;
        out["closed"] = r.closed;
        out["dimension"] = r.basis.size();
        py::list basis;
        for (const auto& b : r.basis) basis.append(components(b));
        out["basis"] = basis;
        py::dict constants;
        if (r.closed)
          for (std::size_t a = 0; a < r.constants.size(); ++a)
            for (std::size_t b = a + 1; b < r.constants.size(); ++b)
              for (std::size_t g = 0; g < r.constants.size(); ++g)
                if (r.constants[a][b][g] != 0)
                  constants[py::make_tuple(a, b, g)] = py::module_::import("fractions").attr("Fraction")(
                      r.constants[a][b][g].get_str());
        out["constants"] = constants;
        out["witness"] = r.witness ? py::cast(components(r.witness->bracket)) : py::none();
        out["jacobi_residual"] = r.jacobi_residual.get_d();
        return out;
      },
      py::arg("chart"), py::arg("fields"), py::arg("complete") = false);

  m.def(
      "minimal_m",
      [](const std::vector<std::string>& chart, const std::vector<std::vector<std::string>>& fields, std::uint64_t seed,
         int samples) {
        SamplingOptions opts;
        opts.seed = seed;
        opts.samples = samples;
        const auto r = minimal_m(fields_of(Chart(chart), fields), opts);
        py::dict out;
        out["m"] = r.m;
        out["r"] = r.r;
        out["n"] = r.n;
        out["rank_profile"] = r.rank_profile;
        out["consistent"] = r.consistent;
        return out;
      },
      py::arg("chart"), py::arg("fields"), py::arg("seed") = kDefaultSeed, py::arg("samples") = 32);

  m.def(
      "integrate",
      [](const std::vector<std::string>& chart, const std::vector<std::vector<std::string>>& fields,
         const std::vector<std::string>& coefficients, const std::vector<double>& x0, std::pair<double, double> t_span,
         double tol, std::vector<double> grid) {
        std::vector<CoefficientCurve> b;
        for (const auto& c : coefficients) b.push_back(CoefficientCurve::parse(c));
        const LieSystem sys(fields_of(Chart(chart), fields), std::move(b));
        IntegrateOptions opts;
        opts.tol = tol;
        opts.grid = std::move(grid);
        Trajectory tr;
        {
          py::gil_scoped_release release;
          tr = integrate(sys, x0, t_span, opts);
        }
        py::array_t<double> t(tr.size());
        py::array_t<double> x({tr.size(), x0.size()});
        auto tv = t.mutable_unchecked<1>();
        auto xv = x.mutable_unchecked<2>();
        for (std::size_t j = 0; j < tr.size(); ++j) {
          tv(j) = tr.t[j];
          for (std::size_t i = 0; i < x0.size(); ++i) xv(j, i) = tr.x[j][i];
        }
        return py::make_tuple(t, x, tr.truncated());
      },
      py::arg("chart"), py::arg("fields"), py::arg("coefficients"), py::arg("x0"), py::arg("t_span"),
      py::arg("tol") = 1e-9, py::arg("grid") = std::vector<double>{});

  m.def(
      "run",
      [](const std::string& problem_json, std::optional<std::string> task, std::optional<double> tol,
         std::optional<double> tol_const, std::optional<std::uint64_t> seed,
         std::optional<std::pair<double, double>> t_span, bool complete, std::optional<int> samples,
         std::optional<std::vector<double>> k) {
        nlohmann::json doc;
        try {
          doc = nlohmann::json::parse(problem_json);
        } catch (const nlohmann::json::parse_error& e) {
          throw SchemaError("$", e.what());
        }
        const auto p = parse_problem(doc);
        const auto s = make_settings(tol, tol_const, seed, t_span, complete, samples, std::move(k));
        py::gil_scoped_release release;
        return (task ? run_task(*task, p, s) : run_problem(p, s)).to_json().dump();
      },
      py::arg("problem_json"), py::arg("task") = py::none(), py::arg("tol") = py::none(),
      py::arg("tol_const") = py::none(), py::arg("seed") = py::none(), py::arg("t_span") = py::none(),
      py::arg("complete") = false, py::arg("samples") = py::none(), py::arg("k") = py::none());

  m.def("catalog_names", &catalog_names);
  m.def(
      "catalog_document", [](const std::string& name) { return catalog_document(name).dump(); }, py::arg("name"));
  m.def(
      "run_catalog",
      [](std::optional<std::uint64_t> seed) {
        Settings s;
        s.seed = seed;
        RunAllResult r;
        {
          py::gil_scoped_release release;
          r = run_catalog(s);
        }
        nlohmann::ordered_json j;
        j["verdict"] = r.pass() ? "PASS" : "FAIL";
        j["runtime_ms"] = r.runtime_ms;
        j["reports"] = nlohmann::ordered_json::array();
        for (const auto& rep : r.reports) j["reports"].push_back(rep.to_json());
        return j.dump();
      },
      py::arg("seed") = py::none());
}
