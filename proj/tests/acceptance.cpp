// Acceptance suite: one PASS/FAIL line per criterion.
//
// Criterion 6 as stated pairs the reciprocal rule with x' = a(t)/x^2, a
// pairing that is not a superposition rule. The line is printed as FAIL with
// the measured error; it is the only failure tolerated by the exit code.

#include "liesys/catalog.hpp"
#include "liesys/group.hpp"
#include "liesys/parallel.hpp"
#include "liesys/pde.hpp"
#include "liesys/superposition.hpp"

#include "generators.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

using namespace liesys;

namespace {

const Chart kX({"x"});
const Chart kXY({"x", "y"});

VectorField F(const Chart& c, std::vector<std::string> comps) { return VectorField::parse(c, comps); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return format_number(v); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Trajectory> solve_all(const LieSystem& sys, const std::vector<std::vector<double>>& starts,
                                  std::pair<double, double> span) {
  return integrate_tuple(sys, starts, span);
}

// Largest |rec - direct| over the reconstruction grid.
double max_abs_error(const Trajectory& rec, const Trajectory& direct) {
  double worst = 0;
  for (std::size_t j = 0; j < rec.size(); ++j) {
    const auto d = direct.at(rec.t[j]);
    for (std::size_t i = 0; i < d.size(); ++i) worst = std::max(worst, std::abs(rec.x[j][i] - d[i]));
  }
  return worst;
}

// "c0 + c1*sin(w*t + p)" with bounded random constants.
std::string random_curve(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(-1.0, 1.0), w(0.5, 3.0), ph(0.0, 3.0);
  std::ostringstream os;
  os.precision(6);
  os << c(rng) << " + " << c(rng) << "*sin(" << w(rng) << "*t + " << ph(rng) << ")";
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome c1_riccati_m() {
  const std::vector<VectorField> fields{F(kX, {"1"}), F(kX, {"x"}), F(kX, {"x^2"})};
  std::set<int> values;
  double slowest = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SamplingOptions opts;
    opts.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = minimal_m(fields, opts);
    slowest = std::max(slowest, seconds_since(t0));
    values.insert(r.consistent ? r.m : -1);
  }
  const bool ok = values == std::set<int>{3} && slowest < 1.0;
  return {ok, "m = " + std::to_string(*values.begin()) + " for seeds 1..10" + (values.size() > 1 ? " (unstable)" : "") +
                  ", slowest call " + fmt(slowest) + " s < 1 s"};
}

Outcome c2_euclidean() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<VectorField> fields{F(kXY, {"1", "0"}), F(kXY, {"0", "1"}), F(kXY, {"y", "-x"})};
  const auto m = minimal_m(fields);
  const SuperpositionRule rule(kXY, 2, {"(x_0 - x_1)^2 + (y_0 - y_1)^2", "(x_0 - x_2)^2 + (y_0 - y_2)^2"});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  double drift = 0;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<CoefficientCurve> b;
    for (int i = 0; i < 3; ++i) b.push_back(CoefficientCurve::parse(random_curve(rng)));
    const LieSystem sys(fields, b);
    std::vector<std::vector<double>> starts(3);
    for (auto& s : starts) s = {box(rng), box(rng)};
    const auto tuple = solve_all(sys, starts, {0.0, 5.0});
    drift = std::max(drift, verify_along_solutions(rule, sys, tuple, 1e-6).max_drift);
  }
  const double secs = seconds_since(t0);
  const bool ok = m.m == 2 && drift <= 1e-6 && secs < 5.0;
  return {ok, "m = " + std::to_string(m.m) + ", max drift of C1, C2 over 5 random b(t) = " + fmt(drift) +
                  " <= 1e-6, " + fmt(secs) + " s < 5 s"};
}

Outcome c3_lemma_counterexample() {
  const ProductChart product(kX, 2);
  const auto x1 = diagonal_prolongation(F(kX, {"1"}), product);
  const auto x2 = diagonal_prolongation(F(kX, {"x"}), product);
  const auto z = parse("x_0*x_1", product.chart()) * x1 - parse("x_0 + x_1", product.chart()) * x2;
  const auto check = is_diagonal_prolongation(z, product);
  const bool base_ok = check.is_prolongation && check.base && canonically_equal(*check.base, F(kX, {"-x^2"}));
  const std::vector<VectorField> basis{x1, x2};
  const auto span = span_coefficients(z, basis);
  return {base_ok && !span.in_span,
          std::string("diagonal prolongation: ") + (check.is_prolongation ? "yes" : "no") + ", base " +
              (check.base ? check.base->str() : "none") + ", constant span: " + (span.in_span ? "InSpan" : "NotInSpan")};
}

Outcome c4_closure() {
  const std::vector<VectorField> fields{F(kX, {"1"}), F(kX, {"x"}), F(kX, {"x^2"})};
  const auto r = closure_test(fields);
  bool constants_ok = r.closed && r.dimension() == 3;
  if (constants_ok) {
    const auto& c = r.constants;
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = a + 1; b < 3; ++b)
        for (std::size_t g = 0; g < 3; ++g) {
          Rational want = 0;
          if (a == 0 && b == 1 && g == 0) want = 1;
          if (a == 0 && b == 2 && g == 1) want = 2;
          if (a == 1 && b == 2 && g == 2) want = 1;
          constants_ok = constants_ok && c[a][b][g] == want && c[b][a][g] == -want;
        }
  }
  const std::vector<VectorField> pair{F(kX, {"1"}), F(kX, {"x^2"})};
  const auto open = closure_test(pair);
  const auto completed = closure_test(pair, {.complete = true});
  const bool witness_ok = !open.closed && open.witness && canonically_equal(open.witness->bracket, F(kX, {"2*x"}));
  const bool ok = constants_ok && r.jacobi_residual == 0 && witness_ok && completed.closed && completed.dimension() == 3;
  return {ok, std::string("c01^0 = 1, c02^1 = 2, c12^2 = 1 ") + (constants_ok ? "exact" : "WRONG") +
                  ", Jacobi residual " + r.jacobi_residual.get_str() + "; {d/dx, x^2 d/dx} witness " +
                  (open.witness ? open.witness->bracket.str() : "none") + ", completes to dimension " +
                  std::to_string(completed.dimension())};
}

Outcome c5_round_trip() {
  // Riccati with b = (1, 0, 1).
  const LieSystem ric({F(kX, {"1"}), F(kX, {"x"}), F(kX, {"x^2"})}, {1.0, 0.0, 1.0});
  const SuperpositionRule cross(
      kX, 3, {"((x_0 - x_1)*(x_2 - x_3))/((x_0 - x_3)*(x_2 - x_1))"},
      std::vector<std::string>{"(k1*x_3*(x_2 - x_1) - x_1*(x_2 - x_3))/(k1*(x_2 - x_1) - (x_2 - x_3))"});
  const std::vector<std::vector<double>> parts{{-1.0}, {0.25}, {-3.0}};
  const auto particular = solve_all(ric, parts, {0.0, 1.2});
  const std::vector<double> x0{0.0};
  const auto k = constants_from_initial(cross, x0, parts);
  const auto rec = reconstruct(cross, particular, k, x0);
  const auto direct = integrate(ric, x0, {0.0, 1.2});
  const double e_ric = max_abs_error(rec.solution, direct);
  double e_tan = 0;
  for (std::size_t j = 0; j < rec.solution.size(); ++j)
    e_tan = std::max(e_tan, std::abs(rec.solution.x[j][0] - std::tan(rec.solution.t[j])));

  // 2x2 linear system with x = k1 x_1 + k2 x_2.
  const LieSystem lin({F(kXY, {"x", "0"}), F(kXY, {"y", "0"}), F(kXY, {"0", "x"}), F(kXY, {"0", "y"})},
                      {CoefficientCurve::parse("cos(t)"), CoefficientCurve::parse("1"), CoefficientCurve::parse("-t"),
                       CoefficientCurve::parse("1/2")});
  const SuperpositionRule linear(
      kXY, 2, {"(x_0*y_2 - y_0*x_2)/(x_1*y_2 - y_1*x_2)", "(x_1*y_0 - y_1*x_0)/(x_1*y_2 - y_1*x_2)"},
      std::vector<std::string>{"k1*x_1 + k2*x_2", "k1*y_1 + k2*y_2"});
  const std::vector<std::vector<double>> lparts{{1.0, 0.0}, {0.0, 1.0}};
  const auto lpart = solve_all(lin, lparts, {0.0, 2.0});
  const std::vector<double> y0{0.3, -0.7};
  const auto lk = constants_from_initial(linear, y0, lparts);
  const auto lrec = reconstruct(linear, lpart, lk, y0);
  const double e_lin = max_abs_error(lrec.solution, integrate(lin, y0, {0.0, 2.0}));
  return {e_ric <= 1e-5 && e_lin <= 1e-6, "Riccati cross-ratio vs integration " + fmt(e_ric) + " <= 1e-5 (vs tan t: " +
                                              fmt(e_tan) + "); linear k1 x1 + k2 x2 " + fmt(e_lin) + " <= 1e-6"};
}

struct SeparableCase {
  double error = 0;
  bool tangent = false;
};

// Reconstructs the solution through x0 = 1 from the particular solution
// through 1.5 with the given rule, and compares it with direct integration.
SeparableCase separable(const std::string& field, const SuperpositionRule& rule, double x0, double x1) {
  const LieSystem sys({F(kX, {field})}, {CoefficientCurve::parse("1 + t/2")});
  const std::vector<VectorField> basis{F(kX, {field})};
  SeparableCase out;
  out.tangent = verify_tangency(rule, basis).tangent;
  const std::vector<std::vector<double>> parts{{x1}};
  const auto particular = solve_all(sys, parts, {0.0, 1.0});
  const std::vector<double> start{x0};
  const auto k = constants_from_initial(rule, start, parts);
  const auto direct = integrate(sys, start, {0.0, 1.0});
  out.error = max_abs_error(reconstruct(rule, particular, k, start).solution, direct);
  return out;
}

Outcome c6_separable() {
  const SuperpositionRule reciprocal(kX, 1, {"-1/x_0 + 1/x_1"}, std::vector<std::string>{"x_1/(1 - k1*x_1)"});
  const SuperpositionRule cubic(kX, 1, {"x_0^3 - x_1^3"});
  const auto literal = separable("1/x^2", reciprocal, 1.0, 1.5);
  const auto square = separable("x^2", reciprocal, 0.3, 0.5);
  const auto derived = separable("1/x^2", cubic, 1.0, 1.5);
  const bool ok = literal.error <= 1e-6;
  return {ok, "x = x1/(1 - k x1) on x' = a/x^2: error " + fmt(literal.error) + " > 1e-6, tangency " +
                  (literal.tangent ? "holds" : "fails (X~ Psi = x_0^-4 - x_1^-4)") +
                  "; unattainable as stated. Same rule on x' = a x^2: " + fmt(square.error) +
                  (square.error <= 1e-6 ? " <= 1e-6" : " > 1e-6") + "; x_0^3 - x_1^3 on x' = a/x^2: " +
                  fmt(derived.error) + (derived.error <= 1e-6 ? " <= 1e-6" : " > 1e-6")};
}

Outcome c7_equivariance() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  double worst = 0, det = 0;
  std::size_t compared = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto b1 = CoefficientCurve::parse(random_curve(rng));
    const auto b2 = CoefficientCurve::parse(random_curve(rng));
    const auto b3 = CoefficientCurve::parse(random_curve(rng));
    // Start on the unit circle, away from the pole x2 = 0.
    double th = angle(rng);
    while (std::abs(std::sin(th)) < 0.3) th = angle(rng);
    const std::vector<double> x0{std::cos(th), std::sin(th)};
    const auto r = check_equivariance(b1, b2, b3, x0, {0.0, 2.0});
    worst = std::max(worst, r.max_deviation);
    det = std::max(det, r.det_deviation);
    compared += r.compared;
  }
  return {worst <= 1e-6 && det <= 1e-6 && compared > 0,
          "max |x1/x2 - x_Riccati| over 5 random triples = " + fmt(worst) + " <= 1e-6 (" + std::to_string(compared) +
              " points), max |det g - 1| = " + fmt(det) + " <= 1e-6"};
}

Outcome c8_partial_rules() {
  std::string detail;
  bool ok = true;
  for (const char* name : {"partial_linear_rank1", "partial_linear_rank1_m2"}) {
    const auto p = catalog_problem(name);
    const auto sys = problem_system(p);
    const auto rule = problem_rule(p, p.rules.at(0));
    const auto starts = std::vector<std::vector<double>>(p.particular->begin(), p.particular->end());
    const auto particular = solve_all(sys, starts, *p.t_span);
    const auto k = constants_from_initial(rule, *p.x0, starts);
    const auto r = verify_partial_rule(rule, sys, particular, k);
    const bool pass = r.ode_residual <= 1e-4 && r.constraint_residual <= 1e-8;
    ok = ok && pass;
    detail += std::string(detail.empty() ? "" : "; ") + name + ": ODE " + fmt(r.ode_residual) + " <= 1e-4, constraint " +
              fmt(r.constraint_residual) + " <= 1e-8";
  }
  return {ok, detail};
}

Outcome c9_pde() {
  const auto flat = PdeSystem::riccati({"x", "0", "0", "y", "0", "0"});
  const auto curv = curvature(flat);
  bool exact_zero = curv.flat;
  for (const auto& e : curv.entries) exact_zero = exact_zero && e.test.exact && e.test.verdict == ZeroVerdict::Zero;

  const auto bent = PdeSystem::parse(Chart({"x", "y"}), Chart({"u"}), {{"u"}, {"x*u"}});
  const auto residual = curvature_residual(bent, 0, 1);
  const bool residual_u = residual.size() == 1 && (residual[0] - parse("u", bent.joint_chart())).is_canonically_zero();

  const std::vector<double> x0{0.7}, base{0.0, 0.0}, target{0.5, 0.5};
  const double spread_flat = path_independence_audit(flat, x0, base, target).spread;
  const double spread_bent = path_independence_audit(bent, x0, base, target).spread;

  std::vector<double> axis;
  for (int i = 0; i <= 10; ++i) axis.push_back(0.05 * i);
  const std::vector<std::vector<double>> axes{axis, axis};
  const SuperpositionRule cross(
      Chart({"u"}), 3, {"((u_0 - u_1)*(u_2 - u_3))/((u_0 - u_3)*(u_2 - u_1))"});
  const std::vector<std::vector<double>> starts{{0.1}, {0.4}, {-0.6}};
  std::vector<PdeGrid> particular;
  for (const auto& s : starts) particular.push_back(solve_on_grid(flat, s, axes));
  const auto k = constants_from_initial(cross, x0, starts);
  const auto sup = pde_superpose(flat, cross, particular, k, x0);
  double err = 0;
  for (std::size_t f = 0; f < sup.solution.size(); ++f) {
    const auto t = sup.solution.point(f);
    const double exact = 1.0 / (1.0 / x0[0] - (t[0] * t[0] + t[1] * t[1]) / 2);
    err = std::max(err, std::abs(sup.solution.values[f][0] - exact));
  }
  const bool ok = exact_zero && residual_u && spread_flat <= 1e-5 && spread_bent > 1e-3 && err <= 1e-5;
  return {ok, std::string("flat curvature ") + (exact_zero ? "exactly Zero" : "NOT zero") + ", non-flat residual " +
                  (residual.empty() ? "?" : residual[0].canonical_str()) + ", spreads " + fmt(spread_flat) +
                  " <= 1e-5 and " + fmt(spread_bent) + " > 1e-3, 11x11 superposition error " + fmt(err) + " <= 1e-5"};
}

double endpoint_error(const LieSystem& sys, double x0, double t1, double exact, double tol) {
  IntegrateOptions o;
  o.tol = tol;
  const std::vector<double> start{x0};
  return std::abs(integrate(sys, start, {0.0, t1}, o).x.back()[0] - exact);
}

Outcome c10_properties() {
  std::mt19937_64 rng(10);
  int jacobi_ok = 0;
  for (int i = 0; i < 200; ++i) {
    const auto a = testing::random_field(rng, kXY);
    const auto b = testing::random_field(rng, kXY);
    const auto c = testing::random_field(rng, kXY);
    const auto jac =
        lie_bracket(a, lie_bracket(b, c)) + lie_bracket(b, lie_bracket(c, a)) + lie_bracket(c, lie_bracket(a, b));
    jacobi_ok += jac.is_zero() && (lie_bracket(a, b) + lie_bracket(b, a)).is_zero();
  }
  int commute_ok = 0;
  for (int i = 0; i < 100; ++i) {
    const auto a = testing::random_field(rng, kXY);
    const auto b = testing::random_field(rng, kXY);
    const ProductChart p(kXY, 2 + i % 3);
    commute_ok += canonically_equal(diagonal_prolongation(lie_bracket(a, b), p),
                                    lie_bracket(diagonal_prolongation(a, p), diagonal_prolongation(b, p)));
  }
  struct Case {
    LieSystem sys;
    double x0, t1, exact;
  };
  const std::vector<Case> cases{{LieSystem({F(kX, {"x"})}, {1.0}), 1.0, 1.0, std::numbers::e},
                                {LieSystem({F(kX, {"1/x^2"})}, {1.0}), 1.0, 1.0, std::cbrt(4.0)},
                                {LieSystem({F(kX, {"1"}), F(kX, {"x^2"})}, {1.0, 1.0}), 0.0, 1.2, std::tan(1.2)}};
  double factor = 1e300;
  for (const auto& c : cases)
    factor = std::min(factor, endpoint_error(c.sys, c.x0, c.t1, c.exact, 1e-9) /
                                  endpoint_error(c.sys, c.x0, c.t1, c.exact, 5e-10));
  const auto all = run_catalog();
  const double secs = all.runtime_ms / 1000;
  std::size_t passed = 0;
  for (const auto& r : all.reports) passed += r.pass();
  const bool ok = jacobi_ok == 200 && commute_ok == 100 && factor >= 2.0 && all.pass() && secs < 60.0;
  return {ok, "Jacobi/antisymmetry " + std::to_string(jacobi_ok) + "/200 exact, prolongation-bracket " +
                  std::to_string(commute_ok) + "/100, convergence factor " + fmt(factor) + " >= 2, examples run-all " +
                  std::to_string(passed) + "/" + std::to_string(all.reports.size()) + " PASS in " + fmt(secs) +
                  " s < 60 s"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Riccati fundamental-set size", c1_riccati_m},
      {"Euclidean system", c2_euclidean},
      {"prolongation counterexample", c3_lemma_counterexample},
      {"closure exactness", c4_closure},
      {"superposition round trip", c5_round_trip},
      {"separable closed form", c6_separable},
      {"group equivariance", c7_equivariance},
      {"partial rules", c8_partial_rules},
      {"PDE flatness", c9_pde},
      {"property suites", c10_properties},
  };
  const std::set<std::size_t> unattainable{6};
  int unexpected = 0, passed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s  %zu. %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    passed += o.pass;
    if (!o.pass && !unattainable.count(i + 1)) ++unexpected;
  }
  std::printf("%d/%zu criteria PASS; %d unexpected failure(s)\n", passed, criteria.size(), unexpected);
  return unexpected == 0 ? 0 : 1;
}
