#include <doctest.h>

#include "generators.hpp"
#include "liesys/pde.hpp"

#include <cmath>

using namespace liesys;

namespace {

const std::array<std::string, 6> kFlatRiccati{"1", "0", "0", "1", "0", "0"};  // u_x = u_y = u^2

PdeSystem non_flat() { return PdeSystem::parse(Chart({"x", "y"}), Chart({"u"}), {{"u"}, {"x*u"}}); }

double riccati_exact(double u0, double x, double y) { return u0 / (1 - u0 * (x + y)); }

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

SuperpositionRule cross_ratio() {
  return SuperpositionRule(Chart({"u"}), 3, {"(u_0 - u_1)*(u_2 - u_3)/((u_0 - u_2)*(u_1 - u_3))"});
}

}  // namespace

TEST_CASE("system construction") {
  auto ric = PdeSystem::riccati(kFlatRiccati);
  CHECK(ric.s() == 2);
  CHECK(ric.n() == 1);
  CHECK(ric.fields()[0][0].canonical_str() == "u^2");
  CHECK(ric.decomposition().has_value());
  CHECK(PdeSystem::default_parameters(1).names() == std::vector<std::string>{"t"});
  CHECK(PdeSystem::default_parameters(3).names() == std::vector<std::string>{"t1", "t2", "t3"});
  CHECK_THROWS_AS(PdeSystem::parse(Chart({"x", "y"}), Chart({"u"}), {{"u"}}), std::invalid_argument);
  CHECK_THROWS_AS(PdeSystem::parse(Chart({"x"}), Chart({"x"}), {{"x"}}), std::invalid_argument);
  const Chart c({"u"});
  LieDecomposition bad{{VectorField::parse(c, {"1"})}, {{Expr(2L)}}};
  CHECK_THROWS_AS(PdeSystem(Chart({"t"}), c, {{Expr(1L)}}, bad), std::invalid_argument);
  LieDecomposition good{{VectorField::parse(c, {"1"})}, {{Expr(1L)}}};
  CHECK_NOTHROW(PdeSystem(Chart({"t"}), c, {{Expr(1L)}}, good));
}

TEST_CASE("curvature") {
  SUBCASE("PDE-Riccati with u_x = u_y = u^2 is flat") {
    auto r = curvature(PdeSystem::riccati(kFlatRiccati));
    CHECK(r.flat);
    REQUIRE(r.entries.size() == 1);
    CHECK(r.entries[0].residual.is_canonically_zero());
    CHECK(r.entries[0].test.exact);
  }
  SUBCASE("u_x = u, u_y = x u has residual u") {
    auto r = curvature(non_flat());
    CHECK_FALSE(r.flat);
    CHECK_FALSE(r.probably_flat);
    CHECK(r.entries[0].residual.canonical_str() == "u");
    CHECK(r.entries[0].test.verdict == ZeroVerdict::NonZero);
  }
  SUBCASE("one parameter is vacuously flat") {
    auto sys = PdeSystem::parse(Chart({"t"}), Chart({"x"}), {{"x^2 + t"}});
    auto r = curvature(sys);
    CHECK(r.flat);
    CHECK(r.entries.empty());
  }
  SUBCASE("transcendental coefficients") {
    auto exact = curvature(PdeSystem::parse(Chart({"x", "y"}), Chart({"u"}), {{"cos(y)*u"}, {"-x*sin(y)*u"}}));
    CHECK(exact.flat);
    // sin^2 + cos^2 - 1 only vanishes numerically
    auto sampled = curvature(
        PdeSystem::parse(Chart({"x", "y"}), Chart({"u"}), {{"u"}, {"x*(sin(y)^2 + cos(y)^2 - 1)*u"}}));
    CHECK_FALSE(sampled.flat);
    CHECK(sampled.probably_flat);
    CHECK(sampled.entries[0].test.verdict == ZeroVerdict::Unknown);
  }
}

TEST_CASE("curvature residuals are antisymmetric") {
  std::mt19937_64 rng(41);
  const Chart params({"t1", "t2", "t3"});
  const Chart chart({"x", "y"});
  const auto vars = params.extended(chart.names()).names();
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<Expr>> fields(3);
    for (auto& f : fields)
      for (int i = 0; i < 2; ++i) f.push_back(testing::random_polynomial(rng, vars));
    PdeSystem sys(params, chart, fields);
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) {
        auto ab = curvature_residual(sys, a, b), ba = curvature_residual(sys, b, a);
        for (std::size_t i = 0; i < 2; ++i) CHECK((ab[i] + ba[i]).is_canonically_zero());
        if (a == b)
          for (const auto& e : ab) CHECK(e.is_canonically_zero());
      }
  }
}

TEST_CASE("closedness of the Riccati one-form matches the curvature") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    std::array<std::string, 6> coeffs;
    for (auto& c : coeffs) c = testing::random_polynomial(rng, {"x", "y"}, 2, 2).str();
    auto sys = PdeSystem::riccati(coeffs);
    auto closed = riccati_closedness(coeffs);
    const Expr u = Expr::variable("u");
    const Expr expected = closed[0] * u * u + closed[1] * u + closed[2];
    CHECK(canonically_equal(curvature_residual(sys, 0, 1)[0], expected));
    auto bc = bracket_combination(sys);
    REQUIRE(bc.closed);
    // the decomposed residual has components along 1, u, u^2
    CHECK(canonically_equal(bc.residuals[0][0], closed[2]));
    CHECK(canonically_equal(bc.residuals[0][1], closed[1]));
    CHECK(canonically_equal(bc.residuals[0][2], closed[0]));
    CHECK(bc.zero == curvature(sys).flat);
  }
  auto flat = riccati_closedness(kFlatRiccati);
  for (const auto& e : flat) CHECK(e.is_canonically_zero());
  // a non-trivial closed family: u_x = y u^2, u_y = x u^2 gives d_x - a_y = 0
  auto closed = riccati_closedness({"y", "0", "0", "x", "0", "0"});
  for (const auto& e : closed) CHECK(e.is_canonically_zero());
  CHECK(bracket_combination(PdeSystem::riccati({"y", "0", "0", "x", "0", "0"})).zero);
  CHECK_FALSE(bracket_combination(PdeSystem::riccati({"y", "0", "0", "0", "0", "0"})).zero);
  CHECK_THROWS_AS(bracket_combination(non_flat()), std::invalid_argument);
}

TEST_CASE("path solving") {
  const std::vector<double> origin{0, 0};
  SUBCASE("flat PDE-Riccati matches the closed form") {
    auto sys = PdeSystem::riccati(kFlatRiccati);
    for (double u0 : {0.5, -1.0, 0.9}) {
      const std::vector<double> x0{u0}, target{0.3, 0.2};
      const std::size_t order[2] = {1, 0};
      auto sol = path_solve(sys, x0, origin, axis_staircase(origin, target, order));
      CHECK(std::abs(sol.endpoint[0] - riccati_exact(u0, 0.3, 0.2)) < 1e-6);
      CHECK(sol.corners.size() == 3);
      CHECK(sol.corners[1] == std::vector<double>{0.0, 0.2});
    }
  }
  SUBCASE("zero fields stay put") {
    auto sys = PdeSystem::parse(Chart({"x", "y"}), Chart({"u", "v"}), {{"0", "0"}, {"0", "0"}});
    const std::vector<double> x0{1.5, -2}, target{1, 1};
    auto sol = path_solve(sys, x0, origin, random_staircase(origin, target, 3, 9));
    CHECK(sol.endpoint == x0);
  }
  SUBCASE("non-flat endpoints depend on the path") {
    const std::vector<double> x0{1.0}, target{1, 1};
    const std::size_t xy[2] = {0, 1}, yx[2] = {1, 0};
    auto a = path_solve(non_flat(), x0, origin, axis_staircase(origin, target, xy));
    auto b = path_solve(non_flat(), x0, origin, axis_staircase(origin, target, yx));
    CHECK(a.endpoint[0] == doctest::Approx(std::exp(2.0)).epsilon(1e-7));
    CHECK(b.endpoint[0] == doctest::Approx(std::exp(1.0)).epsilon(1e-7));
    CHECK(std::abs(a.endpoint[0] - b.endpoint[0]) > 1e-3);
  }
  SUBCASE("legs may run backwards") {
    auto sys = PdeSystem::riccati(kFlatRiccati);
    const std::vector<double> x0{0.5}, target{-0.4, 0.1};
    const std::size_t xy[2] = {0, 1};
    auto sol = path_solve(sys, x0, origin, axis_staircase(origin, target, xy));
    CHECK(std::abs(sol.endpoint[0] - riccati_exact(0.5, -0.4, 0.1)) < 1e-6);
  }
  SUBCASE("blow-up is reported") {
    auto sys = PdeSystem::riccati(kFlatRiccati);
    const std::vector<double> x0{1.0}, target{2, 0};
    const std::size_t xy[2] = {0, 1};
    CHECK_THROWS_AS(path_solve(sys, x0, origin, axis_staircase(origin, target, xy)), PathBlowUp);
  }
}

TEST_CASE("random staircases reach the target") {
  const std::vector<double> base{0.1, -0.2, 0.3}, target{1, 2, -1};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto path = random_staircase(base, target, 4, seed);
    CHECK(path.size() == 12);
    std::vector<double> t = base;
    for (const auto& [a, v] : path) {
      CHECK(std::abs(v - target[a]) <= std::abs(t[a] - target[a]) + 1e-15);
      t[a] = v;
    }
    CHECK(t == target);
  }
}

TEST_CASE("path-independence audit") {
  const std::vector<double> origin{0, 0}, target{0.5, 0.5};
  auto flat = path_independence_audit(PdeSystem::riccati(kFlatRiccati), std::vector<double>{0.4}, origin, target);
  CHECK(flat.endpoints.size() == 8);
  CHECK(flat.spread <= 1e-5);
  CHECK(std::abs(flat.endpoints[0][0] - riccati_exact(0.4, 0.5, 0.5)) < 1e-6);
  auto curved = path_independence_audit(non_flat(), std::vector<double>{1.0}, origin, std::vector<double>{1, 1});
  CHECK(curved.spread > 1e-3);
  auto sys1 = PdeSystem::parse(Chart({"t"}), Chart({"x"}), {{"1 + x^2"}});
  auto single = path_independence_audit(sys1, std::vector<double>{0.0}, std::vector<double>{0.0},
                                        std::vector<double>{1.0});
  CHECK(single.endpoints.size() == 1);
  CHECK(single.spread == 0.0);
  CHECK(single.endpoints[0][0] == doctest::Approx(std::tan(1.0)).epsilon(1e-8));
}

TEST_CASE("one parameter reduces to the ODE integrator") {
  auto sys1 = PdeSystem::parse(Chart({"t"}), Chart({"x"}), {{"cos(t)*x + x^2/4"}});
  const Chart c({"x"});
  LieSystem ode({VectorField::parse(c, {"x"}), VectorField::parse(c, {"x^2"})},
                {CoefficientCurve::parse("cos(t)"), CoefficientCurve(0.25)});
  const std::vector<double> x0{0.3};
  auto via_path = path_solve(sys1, x0, std::vector<double>{0.0}, Staircase{{0, 2.0}});
  auto direct = integrate(ode, x0, {0.0, 2.0});
  CHECK(std::abs(via_path.endpoint[0] - direct.x.back()[0]) < 1e-12);
  auto grid = solve_on_grid(sys1, x0, {linspace(0, 2, 9)});
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(grid.values[i][0] - direct.at(grid.axes[0][i])[0]) < 1e-7);
}

TEST_CASE("grids") {
  auto sys = PdeSystem::riccati(kFlatRiccati);
  auto grid = solve_on_grid(sys, std::vector<double>{0.6}, {linspace(0, 0.5, 11), linspace(0, 0.5, 11)});
  REQUIRE(grid.size() == 121);
  double worst = 0;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    auto t = grid.point(f);
    worst = std::max(worst, std::abs(grid.values[f][0] - riccati_exact(0.6, t[0], t[1])));
  }
  CHECK(worst < 1e-6);
  const std::size_t idx[2] = {3, 7};
  CHECK(grid.point(grid.flat_index(idx)) == std::vector<double>{0.15, 0.35});
  CHECK_THROWS_AS(solve_on_grid(sys, std::vector<double>{0.6}, {{0, 0.1}, {0.1, 0}}), std::invalid_argument);

  SUBCASE("snake order visits neighbours") {
    for (auto shape : {std::vector<int>{3, 4, 5}, std::vector<int>{4, 4}, std::vector<int>{1, 6}, std::vector<int>{7}}) {
      std::vector<std::vector<double>> axes;
      for (int n : shape) axes.push_back(linspace(0, 1, std::max(n, 2)).size() == static_cast<std::size_t>(n)
                                             ? linspace(0, 1, n)
                                             : std::vector<double>{0.0});
      PdeGrid g{axes, {}};
      auto order = snake_order(axes);
      std::vector<int> seen(order.size(), 0);
      for (auto f : order) ++seen[f];
      CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
      for (std::size_t i = 1; i < order.size(); ++i) {
        auto a = g.point(order[i - 1]), b = g.point(order[i]);
        int changed = 0;
        for (std::size_t d = 0; d < a.size(); ++d) changed += a[d] != b[d];
        CHECK(changed == 1);
      }
    }
  }
}

TEST_CASE("superposition on grids") {
  auto sys = PdeSystem::riccati(kFlatRiccati);
  const std::vector<std::vector<double>> axes{linspace(0, 0.5, 11), linspace(0, 0.5, 11)};
  std::vector<PdeGrid> particular;
  for (double u0 : {0.1, 0.4, -0.6}) particular.push_back(solve_on_grid(sys, std::vector<double>{u0}, axes));
  const auto rule = cross_ratio();

  SUBCASE("cross-ratio rule reproduces a fourth solution") {
    const double u0 = 0.7;
    const std::vector<double> tuple{u0, 0.1, 0.4, -0.6};
    const auto k = evaluate_psi(rule, tuple);
    auto res = pde_superpose(sys, rule, particular, k, std::vector<double>{u0});
    auto direct = solve_on_grid(sys, std::vector<double>{u0}, axes);
    double worst = 0, worst_exact = 0;
    for (std::size_t f = 0; f < direct.size(); ++f) {
      worst = std::max(worst, std::abs(res.solution.values[f][0] - direct.values[f][0]));
      auto t = direct.point(f);
      worst_exact = std::max(worst_exact, std::abs(res.solution.values[f][0] - riccati_exact(u0, t[0], t[1])));
    }
    CHECK(worst <= 1e-5);
    CHECK(worst_exact <= 1e-5);
    CHECK(res.newton_iterations > 0);
    // the closed form in the constants agrees
    const double kk = k[0];
    for (std::size_t f = 0; f < direct.size(); f += 17) {
      const double u1 = particular[0].values[f][0], u2 = particular[1].values[f][0], u3 = particular[2].values[f][0];
      const double phi = ((u1 - u3) * u2 * kk + u1 * (u3 - u2)) / ((u1 - u3) * kk + (u3 - u2));
      CHECK(std::abs(phi - res.solution.values[f][0]) < 1e-8);
    }
  }
  SUBCASE("rule must be tangent") {
    SuperpositionRule wrong(Chart({"u"}), 3, {"u_0 - u_1"});
    CHECK_THROWS_AS(pde_superpose(sys, wrong, particular, std::vector<double>{0.0}, {}), std::invalid_argument);
    CHECK_THROWS_AS(pde_superpose(non_flat(), rule, particular, std::vector<double>{0.0}, {}), std::invalid_argument);
  }
  SUBCASE("translation rule on a constant flat system") {
    const Chart c({"u"});
    LieDecomposition d{{VectorField::parse(c, {"1"})}, {{Expr(1L)}, {Expr(2L)}}};
    auto trans = PdeSystem::from_decomposition(Chart({"x", "y"}), d);
    CHECK(curvature(trans).flat);
    std::vector<PdeGrid> one{solve_on_grid(trans, std::vector<double>{0.25}, axes)};
    SuperpositionRule rule1(c, 1, {"u_0 - u_1"}, std::vector<std::string>{"u_1 + k1"});
    auto res = pde_superpose(trans, rule1, one, std::vector<double>{1.5}, {});
    for (std::size_t f = 0; f < res.solution.size(); ++f) {
      auto t = res.solution.point(f);
      CHECK(res.solution.values[f][0] == doctest::Approx(1.75 + t[0] + 2 * t[1]).epsilon(1e-9));
    }
  }
}
