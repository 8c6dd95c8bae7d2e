#include <doctest.h>

#include "generators.hpp"
#include "liesys/expr.hpp"

#include <cmath>

using namespace liesys;

namespace {
const Chart kXY({"x", "y"});
Expr P(const std::string& s) { return parse(s, kXY); }
}  // namespace

TEST_CASE("parse builds canonical monomials") {
  CHECK(P("x^2").canonical_str() == "x^2");
  CHECK(P("1 + x + x").canonical_str() == "1 + 2*x");
  CHECK(P("x*y - y*x").canonical_str() == "0");
  CHECK(P("0.25*x").canonical_str() == "1/4*x");
  CHECK(P("(x^2 - 1)/(x - 1)").canonical_str() == "1 + x");
  CHECK(P("-x^2").canonical_str() == "-x^2");
  CHECK(P("x^(-2)").canonical() == P("1/x^2").canonical());
}

TEST_CASE("parse errors carry position and identifier") {
  try {
    parse("y*dx_coeff", kXY);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.identifier() == "dx_coeff");
    CHECK(e.position() == 2);
    CHECK(std::string(e.what()).find("dx_coeff") != std::string::npos);
  }
  CHECK_THROWS_AS(parse("x +", kXY), ParseError);
  CHECK_THROWS_AS(parse("(x", kXY), ParseError);
  CHECK_THROWS_AS(parse("x^y", kXY), ParseError);
  CHECK_THROWS_AS(parse("x^(1/2)", kXY), ParseError);
  CHECK_THROWS_AS(parse("x/0", kXY), ParseError);
  CHECK_THROWS_AS(parse("sin x", kXY), ParseError);
  CHECK_THROWS_AS(parse("x $ y", kXY), ParseError);
}

TEST_CASE("chart validation") {
  CHECK_THROWS_AS(Chart({"x", "x"}), std::invalid_argument);
  CHECK_THROWS_AS(Chart({"1x"}), std::invalid_argument);
  CHECK_THROWS_AS(Chart({"sin"}), std::invalid_argument);
  CHECK_THROWS_AS(Chart(std::vector<std::string>{}), std::invalid_argument);
  CHECK(Chart({"x", "y"}).index_of("y") == 1);
}

TEST_CASE("differentiate") {
  CHECK(differentiate(P("x^2"), "x").canonical_str() == "2*x");
  CHECK(differentiate(P("x^2"), "y").canonical_str() == "0");
  // Frozen from a sympy oracle: d/dx (x^2 y - x/y) = 2xy - 1/y.
  CHECK(canonically_equal(differentiate(P("x^2*y - x/y"), "x"), P("2*x*y - 1/y")));
  CHECK(canonically_equal(differentiate(P("sin(x^2)"), "x"), P("2*x*cos(x^2)")));
  CHECK(canonically_equal(differentiate(P("ln(x*y)"), "y"), P("1/y")));
  CHECK(canonically_equal(differentiate(P("exp(2*x)*cos(y)"), "x"), P("2*exp(2*x)*cos(y)")));
  CHECK(differentiate(P("7"), "x").is_canonically_zero());
}

TEST_CASE("is_zero") {
  auto z = is_zero(P("(x+1)^2 - x^2 - 2*x - 1"));
  CHECK(z.verdict == ZeroVerdict::Zero);
  CHECK(z.exact);
  auto nz = is_zero(P("x - y"));
  CHECK(nz.verdict == ZeroVerdict::NonZero);
  CHECK(nz.exact);
  auto trig = is_zero(P("sin(x)^2 + cos(x)^2 - 1"));
  CHECK(trig.verdict == ZeroVerdict::Unknown);
  CHECK_FALSE(trig.exact);
  CHECK(trig.samples == 32);
  auto trig_nz = is_zero(P("sin(x)^2 - cos(x)^2"));
  CHECK(trig_nz.verdict == ZeroVerdict::NonZero);
  CHECK_FALSE(trig_nz.exact);
}

TEST_CASE("evaluation") {
  Expr e = P("x^2*y - x/y + sin(x)");
  std::map<std::string, double> pt{{"x", 0.7}, {"y", -1.3}};
  double expected = 0.49 * -1.3 - 0.7 / -1.3 + std::sin(0.7);
  CHECK(evaluate(e, pt) == doctest::Approx(expected).epsilon(1e-14));
  CompiledExpr ce(e, {"x", "y"});
  std::vector<double> v{0.7, -1.3};
  CHECK(ce(v) == doctest::Approx(expected).epsilon(1e-14));
  CHECK_THROWS_AS(CompiledExpr(e, {"x"}), std::invalid_argument);

  auto exact = evaluate_exact(P("x^2 + y/3"), {{"x", Rational(1, 2)}, {"y", Rational(3)}});
  REQUIRE(exact);
  CHECK(*exact == Rational(5, 4));
  CHECK_FALSE(evaluate_exact(P("sin(x)"), {{"x", Rational(0)}, {"y", Rational(1)}}));
  CHECK_FALSE(evaluate_exact(P("1/x"), {{"x", Rational(0)}, {"y", Rational(1)}}));
}

TEST_CASE("polynomial gcd cancels common factors") {
  Expr e = P("(x^2*y - y^3)/(x*y + y^2)");
  CHECK(canonically_equal(e, P("x - y")));
  Expr f = P("(x^3 - y^3)/(x^2 - y^2)");
  CHECK(canonically_equal(f, P("(x^2 + x*y + y^2)/(x + y)")));
  CHECK(f.canonical().denominator() == P("x + y").canonical().numerator());
}

TEST_CASE("substitute and rename") {
  Expr e = P("x^2 + y");
  CHECK(canonically_equal(rename(e, {{"x", "y"}}), P("y^2 + y")));
  CHECK(canonically_equal(substitute(e, {{"y", P("x - 1")}}), P("x^2 + x - 1")));
  CHECK(canonically_equal(rename(P("sin(x)"), {{"x", "y"}}), P("sin(y)")));
}

TEST_CASE("property: canonical sums commute and annihilate") {
  std::mt19937_64 rng(11);
  std::vector<std::string> vars{"x", "y"};
  for (int i = 0; i < 200; ++i) {
    Expr a = testing::random_polynomial(rng, vars, 4, 3);
    Expr b = testing::random_polynomial(rng, vars, 4, 3);
    CHECK(canonically_equal(a + b, b + a));
    CHECK((a * Expr(0L)).is_canonically_zero());
  }
}

TEST_CASE("property: derivative is linear and satisfies Leibniz") {
  std::mt19937_64 rng(12);
  std::vector<std::string> vars{"x", "y"};
  for (int i = 0; i < 150; ++i) {
    Expr a = testing::random_tree(rng, vars, 3, i % 3 == 0);
    Expr b = testing::random_tree(rng, vars, 3, i % 3 == 0);
    Expr da = differentiate(a, "x");
    Expr db = differentiate(b, "x");
    CHECK(canonically_equal(differentiate(a + Expr(Rational(3, 2)) * b, "x"),
                            da + Expr(Rational(3, 2)) * db));
    CHECK(canonically_equal(differentiate(a * b, "x"), da * b + a * db));
  }
}

TEST_CASE("property: parse(print(e)) round trips") {
  std::mt19937_64 rng(13);
  std::vector<std::string> vars{"x", "y"};
  for (int i = 0; i < 1000; ++i) {
    Expr e = testing::random_tree(rng, vars, 4, i % 4 == 0);
    Expr back = parse(e.str(), kXY);
    INFO(e.str());
    CHECK(canonically_equal(back, e));
    CHECK(canonically_equal(parse(e.canonical_str(), kXY), e));
  }
}
