#include <doctest.h>

#include "liesys/group.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace liesys;

namespace {

// Matrix exponential by scaling and squaring with a long Taylor series.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = norm > 0.5 ? static_cast<int>(std::ceil(std::log2(norm / 0.5))) : 0;
  const Eigen::MatrixXd scaled = a / std::ldexp(1.0, squarings);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  Eigen::MatrixXd sum = term;
  for (int k = 1; k <= 24; ++k) {
    term = term * scaled / k;
    sum += term;
  }
  while (squarings-- > 0) sum = sum * sum;
  return sum;
}

double max_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

Eigen::Matrix2d random_sl2(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2, 2);
  for (;;) {
    Eigen::Matrix2d g;
    g << u(rng), u(rng), u(rng), u(rng);
    const double det = g.determinant();
    if (std::abs(det) < 0.1) continue;
    if (det < 0) g.col(0) *= -1;
    return g / std::sqrt(std::abs(det));
  }
}

}  // namespace

TEST_CASE("matrix curves") {
  auto a = MatrixCurve::from_entries(2, {"t", "1", "0", "-t"});
  CHECK(a(2.0)(0, 0) == doctest::Approx(2.0));
  CHECK(a(2.0)(1, 1) == doctest::Approx(-2.0));
  CHECK(a.max_trace(0, 1) == doctest::Approx(0.0));
  auto s = MatrixCurve::sl2(CoefficientCurve::parse("t"), 2.0, 3.0);
  CHECK(max_diff(s(1.0), (Eigen::Matrix2d() << 1, 1, -3, -1).finished()) == 0.0);
  CHECK(s.max_trace(-5, 5) == 0.0);
  CHECK_THROWS_AS(MatrixCurve::from_entries(2, {"1", "2", "3"}), std::invalid_argument);
  CHECK_THROWS_AS(MatrixCurve({Eigen::MatrixXd::Zero(2, 3)}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(MatrixCurve(MatrixCurve::sl2_basis(), {1.0}), std::invalid_argument);
}

TEST_CASE("constant curves give the matrix exponential") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 3;
    Eigen::MatrixXd a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = u(rng);
    auto gt = solve_group_equation(MatrixCurve::constant(a), {0.0, 2.0});
    REQUIRE_FALSE(gt.blew_up);
    CHECK(max_diff(gt.g.front(), Eigen::MatrixXd::Identity(d, d)) == 0.0);
    for (std::size_t k = 0; k < gt.t.size(); k += 5) CHECK(max_diff(gt.g[k], expm(gt.t[k] * a)) < 1e-6);
    CHECK(max_diff(gt.at(1.3), expm(1.3 * a)) < 1e-6);
    CHECK(gt.liouville < 1e-6);
    CHECK(gt.max_defect <= 10 * 1e-9);
  }
}

TEST_CASE("zero curve stays at the identity") {
  auto gt = solve_group_equation(MatrixCurve::constant(Eigen::MatrixXd::Zero(3, 3)), {0.0, 5.0});
  for (const auto& g : gt.g) CHECK(max_diff(g, Eigen::MatrixXd::Identity(3, 3)) == 0.0);
}

TEST_CASE("b = (1,0,1) rotates") {
  auto gt = solve_group_equation(MatrixCurve::sl2(1.0, 0.0, 1.0), {0.0, 10.0});
  double worst = 0, det = 0;
  for (std::size_t k = 0; k < gt.t.size(); ++k) {
    const double t = gt.t[k];
    Eigen::Matrix2d r;
    r << std::cos(t), std::sin(t), -std::sin(t), std::cos(t);
    worst = std::max(worst, max_diff(gt.g[k], r));
    det = std::max(det, std::abs(gt.g[k].determinant() - 1));
  }
  CHECK(worst < 1e-6);
  CHECK(det < 1e-6);
  CHECK(gt.max_defect <= 10 * 1e-9);
}

TEST_CASE("time-dependent curves satisfy Liouville and the defect bound") {
  auto a = MatrixCurve::from_entries(2, {"sin(t)", "1", "t/3", "-1/2"});
  auto gt = solve_group_equation(a, {0.0, 3.0});
  CHECK(gt.liouville < 1e-6);
  CHECK(gt.max_defect <= 10 * 1e-9);
  CHECK(gt.defect.size() == gt.flat.segments.size());
  for (std::size_t k = 0; k < gt.t.size(); ++k) {
    const double tr = 1 - std::cos(gt.t[k]) - 0.5 * gt.t[k];
    CHECK(gt.g[k].determinant() == doctest::Approx(std::exp(tr)).epsilon(1e-7));
  }
  auto sl = solve_group_equation(MatrixCurve::sl2(CoefficientCurve::parse("cos(t)"), CoefficientCurve::parse("t"),
                                                  CoefficientCurve::parse("1 - t^2/4")),
                                 {0.0, 2.0});
  for (const auto& g : sl.g) CHECK(std::abs(g.determinant() - 1) < 1e-6);
}

TEST_CASE("action axioms") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  const auto mob = GroupAction::mobius();
  const auto lin = GroupAction::linear(2);
  const Eigen::Matrix2d e = Eigen::Matrix2d::Identity();
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix2d g1 = random_sl2(rng), g2 = random_sl2(rng);
    const double x = u(rng);
    const std::vector<double> v{u(rng), u(rng)};
    CHECK(mob.act(e, std::span(&x, 1))[0] == x);
    CHECK(lin.act(e, v) == v);
    const double inner = mob.act(g2, std::span(&x, 1))[0];
    const double lhs = mob.act(g1 * g2, std::span(&x, 1))[0];
    const double rhs = mob.act(g1, std::span(&inner, 1))[0];
    if (std::abs(lhs) < 1e6) CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    const auto lv = lin.act(g1 * g2, v), rv = lin.act(g1, lin.act(g2, v));
    CHECK(lv[0] == doctest::Approx(rv[0]).epsilon(1e-12));
    CHECK(lv[1] == doctest::Approx(rv[1]).epsilon(1e-12));
    // projective coordinates compose exactly, including through the pole
    const Eigen::Vector2d pq(x, 1.0);
    const Eigen::Vector2d a = mob.act_projective(g1 * g2, pq), b = mob.act_projective(g1, mob.act_projective(g2, pq));
    CHECK(std::abs(a(0) * b(1) - a(1) * b(0)) < 1e-12);
  }
  Eigen::Matrix2d to_pole;
  to_pole << 1, 0, -1, 1;
  const double one = 1.0;
  CHECK(std::isinf(mob.act(to_pole, std::span(&one, 1))[0]));
  CHECK(GroupAction::by_name("mobius").kind() == GroupAction::Kind::Mobius);
  CHECK(GroupAction::by_name("linear", 3).space_dimension() == 3);
  CHECK_THROWS_AS(GroupAction::by_name("affine"), std::invalid_argument);
  CHECK_THROWS_AS(lin.act(e, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("act_solve") {
  SUBCASE("linear action on e1 gives the first column of exp(ta)") {
    Eigen::MatrixXd a(2, 2);
    a << 0.3, -1, 0.5, -0.2;
    const std::vector<double> e1{1, 0};
    auto res = act_solve(MatrixCurve::constant(a), GroupAction::linear(2), e1, {0.0, 3.0});
    for (std::size_t k = 0; k < res.trajectory.size(); ++k) {
      const Eigen::MatrixXd ex = expm(res.trajectory.t[k] * a);
      CHECK(std::abs(res.trajectory.x[k][0] - ex(0, 0)) < 1e-6);
      CHECK(std::abs(res.trajectory.x[k][1] - ex(1, 0)) < 1e-6);
    }
  }
  SUBCASE("Mobius image of 0 under the rotation is tan t") {
    const double x0 = 0.0;
    auto res = act_solve(MatrixCurve::sl2(1.0, 0.0, 1.0), GroupAction::mobius(), std::span(&x0, 1), {0.0, 3.0});
    REQUIRE(res.pole_crossings.size() == 1);
    CHECK(res.pole_crossings[0] == doctest::Approx(std::numbers::pi / 2).epsilon(1e-9));
    CHECK(res.projective.size() == res.trajectory.size());
    for (std::size_t k = 0; k < res.trajectory.size(); ++k) {
      const double t = res.trajectory.t[k];
      if (std::abs(std::cos(t)) < 0.05) continue;
      CHECK(std::abs(res.trajectory.x[k][0] - std::tan(t)) < 1e-6 * std::max(1.0, std::tan(t) * std::tan(t)));
    }
    // agrees with the Riccati equation integrated directly before the pole
    const Chart c({"x"});
    LieSystem ric({VectorField::parse(c, {"1"}), VectorField::parse(c, {"x"}), VectorField::parse(c, {"x^2"})},
                  {1.0, 0.0, 1.0});
    auto direct = integrate(ric, std::span(&x0, 1), {0.0, 1.4});
    for (std::size_t k = 0; k < res.trajectory.size() && res.trajectory.t[k] <= 1.4; ++k)
      CHECK(std::abs(res.trajectory.x[k][0] - direct.at(res.trajectory.t[k])[0]) < 1e-5);
  }
  SUBCASE("identity curve gives a constant trajectory") {
    const double x0 = 0.7;
    auto res = act_solve(MatrixCurve::constant(Eigen::MatrixXd::Zero(2, 2)), GroupAction::mobius(),
                         std::span(&x0, 1), {0.0, 1.0});
    for (const auto& x : res.trajectory.x) CHECK(x[0] == 0.7);
    CHECK(res.pole_crossings.empty());
  }
  SUBCASE("size mismatch") {
    const double x0 = 0.0;
    CHECK_THROWS_AS(act_solve(MatrixCurve::constant(Eigen::MatrixXd::Zero(3, 3)), GroupAction::mobius(),
                              std::span(&x0, 1), {0.0, 1.0}),
                    std::invalid_argument);
  }
}

TEST_CASE("Mobius generators match the Riccati basis") { CHECK(sl2_generator_mismatch() < 1e-6); }

TEST_CASE("equivariance of the linear system and the Riccati equation") {
  SUBCASE("rotation from (0,1) is tan t") {
    const std::vector<double> x0{0, 1};
    auto r = check_equivariance(1.0, 0.0, 1.0, x0, {0.0, 1.5});
    CHECK(r.sign_convention_ok);
    CHECK(r.max_deviation < 1e-6);
    CHECK(r.compared > 10);
    CHECK(r.det_deviation < 1e-6);
  }
  SUBCASE("pure scaling") {
    const std::vector<double> x0{0.8, -1.3};
    auto r = check_equivariance(0.0, 1.0, 0.0, x0, {0.0, 2.0});
    CHECK(r.max_deviation < 1e-6);
    CHECK(r.excluded == 0);
  }
  SUBCASE("zero curve on the line x1 = 0") {
    const std::vector<double> x0{0, 2};
    auto r = check_equivariance(0.0, 0.0, 0.0, x0, {0.0, 1.0});
    CHECK(r.max_deviation == 0.0);
  }
  SUBCASE("random time-dependent triples") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<CoefficientCurve> b;
      for (int j = 0; j < 3; ++j) {
        const double c0 = u(rng), c1 = u(rng), w = 1 + std::abs(u(rng));
        b.push_back(CoefficientCurve::parse(std::to_string(c0) + " + " + std::to_string(c1) + "*sin(" +
                                            std::to_string(w) + "*t)"));
      }
      const std::vector<double> x0{u(rng), 1 + std::abs(u(rng))};
      auto r = check_equivariance(b[0], b[1], b[2], x0, {0.0, 2.0});
      CHECK(r.max_deviation < 1e-6);
      CHECK(r.det_deviation < 1e-6);
      CHECK(r.compared > 0);
    }
  }
  CHECK_THROWS_AS(check_equivariance(1.0, 0.0, 1.0, std::vector<double>{1, 0}, {0.0, 1.0}), std::invalid_argument);
}
