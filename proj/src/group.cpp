#include "liesys/group.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace liesys {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::MatrixXd unflatten(std::span<const double> v, std::size_t d) {
  return Eigen::Map<const RowMajor>(v.data(), static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
}

}  // namespace

// ---------------------------------------------------------------------------
// MatrixCurve

MatrixCurve::MatrixCurve(std::vector<Eigen::MatrixXd> basis, std::vector<CoefficientCurve> coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  if (basis_.empty()) throw std::invalid_argument("matrix curve needs at least one basis matrix");
  if (basis_.size() != coefficients_.size())
    throw std::invalid_argument("matrix curve: " + std::to_string(basis_.size()) + " matrices but " +
                                std::to_string(coefficients_.size()) + " coefficients");
  d_ = static_cast<std::size_t>(basis_.front().rows());
  for (const auto& m : basis_)
    if (m.rows() != m.cols() || static_cast<std::size_t>(m.rows()) != d_ || d_ == 0)
      throw std::invalid_argument("matrix curve: basis matrices must be square of one size");
}

MatrixCurve MatrixCurve::from_entries(std::size_t d, const std::vector<std::string>& entries) {
  if (d == 0 || entries.size() != d * d)
    throw std::invalid_argument("matrix curve: expected " + std::to_string(d * d) + " entries");
  std::vector<Eigen::MatrixXd> basis;
  std::vector<CoefficientCurve> coeffs;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      Eigen::MatrixXd e = Eigen::MatrixXd::Zero(d, d);
      e(i, j) = 1.0;
      basis.push_back(std::move(e));
      coeffs.push_back(CoefficientCurve::parse(entries[i * d + j]));
    }
  return MatrixCurve(std::move(basis), std::move(coeffs));
}

MatrixCurve MatrixCurve::constant(const Eigen::MatrixXd& a) { return MatrixCurve({a}, {CoefficientCurve(1.0)}); }

std::vector<Eigen::MatrixXd> MatrixCurve::sl2_basis() {
  Eigen::MatrixXd a1(2, 2), a2(2, 2), a3(2, 2);
  a1 << 0, 1, 0, 0;
  a2 << 0.5, 0, 0, -0.5;
  a3 << 0, 0, -1, 0;
  return {a1, a2, a3};
}

MatrixCurve MatrixCurve::sl2(CoefficientCurve b1, CoefficientCurve b2, CoefficientCurve b3) {
  return MatrixCurve(sl2_basis(), {std::move(b1), std::move(b2), std::move(b3)});
}

Eigen::MatrixXd MatrixCurve::operator()(double t) const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d_, d_);
  for (std::size_t k = 0; k < basis_.size(); ++k) a += coefficients_[k](t) * basis_[k];
  return a;
}

double MatrixCurve::max_trace(double t0, double t1, int samples) const {
  double m = 0;
  for (int i = 0; i < samples; ++i) {
    const double t = samples == 1 ? t0 : t0 + (t1 - t0) * i / (samples - 1);
    m = std::max(m, std::abs((*this)(t).trace()));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Group equation

Eigen::MatrixXd GroupTrajectory::at(double time) const {
  const std::size_t d = g.empty() ? 0 : static_cast<std::size_t>(g.front().rows());
  return unflatten(flat.at(time), d);
}

GroupTrajectory solve_group_equation(const MatrixCurve& a, std::pair<double, double> t_span,
                                     const IntegrateOptions& options) {
  const std::size_t d = a.dimension();
  const std::size_t n = d * d + 1;
  Rhs rhs = [&a, d](double t, std::span<const double> y, std::span<double> dy) {
    const Eigen::MatrixXd at = a(t);
    RowMajor dg = at * unflatten(y, d);
    std::copy(dg.data(), dg.data() + d * d, dy.begin());
    dy[d * d] = at.trace();
  };
  std::vector<double> y0(n, 0.0);
  for (std::size_t i = 0; i < d; ++i) y0[i * d + i] = 1.0;

  GroupTrajectory out;
  out.flat = integrate(rhs, y0, t_span, options);
  out.blew_up = out.flat.truncated();
  out.truncation_time = out.flat.truncation_time;
  out.t = out.flat.t;
  for (std::size_t k = 0; k < out.flat.size(); ++k) {
    Eigen::MatrixXd g = unflatten(out.flat.x[k], d);
    const double liouville = std::abs(g.determinant() - std::exp(out.flat.x[k][d * d]));
    out.liouville = std::max(out.liouville, liouville);
    out.g.push_back(std::move(g));
  }
  for (const auto& s : out.flat.segments) {
    const double tm = s.t0 + 0.5 * s.h;
    const Eigen::MatrixXd g = unflatten(out.flat.at(tm), d);
    const Eigen::MatrixXd gdot = unflatten(out.flat.derivative_at(tm), d);
    const double defect = (gdot * g.inverse() - a(tm)).cwiseAbs().maxCoeff();
    out.defect.emplace_back(tm, defect);
    out.max_defect = std::max(out.max_defect, defect);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Actions

GroupAction GroupAction::linear(std::size_t d) {
  if (d == 0) throw std::invalid_argument("linear action needs d >= 1");
  return GroupAction(Kind::Linear, d, "linear");
}

GroupAction GroupAction::mobius() { return GroupAction(Kind::Mobius, 2, "mobius"); }

GroupAction GroupAction::by_name(const std::string& name, std::size_t d) {
  if (name == "linear") return linear(d);
  if (name == "mobius") return mobius();
  throw std::invalid_argument("unknown action '" + name + "' (expected linear or mobius)");
}

std::vector<double> GroupAction::act(const Eigen::MatrixXd& g, std::span<const double> x) const {
  if (static_cast<std::size_t>(g.rows()) != d_ || static_cast<std::size_t>(g.cols()) != d_)
    throw std::invalid_argument("action '" + name_ + "': group element has the wrong size");
  if (x.size() != space_dimension())
    throw std::invalid_argument("action '" + name_ + "': point has dimension " + std::to_string(x.size()));
  if (kind_ == Kind::Linear) {
    Eigen::VectorXd v = g * Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    return {v.data(), v.data() + v.size()};
  }
  const double p = g(0, 0) * x[0] + g(0, 1), q = g(1, 0) * x[0] + g(1, 1);
  if (q == 0.0) return {std::copysign(std::numeric_limits<double>::infinity(), p)};
  return {p / q};
}

Eigen::Vector2d GroupAction::act_projective(const Eigen::MatrixXd& g, const Eigen::Vector2d& pq) const {
  if (kind_ != Kind::Mobius) throw std::logic_error("projective coordinates only exist for the Mobius action");
  Eigen::Vector2d v = g * pq;
  return v / v.norm();
}

ActSolveResult act_solve(const MatrixCurve& a, const GroupAction& action, std::span<const double> x0,
                         std::pair<double, double> t_span, const IntegrateOptions& options) {
  if (a.dimension() != action.group_dimension())
    throw std::invalid_argument("matrix curve of size " + std::to_string(a.dimension()) +
                                " does not match the action '" + action.name() + "'");
  if (x0.size() != action.space_dimension())
    throw std::invalid_argument("initial point has dimension " + std::to_string(x0.size()));
  const GroupTrajectory gt = solve_group_equation(a, t_span, options);

  ActSolveResult out;
  Trajectory& tr = out.trajectory;
  tr.blew_up = gt.flat.blew_up;
  tr.step_underflow = gt.flat.step_underflow;
  tr.truncation_time = gt.truncation_time;
  tr.t = gt.t;
  for (const auto& g : gt.g) tr.x.push_back(action.act(g, x0));
  if (action.kind() != GroupAction::Kind::Mobius) return out;

  const Eigen::Vector2d pq0(x0[0], 1.0);
  auto q_at = [&](double t) { return (gt.at(t) * pq0)(1); };
  for (std::size_t k = 0; k < gt.g.size(); ++k) {
    out.projective.push_back(action.act_projective(gt.g[k], pq0));
    if (k == 0) continue;
    double lo = gt.t[k - 1], hi = gt.t[k];
    double qlo = (gt.g[k - 1] * pq0)(1), qhi = (gt.g[k] * pq0)(1);
    if (qlo == 0.0 || (qlo > 0) == (qhi > 0)) continue;
    for (int it = 0; it < 60 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
      const double mid = 0.5 * (lo + hi), qm = q_at(mid);
      if ((qm > 0) == (qlo > 0)) {
        lo = mid;
        qlo = qm;
      } else {
        hi = mid;
      }
    }
    out.pole_crossings.push_back(0.5 * (lo + hi));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SL(2) and the Riccati equation

double sl2_generator_mismatch(int samples, std::uint64_t seed) {
  const auto basis = MatrixCurve::sl2_basis();
  const GroupAction mobius = GroupAction::mobius();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-2.0, 2.0);
  const double s = 1e-4;
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  double worst = 0;
  for (int i = 0; i < samples; ++i) {
    const double x = box(rng);
    const double expected[3] = {1.0, x, x * x};
    for (std::size_t k = 0; k < basis.size(); ++k) {
      const Eigen::Matrix2d a = basis[k];
      const Eigen::Matrix2d a2 = a * a, a3 = a2 * a;
      const Eigen::Matrix2d plus = id + s * a + s * s / 2 * a2 + s * s * s / 6 * a3;
      const Eigen::Matrix2d minus = id - s * a + s * s / 2 * a2 - s * s * s / 6 * a3;
      const double gen = (mobius.act(plus, std::span(&x, 1))[0] - mobius.act(minus, std::span(&x, 1))[0]) / (2 * s);
      worst = std::max(worst, std::abs(gen - expected[k]));
    }
  }
  return worst;
}

EquivarianceReport check_equivariance(const CoefficientCurve& b1, const CoefficientCurve& b2,
                                      const CoefficientCurve& b3, std::span<const double> x0,
                                      std::pair<double, double> t_span, double margin,
                                      const IntegrateOptions& options) {
  if (x0.size() != 2) throw std::invalid_argument("equivariance check needs a point of R^2");
  if (x0[1] == 0.0) throw std::invalid_argument("equivariance check needs x2 != 0 at the start");

  EquivarianceReport report;
  report.generator_mismatch = sl2_generator_mismatch();
  report.sign_convention_ok = report.generator_mismatch < 1e-6;

  const MatrixCurve a = MatrixCurve::sl2(b1, b2, b3);
  Rhs linear = [&a](double t, std::span<const double> x, std::span<double> dx) {
    const Eigen::Matrix2d m = a(t);
    dx[0] = m(0, 0) * x[0] + m(0, 1) * x[1];
    dx[1] = m(1, 0) * x[0] + m(1, 1) * x[1];
  };
  const Trajectory lin = integrate(linear, x0, t_span, options);

  const Chart chart({"x"});
  const LieSystem riccati({VectorField::parse(chart, {"1"}), VectorField::parse(chart, {"x"}),
                           VectorField::parse(chart, {"x^2"})},
                          {b1, b2, b3});
  const double r0 = x0[0] / x0[1];
  const Trajectory ric = integrate(riccati, std::span(&r0, 1), t_span, options);

  const double end = std::min(lin.end_time(), ric.end_time());
  for (std::size_t k = 0; k < ric.size(); ++k) {
    if (ric.t[k] > end) break;
    const auto v = lin.at(ric.t[k]);
    if (std::abs(v[1]) < margin * std::hypot(v[0], v[1])) {
      ++report.excluded;
      continue;
    }
    report.max_deviation = std::max(report.max_deviation, std::abs(v[0] / v[1] - ric.x[k][0]));
    ++report.compared;
  }

  const GroupTrajectory gt = solve_group_equation(a, t_span, options);
  for (const auto& g : gt.g) report.det_deviation = std::max(report.det_deviation, std::abs(g.determinant() - 1.0));
  return report;
}

}  // namespace liesys
