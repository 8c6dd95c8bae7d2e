#pragma once

// Time-dependent Lie systems Y(t,x) = sum_alpha b_alpha(t) X_alpha(x) and an
// adaptive Dormand-Prince 5(4) integrator with continuous output.

#include "liesys/algebra.hpp"

#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace liesys {

/// b(t): an expression in the single variable `t`, or a table with linear
/// interpolation.
class CoefficientCurve {
 public:
  CoefficientCurve() : CoefficientCurve(Expr(0L)) {}
  CoefficientCurve(const Expr& e);  // NOLINT: expressions convert implicitly
  CoefficientCurve(double c);       // NOLINT
  static CoefficientCurve parse(const std::string& text);
  /// Times must be strictly increasing; throws std::invalid_argument otherwise.
  static CoefficientCurve tabulated(std::vector<double> times, std::vector<double> values);

  /// Throws std::domain_error outside the table or on a non-finite value.
  double operator()(double t) const;
  const std::optional<Expr>& expression() const { return expr_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }

  static const Chart& time_chart();

 private:
  std::optional<Expr> expr_;
  CompiledExpr compiled_;
  std::vector<double> times_, values_;
};

class LieSystem {
 public:
  LieSystem() = default;
  /// Throws std::invalid_argument on count or chart mismatch or a dependent basis.
  LieSystem(std::vector<VectorField> basis, std::vector<CoefficientCurve> coefficients);

  const Chart& chart() const { return basis_.front().chart(); }
  const std::vector<VectorField>& basis() const { return basis_; }
  const std::vector<CoefficientCurve>& coefficients() const { return coefficients_; }
  const CompiledFields& compiled() const { return compiled_; }
  std::size_t dimension() const { return compiled_.dimension(); }

  /// out = sum_alpha b_alpha(t) X_alpha(x), no finiteness check.
  void velocity(double t, std::span<const double> x, std::span<double> out) const;

 private:
  std::vector<VectorField> basis_;
  std::vector<CoefficientCurve> coefficients_;
  CompiledFields compiled_{std::span<const VectorField>{}};
};

/// Y(t,x); throws std::domain_error on a non-finite coefficient or component.
std::vector<double> evaluate_field(const LieSystem& sys, double t, std::span<const double> x);

using Rhs = std::function<void(double t, std::span<const double> x, std::span<double> dx)>;

struct IntegrateOptions {
  /// Accepted steps satisfy |local error| <= tol * (1 + |x|) * min(h, 1) componentwise.
  double tol = 1e-9;
  /// Trajectory is truncated once max |x_i| exceeds this.
  double blowup = 1e8;
  std::size_t max_steps = 2'000'000;
  /// Optional output grid; when empty the accepted step points are returned.
  std::vector<double> grid;
};

/// Samples of x(t). The dense interpolant of every accepted step is kept, so
/// the solution can be evaluated anywhere inside [t.front(), end_time()].
class Trajectory {
 public:
  std::vector<double> t;
  std::vector<std::vector<double>> x;
  /// Integration stopped early: |x| exceeded the bound, or the step size underflowed.
  bool blew_up = false;
  bool step_underflow = false;
  double truncation_time = 0.0;

  bool truncated() const { return blew_up || step_underflow; }
  std::size_t size() const { return t.size(); }
  std::size_t dimension() const { return x.empty() ? 0 : x.front().size(); }
  /// Last time the continuous solution is available.
  double end_time() const;
  /// Continuous (4th-order) interpolant; throws std::out_of_range outside.
  std::vector<double> at(double time) const;
  /// Time derivative of the continuous interpolant.
  std::vector<double> derivative_at(double time) const;
  /// Same solution sampled on `grid` (points beyond end_time() are dropped).
  Trajectory resampled(std::span<const double> grid) const;

  struct Segment {
    double t0, h;
    std::vector<double> r;  // 5 * n interpolation coefficients
  };
  std::vector<Segment> segments;
};

/// Dormand-Prince 5(4), local extrapolation, Hairer's continuous extension.
Trajectory integrate(const Rhs& f, std::span<const double> x0, std::pair<double, double> t_span,
                     const IntegrateOptions& options = {});
Trajectory integrate(const LieSystem& sys, std::span<const double> x0, std::pair<double, double> t_span,
                     const IntegrateOptions& options = {});

struct FundamentalSetOptions {
  IntegrateOptions integrate;
  SamplingOptions sampling;
  int max_resamples = 100;
};

struct FundamentalSet {
  std::vector<std::vector<double>> initial;
  /// All on one grid: the union of the individual adaptive grids, cut at the
  /// earliest truncation.
  std::vector<Trajectory> solutions;
  int resamples = 0;
};

/// True when the prolonged basis has full rank r at the tuple of points.
bool is_fundamental_tuple(const LieSystem& sys, std::span<const std::vector<double>> points,
                          double rel_threshold = 1e-10);

/// Integrates m solutions concurrently. With `initial` supplied, it must pass
/// is_fundamental_tuple (std::invalid_argument otherwise); when empty, random
/// tuples are drawn until one passes (std::runtime_error after max_resamples).
FundamentalSet fundamental_set(const LieSystem& sys, int m, std::pair<double, double> t_span,
                               std::span<const std::vector<double>> initial = {},
                               const FundamentalSetOptions& options = {});

/// Sorted union of the sample times, cut at the earliest end time.
std::vector<double> common_grid(std::span<const Trajectory> trajectories);

}  // namespace liesys
