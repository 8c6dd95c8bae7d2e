#pragma once

// Lie systems on matrix groups: the right-invariant equation g' g^-1 = a(t),
// solutions pushed to homogeneous spaces through actions, and the SL(2,R)
// to Riccati equivariance check.

#include "liesys/dynamics.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace liesys {

/// a(t) = sum_alpha b_alpha(t) a_alpha with constant basis matrices.
class MatrixCurve {
 public:
  MatrixCurve(std::vector<Eigen::MatrixXd> basis, std::vector<CoefficientCurve> coefficients);
  /// Entry-wise curves, row-major; each entry an expression in t.
  static MatrixCurve from_entries(std::size_t d, const std::vector<std::string>& entries);
  static MatrixCurve constant(const Eigen::MatrixXd& a);
  /// a(t) = [[b2/2, b1], [-b3, -b2/2]] = b1 a1 + b2 a2 + b3 a3 with
  /// a1 = [[0,1],[0,0]], a2 = diag(1/2,-1/2), a3 = [[0,0],[-1,0]].
  static MatrixCurve sl2(CoefficientCurve b1, CoefficientCurve b2, CoefficientCurve b3);
  static std::vector<Eigen::MatrixXd> sl2_basis();

  std::size_t dimension() const { return d_; }
  const std::vector<Eigen::MatrixXd>& basis() const { return basis_; }
  const std::vector<CoefficientCurve>& coefficients() const { return coefficients_; }
  Eigen::MatrixXd operator()(double t) const;
  /// max |trace a(t)| over `samples` points of [t0, t1].
  double max_trace(double t0, double t1, int samples = 64) const;

 private:
  std::size_t d_;
  std::vector<Eigen::MatrixXd> basis_;
  std::vector<CoefficientCurve> coefficients_;
};

struct GroupTrajectory {
  std::vector<double> t;
  std::vector<Eigen::MatrixXd> g;
  /// (t, |g' g^-1 - a(t)|_max) at the midpoints of accepted steps, with g'
  /// from the derivative of the continuous output.
  std::vector<std::pair<double, double>> defect;
  double max_defect = 0.0;
  /// max |det g(t) - exp(int_0^t trace a)| over the grid.
  double liouville = 0.0;
  bool blew_up = false;
  double truncation_time = 0.0;
  /// The flattened solution (row-major g, then int trace a) with continuous output.
  Trajectory flat;

  Eigen::MatrixXd at(double time) const;
};

/// Integrates g' = a(t) g, g(t0) = I with the Dormand-Prince pair.
GroupTrajectory solve_group_equation(const MatrixCurve& a, std::pair<double, double> t_span,
                                     const IntegrateOptions& options = {});

/// Phi : G x N -> N. The Mobius action works in projective coordinates
/// (p : q), x = p/q, so the pole q = 0 is an ordinary point (1 : 0).
class GroupAction {
 public:
  enum class Kind { Linear, Mobius };

  static GroupAction linear(std::size_t d);
  static GroupAction mobius();
  /// "linear" or "mobius"; throws std::invalid_argument otherwise.
  static GroupAction by_name(const std::string& name, std::size_t d = 2);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::size_t group_dimension() const { return d_; }
  /// Dimension of N in affine coordinates.
  std::size_t space_dimension() const { return kind_ == Kind::Linear ? d_ : 1; }

  /// Affine action; the Mobius image of a point mapped to the pole is +-inf.
  std::vector<double> act(const Eigen::MatrixXd& g, std::span<const double> x) const;
  /// Mobius action on homogeneous coordinates (normalized to unit length).
  Eigen::Vector2d act_projective(const Eigen::MatrixXd& g, const Eigen::Vector2d& pq) const;

 private:
  GroupAction(Kind kind, std::size_t d, std::string name) : kind_(kind), d_(d), name_(std::move(name)) {}
  Kind kind_;
  std::size_t d_;
  std::string name_;
};

struct ActSolveResult {
  /// x(t) = Phi(g(t), x0) in affine coordinates on the group grid.
  Trajectory trajectory;
  /// Mobius only: homogeneous coordinates (unit length) on the same grid.
  std::vector<Eigen::Vector2d> projective;
  /// Times where the Mobius image passed through the pole (chart switches).
  std::vector<double> pole_crossings;
};

ActSolveResult act_solve(const MatrixCurve& a, const GroupAction& action, std::span<const double> x0,
                         std::pair<double, double> t_span, const IntegrateOptions& options = {});

/// Largest deviation of the Mobius action of a small one-parameter subgroup
/// exp(s a_alpha) from the Riccati fields 1, x, x^2 at sample points.
/// The catalog fixes tau_* X^R_alpha = -X_alpha, i.e. the Riccati system on N
/// is x' = b1 + b2 x + b3 x^2 for a(t) = sum b_alpha a_alpha.
double sl2_generator_mismatch(int samples = 16, std::uint64_t seed = 0x512);

struct EquivarianceReport {
  double max_deviation = 0.0;
  std::size_t compared = 0;
  /// Grid points skipped for being within `margin` of the pole.
  std::size_t excluded = 0;
  /// Generators of the catalogued Mobius action agree with the Riccati basis.
  bool sign_convention_ok = false;
  double generator_mismatch = 0.0;
  /// max |det g - 1| along the group solution.
  double det_deviation = 0.0;
};

/// Integrates the linear sl(2) system from x0 = (x1, x2), forms x1/x2 and
/// compares it to the direct Riccati solution from x1/x2 on the Riccati
/// grid, skipping points with |x2| < margin * |x|.
EquivarianceReport check_equivariance(const CoefficientCurve& b1, const CoefficientCurve& b2,
                                      const CoefficientCurve& b3, std::span<const double> x0,
                                      std::pair<double, double> t_span, double margin = 0.05,
                                      const IntegrateOptions& options = {});

}  // namespace liesys
