#pragma once

// Superposition rules as level maps Psi on N^{m+1}: tangency of Psi to the
// prolonged fields, constancy along solution tuples, and reconstruction of
// the slot-0 solution by following a leaf with Newton's method.

#include "liesys/dynamics.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace liesys {

/// Psi: s expressions on the (m+1)-slot product chart, slot 0 the unknown.
/// Phi (optional): n expressions in slots 1..m and the constants k1..ks.
/// Partial rules (s < n) carry n - s constraint expressions on the product
/// chart cutting out the submanifold where the rule applies.
class SuperpositionRule {
 public:
  /// Throws std::invalid_argument on count mismatches and ParseError on bad
  /// expressions.
  SuperpositionRule(Chart base, int m, const std::vector<std::string>& psi,
                    const std::optional<std::vector<std::string>>& phi = std::nullopt,
                    const std::vector<std::string>& constraints = {});

  const Chart& base() const { return product_.base(); }
  const ProductChart& product() const { return product_; }
  int m() const { return m_; }
  int s() const { return static_cast<int>(psi_.size()); }
  bool is_partial() const { return !constraints_.empty(); }
  const std::vector<Expr>& psi() const { return psi_; }
  const std::optional<std::vector<Expr>>& phi() const { return phi_; }
  const std::vector<Expr>& constraints() const { return constraints_; }
  /// Variables of Phi: slot 1..m coordinates then k1..ks.
  const Chart& phi_chart() const { return phi_chart_; }

  static std::string constant_name(int j) { return "k" + std::to_string(j + 1); }

 private:
  int m_;
  ProductChart product_;
  Chart phi_chart_;
  std::vector<Expr> psi_;
  std::optional<std::vector<Expr>> phi_;
  std::vector<Expr> constraints_;
};

// ---------------------------------------------------------------------------
// Tangency

struct TangencyEntry {
  std::size_t field = 0;
  /// Index into psi, or into constraints when `constraint` is set.
  std::size_t component = 0;
  bool constraint = false;
  Expr residual;  // X~_field applied to the component
  ZeroVerdict verdict = ZeroVerdict::Zero;
  bool exact = true;
  /// Points of the constraint set (or random points) where the residual was sampled.
  int samples = 0;
  double max_abs = 0.0;
};

struct TangencyReport {
  std::vector<TangencyEntry> entries;
  /// Every residual is Zero, or vanishes at every sampled point of the
  /// constraint set for partial rules.
  bool tangent = true;
  /// All verdicts were decided symbolically.
  bool exact = true;
};

struct TangencyOptions {
  int samples = 32;
  std::uint64_t seed = 0x7a1;
  /// Relative threshold for "vanishes at a sampled point".
  double zero_threshold = 1e-9;
};

/// Residuals X~_alpha(Psi^j) for every basis field and component. For
/// partial rules the residuals (and X~_alpha of each constraint) are judged
/// on the constraint set, sampled by projecting random points onto it.
TangencyReport verify_tangency(const SuperpositionRule& rule, std::span<const VectorField> fields,
                               const TangencyOptions& options = {});

// ---------------------------------------------------------------------------
// Numerical use of a rule

/// Psi at a product point (slot-major concatenation of m+1 points).
std::vector<double> evaluate_psi(const SuperpositionRule& rule, std::span<const double> product_point);

/// k := Psi(x_(0)(t0), x_(1)(t0), ..., x_(m)(t0)).
std::vector<double> constants_from_initial(const SuperpositionRule& rule, std::span<const double> x0,
                                           std::span<const std::vector<double>> particular);

struct DriftReport {
  std::vector<double> initial;  // Psi at the first grid point
  std::vector<double> drift;    // max |Psi(t) - Psi(t0)| per component
  double max_drift = 0.0;
  double tol_const = 1e-6;
  bool pass = false;
  /// First grid time at which Psi was not finite.
  std::optional<double> singular_time;
};

/// Drift of Psi along a tuple of m+1 trajectories on a shared grid
/// (slot 0 first). The system is used for dimension checks only.
DriftReport verify_along_solutions(const SuperpositionRule& rule, const LieSystem& sys,
                                   std::span<const Trajectory> tuple, double tol_const = 1e-6);

struct NewtonOptions {
  double residual_tol = 1e-10;
  int max_iterations = 50;
  int max_halvings = 8;
  /// With Phi present, one Newton solve every this many grid points.
  int crosscheck_every = 10;
};

class NewtonFailure : public std::runtime_error {
 public:
  NewtonFailure(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

struct Reconstruction {
  Trajectory solution;
  bool used_phi = false;
  int newton_solves = 0;
  int newton_iterations = 0;
  /// Max |Phi - Newton| over the cross-check points (Phi rules only).
  double crosscheck = 0.0;
};

/// Solves Psi(x0, x_(1)(t_j), ...) = k (and constraints = 0) at every grid
/// time of the particular solutions, warm-starting from t_{j-1}. With Phi
/// present Phi is evaluated directly and cross-checked periodically.
/// Throws NewtonFailure on non-convergence or a singular Jacobian.
Reconstruction reconstruct(const SuperpositionRule& rule, std::span<const Trajectory> particular,
                           std::span<const double> k, std::span<const double> x0_guess,
                           const NewtonOptions& options = {});

/// One leaf solve at a single product configuration; exposed for the PDE
/// module. Returns the slot-0 point and adds to `iterations`.
std::vector<double> solve_leaf(const SuperpositionRule& rule, std::span<const std::vector<double>> particular,
                               std::span<const double> k, std::span<const double> guess, double t,
                               const NewtonOptions& options, int* iterations = nullptr);

struct PartialRuleOptions {
  double step = 1e-3;
  double tol_ode = 1e-4;
  double tol_constraint = 1e-8;
};

struct PartialRuleReport {
  double ode_residual = 0.0;
  double constraint_residual = 0.0;
  std::size_t grid_points = 0;
  bool pass = false;
};

/// Builds x0(t) from the rule (Phi, or Newton when absent) on a uniform grid
/// of the given step and checks its central-difference derivative against
/// the system, plus the constraints along the tuple.
PartialRuleReport verify_partial_rule(const SuperpositionRule& rule, const LieSystem& sys,
                                      std::span<const Trajectory> particular, std::span<const double> k,
                                      const PartialRuleOptions& options = {});

struct ConsistencyReport {
  /// Psi(Phi(x;k), x) - k canonically zero (componentwise), when decidable.
  bool symbolic = false;
  double max_error = 0.0;
  double max_constraint = 0.0;
  int evaluated = 0;
  int skipped = 0;
};

/// Phi inverts Psi on slot 0: checked symbolically and at random points.
/// Throws std::invalid_argument when the rule has no Phi.
ConsistencyReport check_phi_psi(const SuperpositionRule& rule, int samples = 100, std::uint64_t seed = 0xc0de);

/// Rank of dPsi/dx_(0) at random points; s for a usable rule.
int generic_jacobian_rank(const SuperpositionRule& rule, int samples = 16, std::uint64_t seed = 0x1ac);

}  // namespace liesys
