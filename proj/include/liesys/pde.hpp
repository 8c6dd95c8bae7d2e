#pragma once

// First-order PDE systems dx/dt^a = Y_a(t, x), a = 1..s: the zero-curvature
// condition, path-based solving with path-independence audits, and
// superposition on grids over R^s.

#include "liesys/superposition.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace liesys {

/// Y_a = sum_alpha u_a^alpha(t) X_alpha with t-independent X_alpha.
struct LieDecomposition {
  std::vector<VectorField> basis;
  /// u[a][alpha], expressions in the parameters only.
  std::vector<std::vector<Expr>> u;
};

class PdeSystem {
 public:
  /// fields[a][i] are expressions in the parameters and the chart. Throws
  /// std::invalid_argument on count mismatches, overlapping names, or a
  /// decomposition whose expansion differs from the fields.
  PdeSystem(Chart parameters, Chart chart, std::vector<std::vector<Expr>> fields,
            std::optional<LieDecomposition> decomposition = std::nullopt);

  static PdeSystem parse(const Chart& parameters, const Chart& chart,
                         const std::vector<std::vector<std::string>>& fields);
  /// Fields expanded from the decomposition.
  static PdeSystem from_decomposition(const Chart& parameters, LieDecomposition decomposition);
  /// u_x = a u^2 + b u + c, u_y = d u^2 + e u + f with coefficient
  /// expressions in x, y, decomposed over the Riccati fields 1, u, u^2.
  static PdeSystem riccati(const std::array<std::string, 6>& abcdef);
  /// "t" for s = 1, otherwise t1..ts.
  static Chart default_parameters(std::size_t s);

  std::size_t s() const { return parameters_.dimension(); }
  std::size_t n() const { return chart_.dimension(); }
  const Chart& parameters() const { return parameters_; }
  const Chart& chart() const { return chart_; }
  /// Parameters followed by the chart coordinates.
  const Chart& joint_chart() const { return joint_; }
  const std::vector<std::vector<Expr>>& fields() const { return fields_; }
  const std::optional<LieDecomposition>& decomposition() const { return decomposition_; }

  /// out = Y_a(t, x).
  void velocity(std::size_t a, std::span<const double> t, std::span<const double> x, std::span<double> out) const;

 private:
  Chart parameters_, chart_, joint_;
  std::vector<std::vector<Expr>> fields_;
  std::optional<LieDecomposition> decomposition_;
  std::vector<std::vector<CompiledExpr>> compiled_;
};

// ---------------------------------------------------------------------------
// Zero curvature

/// d Y_b / d t^a - d Y_a / d t^b + [Y_a, Y_b], componentwise and canonical.
std::vector<Expr> curvature_residual(const PdeSystem& sys, std::size_t a, std::size_t b);

struct CurvatureEntry {
  std::size_t a = 0, b = 0, component = 0;
  Expr residual;
  ZeroTest test;
};

struct CurvatureReport {
  /// Pairs a < b only; the (b, a) residuals are the negatives.
  std::vector<CurvatureEntry> entries;
  /// Every residual is exactly Zero.
  bool flat = true;
  /// No residual was found nonzero (sampling verdicts count as zero).
  bool probably_flat = true;
};

CurvatureReport curvature(const PdeSystem& sys, int samples = 32, std::uint64_t seed = 0xc0f);

/// Coefficients of u^2, u, 1 in the closedness condition of
/// (a u^2 + b u + c) dx + (d u^2 + e u + f) dy for arbitrary u(x, y):
/// d_x - a_y + b d - a e,  e_x - b_y + 2 (c d - a f),  f_x - c_y + c e - b f.
std::array<Expr, 3> riccati_closedness(const std::array<std::string, 6>& abcdef);

/// The decomposed form of the curvature: for every pair a < b and gamma,
/// d u_b^gamma / d t^a - d u_a^gamma / d t^b + sum u_a^alpha u_b^beta c_{alpha beta}^gamma.
struct BracketCombinationReport {
  bool expansion_ok = false;
  bool closed = false;
  StructureConstants constants;
  /// residuals[pair][gamma], pairs in the order (0,1), (0,2), ..., (1,2), ...
  std::vector<std::vector<Expr>> residuals;
  bool zero = false;
};

/// Throws std::invalid_argument when the system has no decomposition.
BracketCombinationReport bracket_combination(const PdeSystem& sys);

// ---------------------------------------------------------------------------
// Solving along staircase paths

/// Moves from the base point, each changing one parameter: (axis, new value).
using Staircase = std::vector<std::pair<std::size_t, double>>;

/// Axis-by-axis path from `base` to `target` in the given axis order.
Staircase axis_staircase(std::span<const double> base, std::span<const double> target,
                         std::span<const std::size_t> order);
/// Each axis displacement cut into `pieces` random parts, moves shuffled.
Staircase random_staircase(std::span<const double> base, std::span<const double> target, int pieces,
                           std::uint64_t seed);

class PathBlowUp : public std::runtime_error {
 public:
  PathBlowUp(const std::string& what, std::size_t leg) : std::runtime_error(what), leg_(leg) {}
  std::size_t leg() const { return leg_; }

 private:
  std::size_t leg_;
};

struct PathSolution {
  std::vector<double> endpoint;
  /// Parameter point and state at the end of every leg, base first.
  std::vector<std::vector<double>> corners;
  std::vector<std::vector<double>> states;
  std::size_t steps = 0;
};

/// Integrates along each leg with the other parameters frozen. Throws
/// PathBlowUp when a leg is truncated.
PathSolution path_solve(const PdeSystem& sys, std::span<const double> x0, std::span<const double> base,
                        const Staircase& path, const IntegrateOptions& options = {});

struct AuditOptions {
  int paths = 8;
  int pieces = 3;
  std::uint64_t seed = 0xa0d17;
  IntegrateOptions integrate;
};

struct AuditReport {
  std::vector<std::vector<double>> endpoints;
  /// Largest max-norm distance between two endpoints.
  double spread = 0.0;
};

/// The first two paths are the axis orders 1..s and s..1, the rest random
/// staircases; with s = 1 a single path is run. Paths run concurrently.
AuditReport path_independence_audit(const PdeSystem& sys, std::span<const double> x0, std::span<const double> base,
                                    std::span<const double> target, const AuditOptions& options = {});

/// Values on a rectangular grid over R^s, row-major in the parameters.
struct PdeGrid {
  std::vector<std::vector<double>> axes;
  std::vector<std::vector<double>> values;

  std::size_t size() const { return values.size(); }
  std::vector<double> point(std::size_t flat) const;
  std::size_t flat_index(std::span<const std::size_t> index) const;
};

/// Solution with x = x0 at the grid corner (axes[a].front()), reached by
/// integrating along axis 1 first, then axis 2 from every point, and so on.
/// Axes must be strictly increasing.
PdeGrid solve_on_grid(const PdeSystem& sys, std::span<const double> x0, std::vector<std::vector<double>> axes,
                      const IntegrateOptions& options = {});

/// Grid indices in boustrophedon order: consecutive entries are neighbours.
std::vector<std::size_t> snake_order(std::span<const std::vector<double>> axes);

struct PdeSuperposition {
  PdeGrid solution;
  int newton_iterations = 0;
};

/// Leaf solve at every grid point of the m particular solutions (which must
/// share the grid), visited in snake order for warm starts. The rule must
/// be tangent to the decomposition's basis (std::invalid_argument otherwise).
PdeSuperposition pde_superpose(const PdeSystem& sys, const SuperpositionRule& rule,
                               std::span<const PdeGrid> particular, std::span<const double> k,
                               std::span<const double> x0_guess, const NewtonOptions& options = {});

}  // namespace liesys
