#pragma once

// Linear algebra of vector fields over the constants: span membership,
// closure under brackets (structure constants), and the rank criterion for
// the number of particular solutions a superposition rule needs.

#include "liesys/geometry.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace liesys {

struct SpanResult {
  bool in_span = false;
  /// c_alpha with target = sum c_alpha X_alpha when in_span. Otherwise a
  /// best-effort solution of the consistent equations (free unknowns = 0).
  std::vector<Rational> coefficients;
  /// target - sum c_alpha X_alpha; zero iff in_span.
  VectorField residual;
};

/// Exact coefficient matching over Q. Components are brought to a common
/// denominator and compared monomial by monomial; transcendental atoms count
/// as independent indeterminates. Throws std::invalid_argument on chart mismatch.
SpanResult span_coefficients(const VectorField& target, std::span<const VectorField> basis);

/// Indices of a maximal R-independent subfamily, keeping earlier fields first.
std::vector<std::size_t> independent_subset(std::span<const VectorField> fields);

using StructureConstants = std::vector<std::vector<std::vector<Rational>>>;

struct BracketWitness {
  std::size_t alpha = 0, beta = 0;
  VectorField bracket;
  VectorField residual;
};

struct ClosureOptions {
  bool complete = false;
  std::size_t dimension_cap = 32;
};

struct LieClosureReport {
  std::vector<VectorField> basis;
  /// Input positions dropped as R-dependent on earlier fields.
  std::vector<std::size_t> dropped;
  /// c[alpha][beta][gamma]: [X_alpha, X_beta] = sum_gamma c X_gamma. Empty unless closed.
  StructureConstants constants;
  bool closed = false;
  /// Completion stopped at the cap: no finite closure found up to it.
  bool cap_exceeded = false;
  /// First bracket outside the span (not closed only).
  std::optional<BracketWitness> witness;
  /// Basis dimension after each completion round (starts with the pruned input).
  std::vector<std::size_t> dimension_trace;
  /// max |cyclic Jacobi sum| over all index quadruples; exact.
  Rational jacobi_residual;

  std::size_t dimension() const { return basis.size(); }
};

LieClosureReport closure_test(std::span<const VectorField> fields, const ClosureOptions& options = {});

/// Cyclic Jacobi sum of structure constants, maximum absolute value.
Rational jacobi_residual(const StructureConstants& c);

/// Fields compiled for fast floating-point evaluation at a point of the chart.
class CompiledFields {
 public:
  explicit CompiledFields(std::span<const VectorField> fields);
  std::size_t count() const { return fields_.size(); }
  std::size_t dimension() const { return n_; }
  /// Value of field alpha, component i at x.
  double operator()(std::size_t alpha, std::size_t i, std::span<const double> x) const {
    return fields_[alpha][i](x);
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::vector<CompiledExpr>> fields_;
};

/// (k n) x r matrix whose column alpha stacks X_alpha evaluated at each of
/// the k points (the prolonged field on N^k).
std::vector<double> evaluation_matrix(const CompiledFields& fields, std::span<const std::vector<double>> points,
                                      std::size_t& rows, std::size_t& cols);

/// Numerical rank with threshold `rel_threshold * sigma_max`. Non-finite
/// entries give -1.
int numerical_rank(std::span<const double> matrix, std::size_t rows, std::size_t cols,
                   double rel_threshold = 1e-10);

/// Rank of the prolonged fields at a tuple of points.
int prolonged_rank(const CompiledFields& fields, std::span<const std::vector<double>> points,
                   double rel_threshold = 1e-10);

struct SamplingOptions {
  int samples = 32;
  std::uint64_t seed = 20070613;
  /// Fraction of retained tuples that must reach full rank.
  double vote = 0.9;
  /// Points are drawn from the lattice (Z / 1024) cap [-box, box]^n.
  double box = 2.0;
  double rank_threshold = 1e-10;
  /// Tuples for which this returns true are redrawn (non-generic). The
  /// default rejects coincident slots (max-norm distance < 1e-3).
  std::function<bool(std::span<const std::vector<double>>)> exclude;
};

bool coincident_slots(std::span<const std::vector<double>> points, double separation = 1e-3);

/// Deterministic random tuple of k points for sample index j.
std::vector<std::vector<double>> sample_tuple(const SamplingOptions& options, std::size_t n, std::size_t k,
                                              std::uint64_t stream);

struct FundamentalSizeReport {
  /// Least k with full rank r at >= vote of retained samples; 0 when none up to r.
  int m = 0;
  int r = 0;
  int n = 0;
  /// Modal rank at k = 1..m.
  std::vector<int> rank_profile;
  /// Fraction of full-rank samples at k = 1..m.
  std::vector<double> full_rank_fraction;
  int samples = 0;
  /// Tuples discarded: non-finite evaluations, or rank-deficient at k = m.
  int discarded = 0;
  std::uint64_t seed = 0;
  /// False when no k <= r reached full rank (inconsistent with the theory for
  /// an independent family) or the input fields were dependent.
  bool consistent = true;
  std::string message;
};

/// Requires an R-independent family (use independent_subset first).
FundamentalSizeReport minimal_m(std::span<const VectorField> fields, const SamplingOptions& options = {});

}  // namespace liesys
