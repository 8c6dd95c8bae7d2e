#pragma once

// Vector fields on a coordinate chart, Lie brackets, and diagonal
// prolongations to the (m+1)-fold product N x ... x N.

#include "liesys/expr.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace liesys {

/// X = sum_i A^i(x) d/dx^i with symbolic components.
class VectorField {
 public:
  VectorField() = default;
  /// Throws std::invalid_argument if the component count differs from the
  /// chart dimension or a component uses a variable outside the chart.
  VectorField(Chart chart, std::vector<Expr> components);
  static VectorField parse(const Chart& chart, const std::vector<std::string>& components);
  static VectorField zero(const Chart& chart);

  const Chart& chart() const { return chart_; }
  const std::vector<Expr>& components() const { return components_; }
  const Expr& operator[](std::size_t i) const { return components_[i]; }
  std::size_t dimension() const { return components_.size(); }
  bool is_zero() const;

  /// Directional derivative X(f) = sum_i A^i df/dx^i.
  Expr apply(const Expr& f) const;

  /// Component list in canonical form, e.g. "[1, 2*x]".
  std::string str() const;

  friend VectorField operator+(const VectorField& a, const VectorField& b);
  friend VectorField operator-(const VectorField& a, const VectorField& b);
  /// Pointwise product with a function (which may depend on any variable of the chart).
  friend VectorField operator*(const Expr& f, const VectorField& x);

 private:
  Chart chart_;
  std::vector<Expr> components_;
};

bool canonically_equal(const VectorField& a, const VectorField& b);

/// [X,Y]^i = sum_j (X^j dY^i/dx^j - Y^j dX^i/dx^j), canonicalized.
/// Throws std::invalid_argument when the charts differ.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

/// N^{copies} with coordinates named `<var>_<slot>`; slot 0 holds the
/// unknown solution in superposition work.
class ProductChart {
 public:
  ProductChart(Chart base, int copies);

  const Chart& base() const { return base_; }
  int copies() const { return copies_; }
  const Chart& chart() const { return chart_; }

  static std::string slot_name(const std::string& var, int slot);
  std::vector<std::string> slot_variables(int slot) const;
  std::map<std::string, std::string> to_slot(int slot) const;
  std::map<std::string, std::string> from_slot(int slot) const;
  /// Slot that owns a product-chart variable, or -1.
  int slot_of(const std::string& product_var) const;

 private:
  Chart base_;
  int copies_;
  Chart chart_;
};

/// X~ = sum_a X_(a): X acting identically and independently in every slot.
VectorField diagonal_prolongation(const VectorField& x, const ProductChart& product);
VectorField diagonal_prolongation(const VectorField& x, int copies);

struct ProlongationCheck {
  bool is_prolongation = false;
  /// The field whose prolongation this is, when is_prolongation.
  std::optional<VectorField> base;
  /// Offending slot pair on failure: components of `slot` depend on `other`
  /// variables, or differ from slot-0 components (other = 0).
  int slot = -1;
  int other_slot = -1;
  std::string witness;
};

/// Symbolic test: every slot's components depend only on that slot's
/// variables and carry the same functions after renaming.
ProlongationCheck is_diagonal_prolongation(const VectorField& z, const ProductChart& product);

/// Relabels slots: slot a of the input becomes slot perm[a].
VectorField permute_slots(const VectorField& z, const ProductChart& product, std::span<const int> perm);

}  // namespace liesys
