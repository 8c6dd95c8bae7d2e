#pragma once

// Symbolic scalar expressions over named variables.
//
// An Expr is an immutable expression tree. Every node also carries its
// canonical form: a quotient of coprime expanded polynomials with exact
// rational coefficients, where each distinct sin/cos/exp/ln application is
// treated as an extra indeterminate. Equality of canonical forms is decidable,
// which is what the bracket and curvature computations rely on.
//
// Grammar accepted by parse():
//
//   expr    := term  (("+" | "-") term)*
//   term    := unary (("*" | "/") unary)*
//   unary   := ("+" | "-") unary | power
//   power   := primary ("^" unary)?          exponent must be an integer constant
//   primary := number | identifier | identifier "(" expr ")" | "(" expr ")"
//   number  := digit+ ("." digit+)?          decimals are read exactly, 0.25 = 1/4
//   identifier := [A-Za-z_][A-Za-z0-9_]*
//
// Function names: sin, cos, exp, ln.

#include "liesys/polynomial.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace liesys {

/// Ordered list of unique coordinate names.
class Chart {
 public:
  Chart() = default;
  /// Throws std::invalid_argument on duplicate or invalid names.
  explicit Chart(std::vector<std::string> names);

  const std::vector<std::string>& names() const { return names_; }
  std::size_t dimension() const { return names_.size(); }
  bool contains(const std::string& name) const;
  /// Index of `name`, or -1.
  int index_of(const std::string& name) const;
  /// This chart followed by `extra` (duplicates rejected).
  Chart extended(const std::vector<std::string>& extra) const;

  friend bool operator==(const Chart& a, const Chart& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
};

class Expr;

namespace detail {

enum class NodeKind { Constant, Variable, Sum, Product, Power, Quotient, Apply };

struct ExprNode {
  NodeKind kind = NodeKind::Constant;
  Rational value;
  std::string name;
  long exponent = 0;
  Function fn = Function::Sin;
  std::vector<std::shared_ptr<const ExprNode>> children;
  RationalFunction canonical;
};

}  // namespace detail

class Expr {
 public:
  using NodeKind = detail::NodeKind;

  Expr();  // zero
  Expr(long value);             // NOLINT
  Expr(const Rational& value);  // NOLINT

  static Expr variable(const std::string& name);
  static Expr apply(Function fn, const Expr& arg);
  static Expr power(const Expr& base, long exponent);
  /// Tree rendering of a canonical form: sum of monomials over a monic
  /// denominator.
  static Expr from_canonical(const RationalFunction& rf);

  NodeKind kind() const { return node_->kind; }
  const RationalFunction& canonical() const { return node_->canonical; }
  /// Children of Sum/Product/Quotient/Power/Apply nodes.
  std::vector<Expr> children() const;
  const Rational& constant_value() const { return node_->value; }
  const std::string& variable_name() const { return node_->name; }
  long exponent() const { return node_->exponent; }
  Function function() const { return node_->fn; }

  bool is_constant() const { return canonical().is_constant(); }
  bool is_canonically_zero() const { return canonical().is_zero(); }
  /// Names of all variables, including those inside function arguments.
  std::set<std::string> variables() const;
  bool has_transcendentals() const;

  /// Infix rendering of the tree as built; parse(str()) reproduces it.
  std::string str() const;
  /// Infix rendering of the canonical form, e.g. "1 + 2*x".
  std::string canonical_str() const;

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  Expr& operator+=(const Expr& o) { return *this = *this + o; }
  Expr& operator-=(const Expr& o) { return *this = *this - o; }
  Expr& operator*=(const Expr& o) { return *this = *this * o; }

  const std::shared_ptr<const detail::ExprNode>& node() const { return node_; }
  explicit Expr(std::shared_ptr<const detail::ExprNode> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<const detail::ExprNode> node_;
};

/// True when a - b has the zero canonical form.
bool canonically_equal(const Expr& a, const Expr& b);

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position, std::string identifier = {});
  std::size_t position() const { return position_; }
  /// Offending identifier for unknown-identifier errors, empty otherwise.
  const std::string& identifier() const { return identifier_; }

 private:
  std::size_t position_;
  std::string identifier_;
};

/// Parses `text`; identifiers must be chart names or function names.
Expr parse(const std::string& text, const Chart& chart);

/// Exact partial derivative, returned in canonical form.
Expr differentiate(const Expr& e, const std::string& variable);

Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements);
Expr rename(const Expr& e, const std::map<std::string, std::string>& names);

enum class ZeroVerdict { Zero, NonZero, Unknown };

struct ZeroTest {
  ZeroVerdict verdict = ZeroVerdict::Zero;
  /// False when the verdict came from random sampling.
  bool exact = true;
  /// Number of sample points evaluated (0 for exact verdicts).
  int samples = 0;
};

const char* to_string(ZeroVerdict v);

/// Exact for expressions whose canonical form has no transcendental atoms
/// (or is identically zero); otherwise evaluates at `samples` random rational
/// points and returns NonZero on any nonzero value, Unknown when all vanish.
ZeroTest is_zero(const Expr& e, int samples = 32, std::uint64_t seed = 0x5eed);

double evaluate(const Expr& e, const std::map<std::string, double>& point);
/// Exact value over Q; nullopt if the expression has transcendentals or a
/// denominator vanishes at the point.
std::optional<Rational> evaluate_exact(const Expr& e, const std::map<std::string, Rational>& point);

/// Expression flattened to postfix code over a fixed variable order, for
/// repeated floating-point evaluation in integrators.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  /// Throws std::invalid_argument if `e` uses a variable outside `variables`.
  CompiledExpr(const Expr& e, const std::vector<std::string>& variables);
  double operator()(std::span<const double> values) const;

 private:
  enum class Op : std::uint8_t { Const, Var, Add, Mul, Div, Pow, Neg, Sin, Cos, Exp, Ln };
  struct Instr {
    Op op;
    std::uint32_t arg;  // variable index or operand count
    double value;       // constant or exponent
  };
  void emit(const Expr& e, const std::vector<std::string>& variables, int& depth);
  std::vector<Instr> code_;
  int max_depth_ = 0;
};

}  // namespace liesys
