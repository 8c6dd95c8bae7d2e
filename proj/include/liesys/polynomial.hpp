#pragma once

// Sparse multivariate polynomials and rational functions with exact rational
// coefficients. These are the canonical-form substrate behind liesys::Expr.

#include <gmpxx.h>

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace liesys {

using Rational = mpq_class;

namespace detail {
struct ExprNode;
}

enum class Function { Sin, Cos, Exp, Ln };

const char* function_name(Function fn);

/// An indeterminate of a polynomial: either a chart variable or an
/// application of a transcendental to a canonical argument (an "atom").
class Symbol {
 public:
  static Symbol variable(std::string name);
  static Symbol application(Function fn, std::shared_ptr<const detail::ExprNode> arg,
                            std::string key);

  bool is_variable() const { return !arg_; }
  /// Variable name, or the printed form `fn(arg)` for applications.
  const std::string& key() const { return key_; }
  Function function() const { return fn_; }
  const std::shared_ptr<const detail::ExprNode>& argument() const { return arg_; }

  friend bool operator<(const Symbol& a, const Symbol& b) {
    if (a.is_variable() != b.is_variable()) return a.is_variable();
    return a.key_ < b.key_;
  }
  friend bool operator==(const Symbol& a, const Symbol& b) {
    return a.is_variable() == b.is_variable() && a.key_ == b.key_;
  }
  friend bool operator!=(const Symbol& a, const Symbol& b) { return !(a == b); }

 private:
  std::string key_;
  Function fn_ = Function::Sin;
  std::shared_ptr<const detail::ExprNode> arg_;
};

/// Power product of symbols, kept sorted by symbol with positive exponents.
class Monomial {
 public:
  using Factor = std::pair<Symbol, unsigned>;

  Monomial() = default;
  explicit Monomial(const Symbol& s, unsigned power = 1);

  const std::vector<Factor>& factors() const { return factors_; }
  bool empty() const { return factors_.empty(); }
  unsigned degree() const { return degree_; }
  unsigned degree_in(const Symbol& s) const;
  /// The monomial with every power of `s` removed.
  Monomial without(const Symbol& s) const;
  /// True when every factor of `other` divides this.
  bool divisible_by(const Monomial& other) const;
  /// this / other; requires divisible_by(other).
  Monomial quotient(const Monomial& other) const;

  friend Monomial operator*(const Monomial& a, const Monomial& b);
  friend bool operator==(const Monomial& a, const Monomial& b) { return a.factors_ == b.factors_; }

  struct GradedLexLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
  };

 private:
  std::vector<Factor> factors_;
  unsigned degree_ = 0;
};

class Polynomial {
 public:
  using Terms = std::map<Monomial, Rational, Monomial::GradedLexLess>;

  Polynomial() = default;
  Polynomial(const Rational& c);  // NOLINT: constants convert implicitly
  explicit Polynomial(const Symbol& s);
  Polynomial(const Monomial& m, const Rational& c);

  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  /// Value of a constant polynomial (0 for the zero polynomial).
  Rational constant_value() const;
  /// Greatest term under graded lexicographic order.
  const Terms::value_type& leading_term() const;

  std::set<Symbol> symbols() const;
  bool has_applications() const;
  unsigned degree_in(const Symbol& s) const;
  /// Coefficients of `s^k`, k = 0..degree_in(s); each free of `s`.
  std::vector<Polynomial> coefficients_in(const Symbol& s) const;
  Polynomial derivative(const Symbol& s) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(const Polynomial& o);
  Polynomial& operator*=(const Rational& c);

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
  friend Polynomial operator-(Polynomial a) { return a *= Rational(-1); }
  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.terms_ == b.terms_; }
  friend bool operator!=(const Polynomial& a, const Polynomial& b) { return !(a == b); }

  Polynomial pow(unsigned e) const;
  /// Scales so the leading coefficient is 1. Zero stays zero.
  Polynomial monic() const;

 private:
  void add_term(const Monomial& m, const Rational& c);
  Terms terms_;
};

/// Exact quotient a / b, or nullopt when b does not divide a.
std::optional<Polynomial> divide_exact(const Polynomial& a, const Polynomial& b);

/// Monic greatest common divisor over Q (atoms treated as indeterminates).
Polynomial gcd(const Polynomial& a, const Polynomial& b);

/// Quotient of coprime polynomials with a monic denominator. Two rational
/// functions are equal iff their numerators and denominators are equal.
class RationalFunction {
 public:
  RationalFunction() : den_(Rational(1)) {}
  RationalFunction(const Rational& c) : num_(c), den_(Rational(1)) {}  // NOLINT
  RationalFunction(Polynomial p) : num_(std::move(p)), den_(Rational(1)) {}  // NOLINT
  /// Normalizes; throws std::domain_error when `den` is zero.
  RationalFunction(Polynomial num, Polynomial den);

  const Polynomial& numerator() const { return num_; }
  const Polynomial& denominator() const { return den_; }
  bool is_zero() const { return num_.is_zero(); }
  bool is_polynomial() const { return den_.is_constant(); }
  bool is_constant() const { return num_.is_constant() && den_.is_constant(); }
  Rational constant_value() const { return num_.constant_value(); }
  std::set<Symbol> symbols() const;
  bool has_applications() const { return num_.has_applications() || den_.has_applications(); }

  friend RationalFunction operator+(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator-(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator*(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator/(const RationalFunction& a, const RationalFunction& b);
  friend RationalFunction operator-(const RationalFunction& a);
  friend bool operator==(const RationalFunction& a, const RationalFunction& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }

  RationalFunction pow(long e) const;

  /// Wraps a pair already known to be coprime with a monic denominator.
  static RationalFunction from_normalized(Polynomial num, Polynomial den) {
    return RationalFunction(std::move(num), std::move(den), Normalized{});
  }

 private:
  struct Normalized {};
  RationalFunction(Polynomial num, Polynomial den, Normalized)
      : num_(std::move(num)), den_(std::move(den)) {}

  Polynomial num_;
  Polynomial den_;
};

}  // namespace liesys
