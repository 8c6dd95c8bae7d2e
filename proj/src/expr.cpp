#include "liesys/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>
#include <unordered_map>

namespace liesys {

using detail::ExprNode;
using detail::NodeKind;
using NodePtr = std::shared_ptr<const ExprNode>;

// ---------------------------------------------------------------------------
// Chart

namespace {

bool is_identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::optional<Function> function_by_name(const std::string& s) {
  if (s == "sin") return Function::Sin;
  if (s == "cos") return Function::Cos;
  if (s == "exp") return Function::Exp;
  if (s == "ln") return Function::Ln;
  return std::nullopt;
}

}  // namespace

Chart::Chart(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw std::invalid_argument("chart must have at least one coordinate");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!is_identifier(n)) throw std::invalid_argument("invalid coordinate name '" + n + "'");
    if (function_by_name(n)) throw std::invalid_argument("coordinate name '" + n + "' is reserved");
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate coordinate name '" + n + "'");
  }
}

bool Chart::contains(const std::string& name) const { return index_of(name) >= 0; }

int Chart::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  return it == names_.end() ? -1 : static_cast<int>(it - names_.begin());
}

Chart Chart::extended(const std::vector<std::string>& extra) const {
  auto all = names_;
  all.insert(all.end(), extra.begin(), extra.end());
  return Chart(std::move(all));
}

// ---------------------------------------------------------------------------
// Node construction

namespace {

std::shared_ptr<ExprNode> new_node(NodeKind kind) {
  auto n = std::make_shared<ExprNode>();
  n->kind = kind;
  return n;
}

NodePtr constant_node(const Rational& v) {
  auto n = new_node(NodeKind::Constant);
  n->value = v;
  n->value.canonicalize();
  n->canonical = RationalFunction(n->value);
  return n;
}

NodePtr variable_node(const std::string& name) {
  auto n = new_node(NodeKind::Variable);
  n->name = name;
  n->canonical = RationalFunction(Polynomial(Symbol::variable(name)));
  return n;
}

Symbol make_atom(Function fn, const NodePtr& canonical_arg) {
  std::string key = std::string(function_name(fn)) + "(" + Expr(canonical_arg).str() + ")";
  return Symbol::application(fn, canonical_arg, std::move(key));
}

NodePtr symbol_node(const Symbol& s) {
  if (s.is_variable()) return variable_node(s.key());
  auto n = new_node(NodeKind::Apply);
  n->fn = s.function();
  n->children = {s.argument()};
  n->canonical = RationalFunction(Polynomial(s));
  return n;
}

bool is_integer(const Rational& r) { return r.get_den() == 1; }

}  // namespace

Expr::Expr() : node_(constant_node(Rational(0))) {}
Expr::Expr(long value) : node_(constant_node(Rational(value))) {}
Expr::Expr(const Rational& value) : node_(constant_node(value)) {}

Expr Expr::variable(const std::string& name) { return Expr(variable_node(name)); }

Expr Expr::apply(Function fn, const Expr& arg) {
  const RationalFunction& a = arg.canonical();
  if (a.is_constant()) {
    Rational v = a.constant_value();
    if (v == 0 && fn == Function::Sin) return Expr(0L);
    if (v == 0 && (fn == Function::Cos || fn == Function::Exp)) return Expr(1L);
    if (v == 1 && fn == Function::Ln) return Expr(0L);
  }
  auto n = new_node(NodeKind::Apply);
  n->fn = fn;
  n->children = {arg.node_};
  n->canonical = RationalFunction(Polynomial(make_atom(fn, from_canonical(a).node_)));
  return Expr(NodePtr(n));
}

Expr Expr::power(const Expr& base, long exponent) {
  auto n = new_node(NodeKind::Power);
  n->exponent = exponent;
  n->children = {base.node_};
  n->canonical = base.canonical().pow(exponent);
  return Expr(NodePtr(n));
}

namespace {

NodePtr polynomial_node(const Polynomial& p) {
  if (p.is_zero()) return constant_node(Rational(0));
  std::vector<NodePtr> terms;
  for (const auto& [m, c] : p.terms()) {
    std::vector<NodePtr> factors;
    if (m.empty() || c != 1) factors.push_back(constant_node(c));
    for (const auto& [sym, e] : m.factors()) {
      NodePtr base = symbol_node(sym);
      if (e == 1) {
        factors.push_back(base);
      } else {
        auto pw = new_node(NodeKind::Power);
        pw->exponent = e;
        pw->children = {base};
        pw->canonical = RationalFunction(Polynomial(Monomial(sym, e), Rational(1)));
        factors.push_back(pw);
      }
    }
    if (factors.size() == 1) {
      terms.push_back(factors.front());
    } else {
      auto prod = new_node(NodeKind::Product);
      prod->children = std::move(factors);
      prod->canonical = RationalFunction(Polynomial(m, c));
      terms.push_back(prod);
    }
  }
  if (terms.size() == 1) return terms.front();
  auto sum = new_node(NodeKind::Sum);
  sum->children = std::move(terms);
  sum->canonical = RationalFunction(p);
  return sum;
}

}  // namespace

Expr Expr::from_canonical(const RationalFunction& rf) {
  if (rf.is_polynomial()) return Expr(polynomial_node(rf.numerator()));
  auto q = new_node(NodeKind::Quotient);
  q->children = {polynomial_node(rf.numerator()), polynomial_node(rf.denominator())};
  q->canonical = rf;
  return Expr(NodePtr(q));
}

std::vector<Expr> Expr::children() const {
  std::vector<Expr> out;
  out.reserve(node_->children.size());
  for (const auto& c : node_->children) out.emplace_back(c);
  return out;
}

Expr operator+(const Expr& a, const Expr& b) {
  auto n = new_node(NodeKind::Sum);
  n->children = {a.node_, b.node_};
  n->canonical = a.canonical() + b.canonical();
  return Expr(NodePtr(n));
}

Expr operator-(const Expr& a) {
  auto n = new_node(NodeKind::Product);
  n->children = {constant_node(Rational(-1)), a.node_};
  n->canonical = -a.canonical();
  return Expr(NodePtr(n));
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  auto n = new_node(NodeKind::Product);
  n->children = {a.node_, b.node_};
  n->canonical = a.canonical() * b.canonical();
  return Expr(NodePtr(n));
}

Expr operator/(const Expr& a, const Expr& b) {
  auto n = new_node(NodeKind::Quotient);
  n->children = {a.node_, b.node_};
  n->canonical = a.canonical() / b.canonical();
  return Expr(NodePtr(n));
}

bool canonically_equal(const Expr& a, const Expr& b) { return a.canonical() == b.canonical(); }

// ---------------------------------------------------------------------------
// Queries and printing

namespace {

void collect_variables(const RationalFunction& rf, std::set<std::string>& out) {
  for (const auto& s : rf.symbols()) {
    if (s.is_variable())
      out.insert(s.key());
    else
      collect_variables(s.argument()->canonical, out);
  }
}

std::string rational_str(const Rational& r) {
  std::string s = r.get_num().get_str();
  if (!is_integer(r)) s += "/" + r.get_den().get_str();
  return s;
}

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Constant:
      return (is_integer(n.value) && n.value >= 0) ? 5 : 2;
    case NodeKind::Variable:
    case NodeKind::Apply:
      return 5;
    case NodeKind::Power:
      return 4;
    case NodeKind::Product:
    case NodeKind::Quotient:
      return 2;
    case NodeKind::Sum:
      return 1;
  }
  return 0;
}

void print(const ExprNode& n, int parent, std::ostringstream& os) {
  const bool wrap = precedence(n) < parent;
  if (wrap) os << '(';
  switch (n.kind) {
    case NodeKind::Constant:
      os << rational_str(n.value);
      break;
    case NodeKind::Variable:
      os << n.name;
      break;
    case NodeKind::Apply:
      os << function_name(n.fn) << '(';
      print(*n.children[0], 0, os);
      os << ')';
      break;
    case NodeKind::Power:
      print(*n.children[0], 5, os);
      os << '^';
      if (n.exponent < 0)
        os << '(' << n.exponent << ')';
      else
        os << n.exponent;
      break;
    case NodeKind::Product: {
      std::size_t start = 0;
      const auto& first = *n.children[0];
      if (n.children.size() > 1 && first.kind == NodeKind::Constant && first.value == -1) {
        os << '-';
        start = 1;
      }
      for (std::size_t i = start; i < n.children.size(); ++i) {
        if (i > start) os << '*';
        print(*n.children[i], (i == start && start == 0) ? 2 : 3, os);
      }
      break;
    }
    case NodeKind::Quotient:
      print(*n.children[0], 2, os);
      os << '/';
      print(*n.children[1], 3, os);
      break;
    case NodeKind::Sum:
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        std::ostringstream term;
        print(*n.children[i], 1, term);
        std::string t = term.str();
        if (i == 0) {
          os << t;
        } else if (!t.empty() && t[0] == '-') {
          os << " - " << t.substr(1);
        } else {
          os << " + " << t;
        }
      }
      break;
  }
  if (wrap) os << ')';
}

}  // namespace

std::set<std::string> Expr::variables() const {
  std::set<std::string> out;
  collect_variables(canonical(), out);
  return out;
}

bool Expr::has_transcendentals() const { return canonical().has_applications(); }

std::string Expr::str() const {
  std::ostringstream os;
  print(*node_, 0, os);
  return os.str();
}

std::string Expr::canonical_str() const { return from_canonical(canonical()).str(); }

// ---------------------------------------------------------------------------
// Parsing

ParseError::ParseError(const std::string& message, std::size_t position, std::string identifier)
    : std::runtime_error(message + " at position " + std::to_string(position)),
      position_(position),
      identifier_(std::move(identifier)) {}

namespace {

class Parser {
 public:
  Parser(const std::string& text, const Chart& chart) : text_(text), chart_(chart) {}

  Expr run() {
    Expr e = expression();
    skip_space();
    if (pos_ != text_.size())
      throw ParseError(std::string("unexpected '") + text_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr expression() {
    Expr e = term();
    for (;;) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  Expr term() {
    Expr e = unary();
    for (;;) {
      if (accept('*')) {
        e = e * unary();
      } else if (accept('/')) {
        std::size_t at = pos_;
        Expr d = unary();
        if (d.canonical().is_zero()) throw ParseError("division by zero", at);
        e = e / d;
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (!accept('^')) return base;
    std::size_t at = pos_;
    Expr ex = unary();
    const auto& c = ex.canonical();
    if (!c.is_constant() || !is_integer(c.constant_value()))
      throw ParseError("exponent must be an integer constant", at);
    long e = c.constant_value().get_num().get_si();
    if (e < 0 && base.canonical().is_zero()) throw ParseError("division by zero", at);
    return Expr::power(base, e);
  }

  Expr primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c))) return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      Expr e = expression();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    std::string digits = text_.substr(start, pos_ - start);
    std::string denom = "1";
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      std::size_t fs = pos_;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ == fs) throw ParseError("malformed number", start);
      digits += text_.substr(fs, pos_ - fs);
      denom += std::string(pos_ - fs, '0');
    }
    Rational v{mpz_class(digits, 10), mpz_class(denom, 10)};
    v.canonicalize();
    return Expr(v);
  }

  Expr identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    if (auto fn = function_by_name(name)) {
      if (!accept('(')) throw ParseError("expected '(' after " + name, pos_);
      Expr arg = expression();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      if (*fn == Function::Ln && arg.canonical().is_zero()) throw ParseError("ln(0)", start);
      return Expr::apply(*fn, arg);
    }
    if (!chart_.contains(name)) throw ParseError("unknown identifier '" + name + "'", start, name);
    return Expr::variable(name);
  }

  const std::string& text_;
  const Chart& chart_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse(const std::string& text, const Chart& chart) { return Parser(text, chart).run(); }

// ---------------------------------------------------------------------------
// Differentiation

namespace {

RationalFunction derivative(const RationalFunction& rf, const std::string& v);

RationalFunction derivative_of_symbol(const Symbol& s, const std::string& v) {
  if (s.is_variable()) return RationalFunction(Rational(s.key() == v ? 1 : 0));
  const NodePtr& arg = s.argument();
  RationalFunction inner = derivative(arg->canonical, v);
  if (inner.is_zero()) return inner;
  RationalFunction outer;
  switch (s.function()) {
    case Function::Sin:
      outer = RationalFunction(Polynomial(make_atom(Function::Cos, arg)));
      break;
    case Function::Cos:
      outer = -RationalFunction(Polynomial(make_atom(Function::Sin, arg)));
      break;
    case Function::Exp:
      outer = RationalFunction(Polynomial(s));
      break;
    case Function::Ln:
      outer = RationalFunction(Rational(1)) / arg->canonical;
      break;
  }
  return outer * inner;
}

RationalFunction derivative(const Polynomial& p, const std::string& v) {
  RationalFunction out;
  for (const auto& s : p.symbols()) {
    RationalFunction ds = derivative_of_symbol(s, v);
    if (ds.is_zero()) continue;
    out = out + RationalFunction(p.derivative(s)) * ds;
  }
  return out;
}

RationalFunction derivative(const RationalFunction& rf, const std::string& v) {
  RationalFunction dn = derivative(rf.numerator(), v);
  if (rf.is_polynomial()) return dn;
  RationalFunction dd = derivative(rf.denominator(), v);
  RationalFunction n(rf.numerator());
  RationalFunction d(rf.denominator());
  return (dn * d - n * dd) / (d * d);
}

}  // namespace

Expr differentiate(const Expr& e, const std::string& variable) {
  return Expr::from_canonical(derivative(e.canonical(), variable));
}

// ---------------------------------------------------------------------------
// Substitution

Expr substitute(const Expr& e, const std::map<std::string, Expr>& replacements) {
  switch (e.kind()) {
    case NodeKind::Constant:
      return e;
    case NodeKind::Variable: {
      auto it = replacements.find(e.variable_name());
      return it == replacements.end() ? e : it->second;
    }
    case NodeKind::Apply:
      return Expr::apply(e.function(), substitute(e.children()[0], replacements));
    case NodeKind::Power:
      return Expr::power(substitute(e.children()[0], replacements), e.exponent());
    case NodeKind::Quotient: {
      auto ch = e.children();
      return substitute(ch[0], replacements) / substitute(ch[1], replacements);
    }
    case NodeKind::Sum:
    case NodeKind::Product: {
      auto ch = e.children();
      Expr acc = substitute(ch[0], replacements);
      for (std::size_t i = 1; i < ch.size(); ++i) {
        Expr next = substitute(ch[i], replacements);
        acc = e.kind() == NodeKind::Sum ? acc + next : acc * next;
      }
      return acc;
    }
  }
  return e;
}

Expr rename(const Expr& e, const std::map<std::string, std::string>& names) {
  std::map<std::string, Expr> rep;
  for (const auto& [from, to] : names) rep.emplace(from, Expr::variable(to));
  return substitute(e, rep);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

using Lookup = std::map<std::string, double>;

double evaluate_rf(const RationalFunction& rf, const Lookup& point);

double evaluate_symbol(const Symbol& s, const Lookup& point) {
  if (s.is_variable()) {
    auto it = point.find(s.key());
    if (it == point.end()) throw std::invalid_argument("no value for variable '" + s.key() + "'");
    return it->second;
  }
  double a = evaluate_rf(s.argument()->canonical, point);
  switch (s.function()) {
    case Function::Sin: return std::sin(a);
    case Function::Cos: return std::cos(a);
    case Function::Exp: return std::exp(a);
    case Function::Ln: return std::log(a);
  }
  return 0.0;
}

// Returns the value and, through `scale`, the sum of absolute term values.
double evaluate_poly(const Polynomial& p, const Lookup& point, double* scale) {
  std::map<std::string, double> cache;
  double sum = 0.0;
  double abs_sum = 0.0;
  for (const auto& [m, c] : p.terms()) {
    double t = c.get_d();
    for (const auto& [sym, e] : m.factors()) {
      auto it = cache.find(sym.key());
      double v = it != cache.end() ? it->second : (cache[sym.key()] = evaluate_symbol(sym, point));
      t *= std::pow(v, static_cast<double>(e));
    }
    sum += t;
    abs_sum += std::abs(t);
  }
  if (scale) *scale = abs_sum;
  return sum;
}

double evaluate_rf(const RationalFunction& rf, const Lookup& point) {
  return evaluate_poly(rf.numerator(), point, nullptr) / evaluate_poly(rf.denominator(), point, nullptr);
}

double evaluate_node(const ExprNode& n, const Lookup& point) {
  switch (n.kind) {
    case NodeKind::Constant:
      return n.value.get_d();
    case NodeKind::Variable: {
      auto it = point.find(n.name);
      if (it == point.end()) throw std::invalid_argument("no value for variable '" + n.name + "'");
      return it->second;
    }
    case NodeKind::Apply: {
      double a = evaluate_node(*n.children[0], point);
      switch (n.fn) {
        case Function::Sin: return std::sin(a);
        case Function::Cos: return std::cos(a);
        case Function::Exp: return std::exp(a);
        case Function::Ln: return std::log(a);
      }
      return 0.0;
    }
    case NodeKind::Power:
      return std::pow(evaluate_node(*n.children[0], point), static_cast<double>(n.exponent));
    case NodeKind::Quotient:
      return evaluate_node(*n.children[0], point) / evaluate_node(*n.children[1], point);
    case NodeKind::Sum: {
      double s = 0.0;
      for (const auto& c : n.children) s += evaluate_node(*c, point);
      return s;
    }
    case NodeKind::Product: {
      double s = 1.0;
      for (const auto& c : n.children) s *= evaluate_node(*c, point);
      return s;
    }
  }
  return 0.0;
}

std::optional<Rational> evaluate_poly_exact(const Polynomial& p,
                                            const std::map<std::string, Rational>& point) {
  Rational sum = 0;
  for (const auto& [m, c] : p.terms()) {
    Rational t = c;
    for (const auto& [sym, e] : m.factors()) {
      auto it = point.find(sym.key());
      if (it == point.end()) return std::nullopt;
      for (unsigned k = 0; k < e; ++k) t *= it->second;
    }
    sum += t;
  }
  return sum;
}

}  // namespace

double evaluate(const Expr& e, const std::map<std::string, double>& point) {
  return evaluate_node(*e.node(), point);
}

std::optional<Rational> evaluate_exact(const Expr& e, const std::map<std::string, Rational>& point) {
  const auto& rf = e.canonical();
  if (rf.has_applications()) return std::nullopt;
  auto n = evaluate_poly_exact(rf.numerator(), point);
  auto d = evaluate_poly_exact(rf.denominator(), point);
  if (!n || !d || *d == 0) return std::nullopt;
  return Rational(*n / *d);
}

const char* to_string(ZeroVerdict v) {
  switch (v) {
    case ZeroVerdict::Zero: return "Zero";
    case ZeroVerdict::NonZero: return "NonZero";
    case ZeroVerdict::Unknown: return "Unknown";
  }
  return "?";
}

ZeroTest is_zero(const Expr& e, int samples, std::uint64_t seed) {
  const auto& rf = e.canonical();
  if (rf.is_zero()) return {ZeroVerdict::Zero, true, 0};
  if (!rf.has_applications()) return {ZeroVerdict::NonZero, true, 0};

  std::set<std::string> vars = e.variables();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> den_dist(1, 16);
  ZeroTest out{ZeroVerdict::Unknown, false, 0};
  int attempts = 0;
  while (out.samples < samples && attempts < samples * 20) {
    ++attempts;
    Lookup point;
    for (const auto& v : vars) {
      int q = den_dist(rng);
      std::uniform_int_distribution<int> num_dist(-2 * q, 2 * q);
      point[v] = static_cast<double>(num_dist(rng)) / q;
    }
    double scale = 0.0;
    double value = evaluate_poly(rf.numerator(), point, &scale);
    double den = evaluate_poly(rf.denominator(), point, nullptr);
    if (!std::isfinite(value) || !std::isfinite(scale) || !std::isfinite(den) || den == 0.0) continue;
    ++out.samples;
    if (std::abs(value) > 1e-9 * std::max(scale, 1e-300)) {
      out.verdict = ZeroVerdict::NonZero;
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// CompiledExpr

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& variables) {
  int depth = 0;
  emit(e, variables, depth);
}

void CompiledExpr::emit(const Expr& e, const std::vector<std::string>& variables, int& depth) {
  auto push = [&](Instr in) {
    code_.push_back(in);
    ++depth;
    max_depth_ = std::max(max_depth_, depth);
  };
  switch (e.kind()) {
    case NodeKind::Constant:
      push({Op::Const, 0, e.constant_value().get_d()});
      return;
    case NodeKind::Variable: {
      auto it = std::find(variables.begin(), variables.end(), e.variable_name());
      if (it == variables.end())
        throw std::invalid_argument("variable '" + e.variable_name() + "' not in evaluation order");
      push({Op::Var, static_cast<std::uint32_t>(it - variables.begin()), 0.0});
      return;
    }
    case NodeKind::Apply: {
      emit(e.children()[0], variables, depth);
      Op op = Op::Sin;
      switch (e.function()) {
        case Function::Sin: op = Op::Sin; break;
        case Function::Cos: op = Op::Cos; break;
        case Function::Exp: op = Op::Exp; break;
        case Function::Ln: op = Op::Ln; break;
      }
      code_.push_back({op, 0, 0.0});
      return;
    }
    case NodeKind::Power:
      emit(e.children()[0], variables, depth);
      code_.push_back({Op::Pow, 0, static_cast<double>(e.exponent())});
      return;
    case NodeKind::Quotient:
      for (const auto& c : e.children()) emit(c, variables, depth);
      code_.push_back({Op::Div, 2, 0.0});
      --depth;
      return;
    case NodeKind::Sum:
    case NodeKind::Product: {
      auto ch = e.children();
      for (const auto& c : ch) emit(c, variables, depth);
      code_.push_back({e.kind() == NodeKind::Sum ? Op::Add : Op::Mul,
                       static_cast<std::uint32_t>(ch.size()), 0.0});
      depth -= static_cast<int>(ch.size()) - 1;
      return;
    }
  }
}

double CompiledExpr::operator()(std::span<const double> values) const {
  if (code_.empty()) return 0.0;
  constexpr int kInline = 64;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(static_cast<std::size_t>(max_depth_));
    stack = heap.data();
  }
  int sp = 0;
  for (const auto& in : code_) {
    switch (in.op) {
      case Op::Const: stack[sp++] = in.value; break;
      case Op::Var: stack[sp++] = values[in.arg]; break;
      case Op::Add: {
        double s = 0.0;
        for (std::uint32_t k = 0; k < in.arg; ++k) s += stack[--sp];
        stack[sp++] = s;
        break;
      }
      case Op::Mul: {
        double s = 1.0;
        for (std::uint32_t k = 0; k < in.arg; ++k) s *= stack[--sp];
        stack[sp++] = s;
        break;
      }
      case Op::Div: {
        double b = stack[--sp];
        stack[sp - 1] /= b;
        break;
      }
      case Op::Pow: {
        double& x = stack[sp - 1];
        if (in.value == 2.0)
          x = x * x;
        else
          x = std::pow(x, in.value);
        break;
      }
      case Op::Neg: stack[sp - 1] = -stack[sp - 1]; break;
      case Op::Sin: stack[sp - 1] = std::sin(stack[sp - 1]); break;
      case Op::Cos: stack[sp - 1] = std::cos(stack[sp - 1]); break;
      case Op::Exp: stack[sp - 1] = std::exp(stack[sp - 1]); break;
      case Op::Ln: stack[sp - 1] = std::log(stack[sp - 1]); break;
    }
  }
  return stack[0];
}

}  // namespace liesys
