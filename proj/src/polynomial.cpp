#include "liesys/polynomial.hpp"

#include <algorithm>
#include <iterator>
#include <stdexcept>

namespace liesys {

const char* function_name(Function fn) {
  switch (fn) {
    case Function::Sin: return "sin";
    case Function::Cos: return "cos";
    case Function::Exp: return "exp";
    case Function::Ln: return "ln";
  }
  return "?";
}

Symbol Symbol::variable(std::string name) {
  Symbol s;
  s.key_ = std::move(name);
  return s;
}

Symbol Symbol::application(Function fn, std::shared_ptr<const detail::ExprNode> arg,
                           std::string key) {
  Symbol s;
  s.key_ = std::move(key);
  s.fn_ = fn;
  s.arg_ = std::move(arg);
  return s;
}

// ---------------------------------------------------------------------------
// Monomial

Monomial::Monomial(const Symbol& s, unsigned power) {
  if (power > 0) {
    factors_.emplace_back(s, power);
    degree_ = power;
  }
}

unsigned Monomial::degree_in(const Symbol& s) const {
  for (const auto& [sym, e] : factors_)
    if (sym == s) return e;
  return 0;
}

Monomial Monomial::without(const Symbol& s) const {
  Monomial r;
  for (const auto& f : factors_) {
    if (f.first == s) continue;
    r.factors_.push_back(f);
    r.degree_ += f.second;
  }
  return r;
}

bool Monomial::divisible_by(const Monomial& other) const {
  auto it = factors_.begin();
  for (const auto& [sym, e] : other.factors_) {
    while (it != factors_.end() && it->first < sym) ++it;
    if (it == factors_.end() || it->first != sym || it->second < e) return false;
  }
  return true;
}

Monomial Monomial::quotient(const Monomial& other) const {
  Monomial r;
  auto jt = other.factors_.begin();
  for (const auto& [sym, e] : factors_) {
    unsigned sub = 0;
    if (jt != other.factors_.end() && jt->first == sym) {
      sub = jt->second;
      ++jt;
    }
    if (e > sub) {
      r.factors_.emplace_back(sym, e - sub);
      r.degree_ += e - sub;
    }
  }
  return r;
}

Monomial operator*(const Monomial& a, const Monomial& b) {
  Monomial r;
  r.factors_.reserve(a.factors_.size() + b.factors_.size());
  auto i = a.factors_.begin();
  auto j = b.factors_.begin();
  while (i != a.factors_.end() || j != b.factors_.end()) {
    if (j == b.factors_.end() || (i != a.factors_.end() && i->first < j->first)) {
      r.factors_.push_back(*i++);
    } else if (i == a.factors_.end() || j->first < i->first) {
      r.factors_.push_back(*j++);
    } else {
      r.factors_.emplace_back(i->first, i->second + j->second);
      ++i;
      ++j;
    }
  }
  r.degree_ = a.degree_ + b.degree_;
  return r;
}

bool Monomial::GradedLexLess::operator()(const Monomial& a, const Monomial& b) const {
  if (a.degree_ != b.degree_) return a.degree_ < b.degree_;
  // Lex with the smallest symbol most significant.
  auto i = a.factors_.begin();
  auto j = b.factors_.begin();
  for (;; ++i, ++j) {
    if (i == a.factors_.end()) return j != b.factors_.end();
    if (j == b.factors_.end()) return false;
    if (i->first != j->first) return j->first < i->first;
    if (i->second != j->second) return i->second < j->second;
  }
}

// ---------------------------------------------------------------------------
// Polynomial

Polynomial::Polynomial(const Rational& c) {
  if (c != 0) {
    Rational v = c;
    v.canonicalize();
    terms_.emplace(Monomial(), v);
  }
}

Polynomial::Polynomial(const Symbol& s) { terms_.emplace(Monomial(s), Rational(1)); }

Polynomial::Polynomial(const Monomial& m, const Rational& c) {
  if (c != 0) terms_.emplace(m, c);
}

bool Polynomial::is_constant() const {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Rational Polynomial::constant_value() const {
  auto it = terms_.find(Monomial());
  return it == terms_.end() ? Rational(0) : it->second;
}

const Polynomial::Terms::value_type& Polynomial::leading_term() const {
  if (terms_.empty()) throw std::logic_error("leading_term of zero polynomial");
  return *terms_.rbegin();
}

std::set<Symbol> Polynomial::symbols() const {
  std::set<Symbol> out;
  for (const auto& [m, c] : terms_)
    for (const auto& f : m.factors()) out.insert(f.first);
  return out;
}

bool Polynomial::has_applications() const {
  for (const auto& [m, c] : terms_)
    for (const auto& f : m.factors())
      if (!f.first.is_variable()) return true;
  return false;
}

unsigned Polynomial::degree_in(const Symbol& s) const {
  unsigned d = 0;
  for (const auto& [m, c] : terms_) d = std::max(d, m.degree_in(s));
  return d;
}

std::vector<Polynomial> Polynomial::coefficients_in(const Symbol& s) const {
  std::vector<Polynomial> out(degree_in(s) + 1);
  for (const auto& [m, c] : terms_) out[m.degree_in(s)].add_term(m.without(s), c);
  return out;
}

Polynomial Polynomial::derivative(const Symbol& s) const {
  Polynomial out;
  for (const auto& [m, c] : terms_) {
    unsigned e = m.degree_in(s);
    if (e == 0) continue;
    out.add_term(m.without(s) * Monomial(s, e - 1), c * e);
  }
  return out;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(m, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (const auto& [m, c] : o.terms_) add_term(m, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
  if (c == 0) {
    terms_.clear();
    return *this;
  }
  for (auto& [m, v] : terms_) v *= c;
  return *this;
}

Polynomial& Polynomial::operator*=(const Polynomial& o) { return *this = *this * o; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial r;
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) r.add_term(ma * mb, ca * cb);
  return r;
}

Polynomial Polynomial::pow(unsigned e) const {
  Polynomial result(Rational(1));
  Polynomial base = *this;
  while (e > 0) {
    if (e & 1u) result = result * base;
    e >>= 1u;
    if (e > 0) base = base * base;
  }
  return result;
}

Polynomial Polynomial::monic() const {
  if (is_zero()) return *this;
  Rational lc = leading_term().second;
  if (lc == 1) return *this;
  return *this * Rational(1 / lc);
}

std::optional<Polynomial> divide_exact(const Polynomial& a, const Polynomial& b) {
  if (b.is_zero()) throw std::domain_error("polynomial division by zero");
  if (b.is_constant()) return a * Rational(1 / b.constant_value());
  Polynomial rem = a;
  Polynomial quot;
  const auto& [lm, lc] = b.leading_term();
  while (!rem.is_zero()) {
    const auto& [rm, rc] = rem.leading_term();
    if (!rm.divisible_by(lm)) return std::nullopt;
    Polynomial t(rm.quotient(lm), Rational(rc / lc));
    quot += t;
    rem -= t * b;
  }
  return quot;
}

namespace {

// Scales p to integer coefficients with unit content and a positive leading
// coefficient. Working over Z keeps coefficient growth in the remainder
// sequence in check.
Polynomial integer_primitive(const Polynomial& p) {
  if (p.is_zero()) return p;
  mpz_class den_lcm = 1;
  mpz_class num_gcd = 0;
  for (const auto& [m, c] : p.terms()) {
    mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den_mpz_t());
    mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num_mpz_t());
  }
  Rational scale{den_lcm, num_gcd};
  scale.canonicalize();
  if (p.leading_term().second < 0) scale = -scale;
  if (scale == 1) return p;
  return p * scale;
}

Polynomial content_in(const Polynomial& p, const Symbol& s) {
  Polynomial g;
  for (const auto& c : p.coefficients_in(s)) {
    if (c.is_zero()) continue;
    g = g.is_zero() ? integer_primitive(c) : gcd(g, c);
    if (g.is_constant()) return Polynomial(Rational(1));
  }
  return integer_primitive(g);
}

Polynomial primitive_part(const Polynomial& p, const Symbol& s) {
  Polynomial c = content_in(p, s);
  if (c.is_constant()) return integer_primitive(p);
  return integer_primitive(divide_exact(p, c).value());
}

// Pseudo-remainder of a by b as polynomials in s, up to a constant factor.
Polynomial pseudo_remainder(Polynomial a, const Polynomial& b, const Symbol& s) {
  const unsigned db = b.degree_in(s);
  const Polynomial lb = b.coefficients_in(s).back();
  while (!a.is_zero() && a.degree_in(s) >= db) {
    const unsigned da = a.degree_in(s);
    const Polynomial la = a.coefficients_in(s).back();
    a = integer_primitive(lb * a - la * Polynomial(Monomial(s, da - db), Rational(1)) * b);
  }
  return a;
}

Polynomial gcd_primitive(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return integer_primitive(b);
  if (b.is_zero()) return integer_primitive(a);
  if (a.is_constant() || b.is_constant()) return Polynomial(Rational(1));
  if (a == b) return a;

  const auto sa = a.symbols();
  const auto sb = b.symbols();
  std::vector<Symbol> shared;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(shared));
  if (shared.empty()) return Polynomial(Rational(1));
  // A symbol present in only one operand can be eliminated through contents.
  for (const auto& s : sa)
    if (!sb.count(s)) return gcd_primitive(content_in(a, s), b);
  for (const auto& s : sb)
    if (!sa.count(s)) return gcd_primitive(a, content_in(b, s));

  // Recurse on the shared symbol of least degree; shorter remainder sequences.
  Symbol s = shared.front();
  unsigned best = std::max(a.degree_in(s), b.degree_in(s));
  for (const auto& cand : shared) {
    unsigned d = std::max(a.degree_in(cand), b.degree_in(cand));
    if (d < best) {
      best = d;
      s = cand;
    }
  }

  Polynomial c = gcd_primitive(content_in(a, s), content_in(b, s));
  Polynomial p = primitive_part(a, s);
  Polynomial q = primitive_part(b, s);
  if (p.degree_in(s) < q.degree_in(s)) std::swap(p, q);
  for (;;) {
    Polynomial r = pseudo_remainder(p, q, s);
    if (r.is_zero()) break;
    if (r.degree_in(s) == 0) {
      q = Polynomial(Rational(1));
      break;
    }
    p = std::move(q);
    q = primitive_part(r, s);
  }
  return integer_primitive(c * q);
}

}  // namespace

Polynomial gcd(const Polynomial& a, const Polynomial& b) {
  return gcd_primitive(integer_primitive(a), integer_primitive(b)).monic();
}

// ---------------------------------------------------------------------------
// RationalFunction

RationalFunction::RationalFunction(Polynomial num, Polynomial den) {
  if (den.is_zero()) throw std::domain_error("division by zero");
  if (num.is_zero()) {
    den_ = Polynomial(Rational(1));
    return;
  }
  if (den.is_constant()) {
    num_ = num * Rational(1 / den.constant_value());
    den_ = Polynomial(Rational(1));
    return;
  }
  Polynomial g = gcd(num, den);
  if (!g.is_constant()) {
    num = divide_exact(num, g).value();
    den = divide_exact(den, g).value();
  }
  Rational lc = den.leading_term().second;
  if (lc != 1) {
    Rational inv = 1 / lc;
    num *= inv;
    den *= inv;
  }
  num_ = std::move(num);
  den_ = std::move(den);
}

std::set<Symbol> RationalFunction::symbols() const {
  auto s = num_.symbols();
  auto d = den_.symbols();
  s.insert(d.begin(), d.end());
  return s;
}

RationalFunction operator+(const RationalFunction& a, const RationalFunction& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  if (a.den_ == b.den_) {
    if (a.is_polynomial())
      return RationalFunction(a.num_ + b.num_, a.den_, RationalFunction::Normalized{});
    return RationalFunction(a.num_ + b.num_, a.den_);
  }
  Polynomial g = gcd(a.den_, b.den_);
  Polynomial bd = divide_exact(b.den_, g).value();
  Polynomial ad = divide_exact(a.den_, g).value();
  return RationalFunction(a.num_ * bd + b.num_ * ad, a.den_ * bd);
}

RationalFunction operator-(const RationalFunction& a) {
  return RationalFunction(-a.num_, a.den_, RationalFunction::Normalized{});
}

RationalFunction operator-(const RationalFunction& a, const RationalFunction& b) { return a + (-b); }

RationalFunction operator*(const RationalFunction& a, const RationalFunction& b) {
  if (a.is_zero() || b.is_zero()) return RationalFunction();
  if (a.is_polynomial() && b.is_polynomial())
    return RationalFunction(a.num_ * b.num_, Polynomial(Rational(1)), RationalFunction::Normalized{});
  // Cross-cancel before multiplying to keep the gcd work small.
  Polynomial g1 = gcd(a.num_, b.den_);
  Polynomial g2 = gcd(b.num_, a.den_);
  Polynomial n = divide_exact(a.num_, g1).value() * divide_exact(b.num_, g2).value();
  Polynomial d = divide_exact(a.den_, g2).value() * divide_exact(b.den_, g1).value();
  return RationalFunction(std::move(n), std::move(d));
}

RationalFunction operator/(const RationalFunction& a, const RationalFunction& b) {
  if (b.is_zero()) throw std::domain_error("division by zero");
  return a * RationalFunction(b.den_, b.num_);
}

RationalFunction RationalFunction::pow(long e) const {
  if (e == 0) return RationalFunction(Rational(1));
  if (e < 0) {
    if (is_zero()) throw std::domain_error("division by zero");
    return RationalFunction(den_, num_).pow(-e);
  }
  auto u = static_cast<unsigned>(e);
  return RationalFunction(num_.pow(u), den_.pow(u), Normalized{});
}

}  // namespace liesys
