#include "liesys/geometry.hpp"

#include <sstream>
#include <stdexcept>

namespace liesys {

namespace {

void require_same_chart(const VectorField& a, const VectorField& b) {
  if (!(a.chart() == b.chart())) throw std::invalid_argument("vector fields live on different charts");
}

}  // namespace

VectorField::VectorField(Chart chart, std::vector<Expr> components)
    : chart_(std::move(chart)), components_(std::move(components)) {
  if (components_.size() != chart_.dimension())
    throw std::invalid_argument("vector field has " + std::to_string(components_.size()) +
                                " components on a chart of dimension " +
                                std::to_string(chart_.dimension()));
  for (const auto& c : components_)
    for (const auto& v : c.variables())
      if (!chart_.contains(v))
        throw std::invalid_argument("component uses '" + v + "' which is not a chart coordinate");
}

VectorField VectorField::parse(const Chart& chart, const std::vector<std::string>& components) {
  std::vector<Expr> comps;
  comps.reserve(components.size());
  for (const auto& c : components) comps.push_back(liesys::parse(c, chart));
  return VectorField(chart, std::move(comps));
}

VectorField VectorField::zero(const Chart& chart) {
  return VectorField(chart, std::vector<Expr>(chart.dimension(), Expr(0L)));
}

bool VectorField::is_zero() const {
  for (const auto& c : components_)
    if (!c.is_canonically_zero()) return false;
  return true;
}

Expr VectorField::apply(const Expr& f) const {
  RationalFunction acc;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (components_[i].is_canonically_zero()) continue;
    acc = acc + components_[i].canonical() * differentiate(f, chart_.names()[i]).canonical();
  }
  return Expr::from_canonical(acc);
}

std::string VectorField::str() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (i) os << ", ";
    os << components_[i].canonical_str();
  }
  os << ']';
  return os.str();
}

VectorField operator+(const VectorField& a, const VectorField& b) {
  require_same_chart(a, b);
  std::vector<Expr> c(a.dimension());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = Expr::from_canonical(a[i].canonical() + b[i].canonical());
  return VectorField(a.chart(), std::move(c));
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  require_same_chart(a, b);
  std::vector<Expr> c(a.dimension());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = Expr::from_canonical(a[i].canonical() - b[i].canonical());
  return VectorField(a.chart(), std::move(c));
}

VectorField operator*(const Expr& f, const VectorField& x) {
  std::vector<Expr> c(x.dimension());
  for (std::size_t i = 0; i < c.size(); ++i)
    c[i] = Expr::from_canonical(f.canonical() * x[i].canonical());
  return VectorField(x.chart(), std::move(c));
}

bool canonically_equal(const VectorField& a, const VectorField& b) {
  if (!(a.chart() == b.chart())) return false;
  for (std::size_t i = 0; i < a.dimension(); ++i)
    if (!canonically_equal(a[i], b[i])) return false;
  return true;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  require_same_chart(x, y);
  const auto& names = x.chart().names();
  const std::size_t n = names.size();
  std::vector<Expr> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    RationalFunction acc;
    for (std::size_t j = 0; j < n; ++j) {
      if (!x[j].is_canonically_zero())
        acc = acc + x[j].canonical() * differentiate(y[i], names[j]).canonical();
      if (!y[j].is_canonically_zero())
        acc = acc - y[j].canonical() * differentiate(x[i], names[j]).canonical();
    }
    out[i] = Expr::from_canonical(acc);
  }
  return VectorField(x.chart(), std::move(out));
}

// ---------------------------------------------------------------------------
// ProductChart

namespace {

Chart build_product(const Chart& base, int copies) {
  if (copies < 1) throw std::invalid_argument("product chart needs at least one copy");
  std::vector<std::string> names;
  for (int a = 0; a < copies; ++a)
    for (const auto& v : base.names()) names.push_back(ProductChart::slot_name(v, a));
  return Chart(std::move(names));
}

}  // namespace

ProductChart::ProductChart(Chart base, int copies)
    : base_(std::move(base)), copies_(copies), chart_(build_product(base_, copies)) {}

std::string ProductChart::slot_name(const std::string& var, int slot) {
  return var + "_" + std::to_string(slot);
}

std::vector<std::string> ProductChart::slot_variables(int slot) const {
  std::vector<std::string> out;
  for (const auto& v : base_.names()) out.push_back(slot_name(v, slot));
  return out;
}

std::map<std::string, std::string> ProductChart::to_slot(int slot) const {
  std::map<std::string, std::string> m;
  for (const auto& v : base_.names()) m[v] = slot_name(v, slot);
  return m;
}

std::map<std::string, std::string> ProductChart::from_slot(int slot) const {
  std::map<std::string, std::string> m;
  for (const auto& v : base_.names()) m[slot_name(v, slot)] = v;
  return m;
}

int ProductChart::slot_of(const std::string& product_var) const {
  int idx = chart_.index_of(product_var);
  return idx < 0 ? -1 : idx / static_cast<int>(base_.dimension());
}

VectorField diagonal_prolongation(const VectorField& x, const ProductChart& product) {
  if (!(x.chart() == product.base())) throw std::invalid_argument("field is not on the product's base chart");
  std::vector<Expr> comps;
  comps.reserve(product.chart().dimension());
  for (int a = 0; a < product.copies(); ++a) {
    auto names = product.to_slot(a);
    for (const auto& c : x.components()) comps.push_back(rename(c, names));
  }
  return VectorField(product.chart(), std::move(comps));
}

VectorField diagonal_prolongation(const VectorField& x, int copies) {
  return diagonal_prolongation(x, ProductChart(x.chart(), copies));
}

ProlongationCheck is_diagonal_prolongation(const VectorField& z, const ProductChart& product) {
  if (!(z.chart() == product.chart())) throw std::invalid_argument("field is not on the product chart");
  const std::size_t n = product.base().dimension();
  ProlongationCheck out;
  std::vector<Expr> base_components;
  for (int a = 0; a < product.copies(); ++a) {
    auto back = product.from_slot(a);
    for (std::size_t i = 0; i < n; ++i) {
      const Expr& c = z[a * n + i];
      for (const auto& v : c.variables()) {
        int owner = product.slot_of(v);
        if (owner != a) {
          out.slot = a;
          out.other_slot = owner;
          out.witness = "slot-" + std::to_string(a) + " component " + product.base().names()[i] +
                        " depends on slot-" + std::to_string(owner) + " variable " + v;
          return out;
        }
      }
      Expr in_base = rename(c, back);
      if (a == 0) {
        base_components.push_back(in_base);
      } else if (!canonically_equal(in_base, base_components[i])) {
        out.slot = a;
        out.other_slot = 0;
        out.witness = "slot-" + std::to_string(a) + " component " + product.base().names()[i] +
                      " differs from slot 0: " + in_base.canonical_str() + " vs " +
                      base_components[i].canonical_str();
        return out;
      }
    }
  }
  out.is_prolongation = true;
  out.base = VectorField(product.base(), std::move(base_components));
  return out;
}

VectorField permute_slots(const VectorField& z, const ProductChart& product, std::span<const int> perm) {
  if (perm.size() != static_cast<std::size_t>(product.copies()))
    throw std::invalid_argument("permutation size must equal the copy count");
  const std::size_t n = product.base().dimension();
  std::map<std::string, std::string> names;
  for (int a = 0; a < product.copies(); ++a)
    for (const auto& v : product.base().names())
      names[ProductChart::slot_name(v, a)] = ProductChart::slot_name(v, perm[a]);
  std::vector<Expr> comps(z.dimension());
  for (int a = 0; a < product.copies(); ++a)
    for (std::size_t i = 0; i < n; ++i) comps[perm[a] * n + i] = rename(z[a * n + i], names);
  return VectorField(product.chart(), std::move(comps));
}

}  // namespace liesys
