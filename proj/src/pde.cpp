#include "liesys/pde.hpp"

#include "liesys/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace liesys {

namespace {

Expr canonical(const Expr& e) { return Expr::from_canonical(e.canonical()); }

void require_variables(const Expr& e, const Chart& chart, const std::string& what) {
  for (const auto& v : e.variables())
    if (!chart.contains(v)) throw std::invalid_argument(what + " uses '" + v + "', which is not a known variable");
}

std::vector<Expr> expand(const LieDecomposition& d, std::size_t a) {
  const std::size_t n = d.basis.front().dimension();
  std::vector<Expr> out(n);
  for (std::size_t alpha = 0; alpha < d.basis.size(); ++alpha)
    for (std::size_t i = 0; i < n; ++i) out[i] += d.u[a][alpha] * d.basis[alpha][i];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// PdeSystem

PdeSystem::PdeSystem(Chart parameters, Chart chart, std::vector<std::vector<Expr>> fields,
                     std::optional<LieDecomposition> decomposition)
    : parameters_(std::move(parameters)),
      chart_(std::move(chart)),
      fields_(std::move(fields)),
      decomposition_(std::move(decomposition)) {
  if (parameters_.dimension() == 0) throw std::invalid_argument("a PDE system needs at least one parameter");
  if (chart_.dimension() == 0) throw std::invalid_argument("a PDE system needs at least one unknown");
  joint_ = parameters_.extended(chart_.names());
  if (fields_.size() != s())
    throw std::invalid_argument("expected " + std::to_string(s()) + " fields, got " + std::to_string(fields_.size()));
  for (std::size_t a = 0; a < s(); ++a) {
    if (fields_[a].size() != n())
      throw std::invalid_argument("field " + std::to_string(a + 1) + " has " + std::to_string(fields_[a].size()) +
                                  " components, expected " + std::to_string(n()));
    std::vector<CompiledExpr> row;
    for (const auto& e : fields_[a]) {
      require_variables(e, joint_, "field " + std::to_string(a + 1));
      row.emplace_back(e, joint_.names());
    }
    compiled_.push_back(std::move(row));
  }
  if (!decomposition_) return;
  const auto& d = *decomposition_;
  if (d.basis.empty()) throw std::invalid_argument("decomposition has an empty basis");
  for (const auto& x : d.basis)
    if (!(x.chart() == chart_)) throw std::invalid_argument("decomposition basis is not on the system's chart");
  if (d.u.size() != s()) throw std::invalid_argument("decomposition needs one coefficient row per parameter");
  for (std::size_t a = 0; a < s(); ++a) {
    if (d.u[a].size() != d.basis.size())
      throw std::invalid_argument("decomposition row " + std::to_string(a + 1) + " has the wrong length");
    for (const auto& u : d.u[a]) require_variables(u, parameters_, "decomposition coefficient");
    const auto expanded = expand(d, a);
    for (std::size_t i = 0; i < n(); ++i)
      if (is_zero(expanded[i] - fields_[a][i]).verdict == ZeroVerdict::NonZero)
        throw std::invalid_argument("decomposition of field " + std::to_string(a + 1) + " differs in component " +
                                    std::to_string(i + 1));
  }
}

Chart PdeSystem::default_parameters(std::size_t s) {
  if (s == 1) return Chart({"t"});
  std::vector<std::string> names;
  for (std::size_t a = 1; a <= s; ++a) names.push_back("t" + std::to_string(a));
  return Chart(std::move(names));
}

PdeSystem PdeSystem::parse(const Chart& parameters, const Chart& chart,
                           const std::vector<std::vector<std::string>>& fields) {
  const Chart joint = parameters.extended(chart.names());
  std::vector<std::vector<Expr>> exprs;
  for (const auto& row : fields) {
    std::vector<Expr> r;
    for (const auto& text : row) r.push_back(liesys::parse(text, joint));
    exprs.push_back(std::move(r));
  }
  return PdeSystem(parameters, chart, std::move(exprs));
}

PdeSystem PdeSystem::from_decomposition(const Chart& parameters, LieDecomposition decomposition) {
  if (decomposition.basis.empty()) throw std::invalid_argument("decomposition has an empty basis");
  if (decomposition.u.size() != parameters.dimension())
    throw std::invalid_argument("decomposition needs one coefficient row per parameter");
  std::vector<std::vector<Expr>> fields;
  for (std::size_t a = 0; a < decomposition.u.size(); ++a) {
    if (decomposition.u[a].size() != decomposition.basis.size())
      throw std::invalid_argument("decomposition row " + std::to_string(a + 1) + " has the wrong length");
    fields.push_back(expand(decomposition, a));
  }
  Chart chart = decomposition.basis.front().chart();
  return PdeSystem(parameters, std::move(chart), std::move(fields), std::move(decomposition));
}

PdeSystem PdeSystem::riccati(const std::array<std::string, 6>& abcdef) {
  const Chart params({"x", "y"});
  const Chart chart({"u"});
  std::array<Expr, 6> c;
  for (std::size_t i = 0; i < 6; ++i) c[i] = liesys::parse(abcdef[i], params);
  LieDecomposition d;
  d.basis = {VectorField::parse(chart, {"1"}), VectorField::parse(chart, {"u"}), VectorField::parse(chart, {"u^2"})};
  d.u = {{c[2], c[1], c[0]}, {c[5], c[4], c[3]}};
  return from_decomposition(params, std::move(d));
}

void PdeSystem::velocity(std::size_t a, std::span<const double> t, std::span<const double> x,
                         std::span<double> out) const {
  double buffer[32];
  std::vector<double> heap;
  double* joint = buffer;
  if (s() + n() > 32) {
    heap.resize(s() + n());
    joint = heap.data();
  }
  std::copy(t.begin(), t.end(), joint);
  std::copy(x.begin(), x.end(), joint + s());
  const std::span<const double> values(joint, s() + n());
  for (std::size_t i = 0; i < n(); ++i) out[i] = compiled_[a][i](values);
}

// ---------------------------------------------------------------------------
// Curvature

std::vector<Expr> curvature_residual(const PdeSystem& sys, std::size_t a, std::size_t b) {
  if (a >= sys.s() || b >= sys.s()) throw std::out_of_range("parameter index out of range");
  const auto& ya = sys.fields()[a];
  const auto& yb = sys.fields()[b];
  const auto& ta = sys.parameters().names()[a];
  const auto& tb = sys.parameters().names()[b];
  std::vector<Expr> out;
  for (std::size_t i = 0; i < sys.n(); ++i) {
    Expr r = differentiate(yb[i], ta) - differentiate(ya[i], tb);
    for (std::size_t j = 0; j < sys.n(); ++j) {
      const auto& xj = sys.chart().names()[j];
      r += ya[j] * differentiate(yb[i], xj) - yb[j] * differentiate(ya[i], xj);
    }
    out.push_back(canonical(r));
  }
  return out;
}

CurvatureReport curvature(const PdeSystem& sys, int samples, std::uint64_t seed) {
  CurvatureReport report;
  for (std::size_t a = 0; a < sys.s(); ++a)
    for (std::size_t b = a + 1; b < sys.s(); ++b) {
      const auto residuals = curvature_residual(sys, a, b);
      for (std::size_t i = 0; i < residuals.size(); ++i) {
        CurvatureEntry e{a, b, i, residuals[i], is_zero(residuals[i], samples, derive_seed(seed, a * sys.s() + b, i))};
        report.flat = report.flat && e.test.verdict == ZeroVerdict::Zero;
        report.probably_flat = report.probably_flat && e.test.verdict != ZeroVerdict::NonZero;
        report.entries.push_back(std::move(e));
      }
    }
  return report;
}

std::array<Expr, 3> riccati_closedness(const std::array<std::string, 6>& abcdef) {
  const Chart params({"x", "y"});
  std::array<Expr, 6> k;
  for (std::size_t i = 0; i < 6; ++i) k[i] = liesys::parse(abcdef[i], params);
  const auto& [a, b, c, d, e, f] = k;
  auto dx = [](const Expr& v) { return differentiate(v, "x"); };
  auto dy = [](const Expr& v) { return differentiate(v, "y"); };
  return {canonical(dx(d) - dy(a) + b * d - a * e), canonical(dx(e) - dy(b) + Expr(2L) * (c * d - a * f)),
          canonical(dx(f) - dy(c) + c * e - b * f)};
}

BracketCombinationReport bracket_combination(const PdeSystem& sys) {
  if (!sys.decomposition()) throw std::invalid_argument("the system has no Lie decomposition");
  const auto& d = *sys.decomposition();
  BracketCombinationReport report;
  report.expansion_ok = true;  // enforced by the constructor
  const auto closure = closure_test(d.basis);
  report.closed = closure.closed && closure.dropped.empty();
  if (!report.closed) return report;
  report.constants = closure.constants;
  const std::size_t r = d.basis.size();
  report.zero = true;
  for (std::size_t a = 0; a < sys.s(); ++a)
    for (std::size_t b = a + 1; b < sys.s(); ++b) {
      const auto& ta = sys.parameters().names()[a];
      const auto& tb = sys.parameters().names()[b];
      std::vector<Expr> row;
      for (std::size_t g = 0; g < r; ++g) {
        Expr e = differentiate(d.u[b][g], ta) - differentiate(d.u[a][g], tb);
        for (std::size_t al = 0; al < r; ++al)
          for (std::size_t be = 0; be < r; ++be) {
            const Rational& c = report.constants[al][be][g];
            if (c != 0) e += Expr(c) * d.u[a][al] * d.u[b][be];
          }
        e = canonical(e);
        report.zero = report.zero && is_zero(e).verdict != ZeroVerdict::NonZero;
        row.push_back(std::move(e));
      }
      report.residuals.push_back(std::move(row));
    }
  return report;
}

// ---------------------------------------------------------------------------
// Paths

Staircase axis_staircase(std::span<const double> base, std::span<const double> target,
                         std::span<const std::size_t> order) {
  if (base.size() != target.size()) throw std::invalid_argument("base and target differ in dimension");
  Staircase path;
  for (std::size_t a : order) {
    if (a >= base.size()) throw std::out_of_range("axis index out of range");
    path.emplace_back(a, target[a]);
  }
  return path;
}

Staircase random_staircase(std::span<const double> base, std::span<const double> target, int pieces,
                           std::uint64_t seed) {
  if (base.size() != target.size()) throw std::invalid_argument("base and target differ in dimension");
  if (pieces < 1) throw std::invalid_argument("pieces must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::pair<std::size_t, int>> moves;
  std::vector<std::vector<double>> stops(base.size());
  for (std::size_t a = 0; a < base.size(); ++a) {
    std::vector<double> cuts;
    for (int p = 1; p < pieces; ++p) cuts.push_back(u(rng));
    std::sort(cuts.begin(), cuts.end());
    for (double c : cuts) stops[a].push_back(base[a] + c * (target[a] - base[a]));
    stops[a].push_back(target[a]);
    for (int p = 0; p < pieces; ++p) moves.emplace_back(a, p);
  }
  std::shuffle(moves.begin(), moves.end(), rng);
  // Each axis must still reach its stops in order: reassign by occurrence.
  std::vector<int> seen(base.size(), 0);
  Staircase path;
  for (const auto& [a, p] : moves) path.emplace_back(a, stops[a][seen[a]++]);
  return path;
}

namespace {

// States at `values` (sorted away from t[axis]) along one axis from (t, x).
// Returns fewer states than values when the integration was truncated.
std::vector<std::vector<double>> leg(const PdeSystem& sys, std::size_t axis, std::vector<double> t,
                                     std::span<const double> x, std::span<const double> values,
                                     const IntegrateOptions& options, std::size_t* steps = nullptr) {
  const double start = t[axis];
  const double sign = values.empty() || values.back() >= start ? 1.0 : -1.0;
  Rhs rhs = [&sys, axis, start, sign, t](double sigma, std::span<const double> y, std::span<double> dy) mutable {
    t[axis] = start + sign * sigma;
    sys.velocity(axis, t, y, dy);
    if (sign < 0)
      for (double& v : dy) v = -v;
  };
  IntegrateOptions opts = options;
  opts.grid.clear();
  for (double v : values) opts.grid.push_back(std::abs(v - start));
  const double length = opts.grid.empty() ? 0.0 : opts.grid.back();
  const Trajectory tr = integrate(rhs, x, {0.0, length}, opts);
  if (steps) *steps += tr.segments.size();
  return tr.x;
}

double max_distance(std::span<const double> a, std::span<const double> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

PathSolution path_solve(const PdeSystem& sys, std::span<const double> x0, std::span<const double> base,
                        const Staircase& path, const IntegrateOptions& options) {
  if (x0.size() != sys.n()) throw std::invalid_argument("initial state has the wrong dimension");
  if (base.size() != sys.s()) throw std::invalid_argument("base point has the wrong dimension");
  PathSolution out;
  std::vector<double> t(base.begin(), base.end());
  std::vector<double> x(x0.begin(), x0.end());
  out.corners.push_back(t);
  out.states.push_back(x);
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto [axis, value] = path[k];
    if (axis >= sys.s()) throw std::out_of_range("path axis out of range");
    if (value == t[axis]) continue;
    const double target[1] = {value};
    auto states = leg(sys, axis, t, x, target, options, &out.steps);
    if (states.empty()) throw PathBlowUp("path leg " + std::to_string(k + 1) + " blew up", k);
    t[axis] = value;
    x = std::move(states.back());
    out.corners.push_back(t);
    out.states.push_back(x);
  }
  out.endpoint = x;
  return out;
}

AuditReport path_independence_audit(const PdeSystem& sys, std::span<const double> x0, std::span<const double> base,
                                    std::span<const double> target, const AuditOptions& options) {
  if (options.paths < 2 && sys.s() > 1) throw std::invalid_argument("an audit needs at least two paths");
  if (base.size() != sys.s() || target.size() != sys.s())
    throw std::invalid_argument("base and target must have one entry per parameter");
  std::vector<Staircase> paths;
  std::vector<std::size_t> order(sys.s());
  std::iota(order.begin(), order.end(), 0);
  paths.push_back(axis_staircase(base, target, order));
  if (sys.s() > 1) {
    std::reverse(order.begin(), order.end());
    paths.push_back(axis_staircase(base, target, order));
    for (int p = 2; p < options.paths; ++p)
      paths.push_back(random_staircase(base, target, options.pieces, derive_seed(options.seed, p)));
  }
  AuditReport report;
  report.endpoints.resize(paths.size());
  parallel_for(paths.size(), [&](std::size_t p) {
    report.endpoints[p] = path_solve(sys, x0, base, paths[p], options.integrate).endpoint;
  });
  for (std::size_t i = 0; i < paths.size(); ++i)
    for (std::size_t j = i + 1; j < paths.size(); ++j)
      report.spread = std::max(report.spread, max_distance(report.endpoints[i], report.endpoints[j]));
  return report;
}

// ---------------------------------------------------------------------------
// Grids

std::vector<double> PdeGrid::point(std::size_t flat) const {
  std::vector<double> t(axes.size());
  for (std::size_t a = axes.size(); a-- > 0;) {
    t[a] = axes[a][flat % axes[a].size()];
    flat /= axes[a].size();
  }
  return t;
}

std::size_t PdeGrid::flat_index(std::span<const std::size_t> index) const {
  std::size_t flat = 0;
  for (std::size_t a = 0; a < axes.size(); ++a) flat = flat * axes[a].size() + index[a];
  return flat;
}

PdeGrid solve_on_grid(const PdeSystem& sys, std::span<const double> x0, std::vector<std::vector<double>> axes,
                      const IntegrateOptions& options) {
  if (axes.size() != sys.s()) throw std::invalid_argument("expected one grid axis per parameter");
  if (x0.size() != sys.n()) throw std::invalid_argument("initial state has the wrong dimension");
  for (const auto& ax : axes) {
    if (ax.empty()) throw std::invalid_argument("grid axes must be non-empty");
    for (std::size_t i = 1; i < ax.size(); ++i)
      if (!(ax[i] > ax[i - 1])) throw std::invalid_argument("grid axes must be strictly increasing");
  }
  PdeGrid grid;
  grid.axes = std::move(axes);
  const std::size_t s = sys.s();
  std::vector<std::size_t> stride(s, 1);
  for (std::size_t a = s - 1; a-- > 0;) stride[a] = stride[a + 1] * grid.axes[a + 1].size();
  const std::size_t total = stride[0] * grid.axes[0].size();
  grid.values.assign(total, {});
  grid.values[0].assign(x0.begin(), x0.end());

  for (std::size_t axis = 0; axis < s; ++axis) {
    // Seeds: points whose indices on this axis and all later ones are 0.
    std::vector<std::size_t> seeds;
    for (std::size_t f = 0; f < total; f += stride[axis] * grid.axes[axis].size()) seeds.push_back(f);
    std::vector<std::string> failures(seeds.size());
    parallel_for(seeds.size(), [&](std::size_t i) {
      const std::size_t f = seeds[i];
      const auto& ax = grid.axes[axis];
      auto states = leg(sys, axis, grid.point(f), grid.values[f], ax, options);
      if (states.size() < ax.size()) {
        failures[i] = "blow-up along axis " + std::to_string(axis + 1);
        return;
      }
      for (std::size_t j = 1; j < ax.size(); ++j) grid.values[f + j * stride[axis]] = std::move(states[j]);
    });
    for (std::size_t i = 0; i < failures.size(); ++i)
      if (!failures[i].empty()) throw PathBlowUp(failures[i], axis);
  }
  return grid;
}

std::vector<std::size_t> snake_order(std::span<const std::vector<double>> axes) {
  const std::size_t s = axes.size();
  std::size_t total = 1;
  for (const auto& ax : axes) total *= ax.size();
  std::vector<std::size_t> order;
  order.reserve(total);
  std::vector<std::size_t> raw(s), idx(s);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t rest = i;
    for (std::size_t a = s; a-- > 0;) {
      raw[a] = rest % axes[a].size();
      rest /= axes[a].size();
    }
    std::size_t prefix = 0, flat = 0;
    for (std::size_t a = 0; a < s; ++a) {
      idx[a] = prefix % 2 == 0 ? raw[a] : axes[a].size() - 1 - raw[a];
      prefix += idx[a];
      flat = flat * axes[a].size() + idx[a];
    }
    order.push_back(flat);
  }
  return order;
}

PdeSuperposition pde_superpose(const PdeSystem& sys, const SuperpositionRule& rule,
                               std::span<const PdeGrid> particular, std::span<const double> k,
                               std::span<const double> x0_guess, const NewtonOptions& options) {
  if (!sys.decomposition()) throw std::invalid_argument("PDE superposition needs a Lie decomposition");
  if (!(rule.base() == sys.chart())) throw std::invalid_argument("rule and system live on different charts");
  if (particular.size() != static_cast<std::size_t>(rule.m()))
    throw std::invalid_argument("expected " + std::to_string(rule.m()) + " particular solutions");
  if (k.size() != static_cast<std::size_t>(rule.s()))
    throw std::invalid_argument("expected " + std::to_string(rule.s()) + " constants");
  for (const auto& p : particular)
    if (p.axes != particular[0].axes || p.values.size() != particular[0].values.size())
      throw std::invalid_argument("particular solutions must share one grid");
  const auto tangency = verify_tangency(rule, sys.decomposition()->basis);
  if (!tangency.tangent) throw std::invalid_argument("rule is not tangent to the decomposition's basis fields");

  PdeSuperposition out;
  out.solution.axes = particular[0].axes;
  out.solution.values.assign(particular[0].values.size(), {});
  std::vector<double> guess(x0_guess.begin(), x0_guess.end());
  const auto order = snake_order(out.solution.axes);
  if (guess.empty()) guess = particular[0].values[order.front()];
  for (std::size_t flat : order) {
    std::vector<std::vector<double>> xs;
    for (const auto& p : particular) xs.push_back(p.values[flat]);
    guess = solve_leaf(rule, xs, k, guess, static_cast<double>(flat), options, &out.newton_iterations);
    out.solution.values[flat] = guess;
  }
  return out;
}

}  // namespace liesys
