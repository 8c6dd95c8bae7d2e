#include "liesys/superposition.hpp"

#include "liesys/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace liesys {

namespace {

Chart make_phi_chart(const Chart& base, int m, int s) {
  std::vector<std::string> names;
  for (int a = 1; a <= m; ++a)
    for (const auto& v : base.names()) names.push_back(ProductChart::slot_name(v, a));
  for (int j = 0; j < s; ++j) names.push_back(SuperpositionRule::constant_name(j));
  return Chart(std::move(names));
}

double max_abs(std::span<const double> v) {
  double m = 0;
  for (double d : v) m = std::max(m, std::isfinite(d) ? std::abs(d) : INFINITY);
  return m;
}

// The rule flattened for floating-point work. Equations are Psi - k followed
// by the constraints; the Jacobian is taken with respect to slot 0.
struct CompiledRule {
  std::size_t n = 0, m = 0, s = 0, c = 0;
  std::vector<CompiledExpr> eqs;
  std::vector<std::vector<CompiledExpr>> jac;
  std::vector<CompiledExpr> phi;

  explicit CompiledRule(const SuperpositionRule& rule) {
    n = rule.base().dimension();
    m = static_cast<std::size_t>(rule.m());
    s = rule.psi().size();
    c = rule.constraints().size();
    const auto& vars = rule.product().chart().names();
    auto slot0 = rule.product().slot_variables(0);
    std::vector<Expr> all = rule.psi();
    all.insert(all.end(), rule.constraints().begin(), rule.constraints().end());
    for (const auto& e : all) {
      eqs.emplace_back(e, vars);
      std::vector<CompiledExpr> row;
      for (const auto& v : slot0) row.emplace_back(differentiate(e, v), vars);
      jac.push_back(std::move(row));
    }
    if (rule.phi())
      for (const auto& e : *rule.phi()) phi.emplace_back(e, rule.phi_chart().names());
  }

  std::vector<double> point(std::span<const double> x0, std::span<const std::vector<double>> xs) const {
    std::vector<double> p(x0.begin(), x0.end());
    for (const auto& x : xs) p.insert(p.end(), x.begin(), x.end());
    return p;
  }

  // F(p) = (Psi(p) - k, constraints(p)).
  std::vector<double> residual(std::span<const double> p, std::span<const double> k) const {
    std::vector<double> f(eqs.size());
    for (std::size_t j = 0; j < eqs.size(); ++j) f[j] = eqs[j](p) - (j < s ? k[j] : 0.0);
    return f;
  }

  Eigen::MatrixXd jacobian(std::span<const double> p, std::size_t rows) const {
    Eigen::MatrixXd jm(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < rows; ++j)
      for (std::size_t i = 0; i < n; ++i) jm(j, i) = jac[j][i](p);
    return jm;
  }

  std::vector<double> apply_phi(std::span<const std::vector<double>> xs, std::span<const double> k) const {
    std::vector<double> in;
    for (const auto& x : xs) in.insert(in.end(), x.begin(), x.end());
    in.insert(in.end(), k.begin(), k.end());
    std::vector<double> out(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) out[i] = phi[i](in);
    return out;
  }
};

std::vector<double> newton(const CompiledRule& cr, std::span<const std::vector<double>> xs, std::span<const double> k,
                           std::span<const double> guess, double t, const NewtonOptions& opt, int* iterations) {
  std::vector<double> x(guess.begin(), guess.end());
  auto res = [&](std::span<const double> x0) { return cr.residual(cr.point(x0, xs), k); };
  auto f = res(x);
  double r = max_abs(f);
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (!std::isfinite(r)) throw NewtonFailure("rule is singular at the current leaf point", t);
    if (iterations) ++*iterations;
    Eigen::MatrixXd jm = cr.jacobian(cr.point(x, xs), cr.n);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jm);
    if (!jm.allFinite() || lu.rank() < static_cast<Eigen::Index>(cr.n))
      throw NewtonFailure("singular Jacobian of the rule with respect to slot 0", t);
    Eigen::VectorXd rhs = -Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
    Eigen::VectorXd dx = lu.solve(rhs);
    double lambda = 1.0;
    std::vector<double> xn(cr.n), fn;
    double rn = INFINITY;
    for (int h = 0; h <= opt.max_halvings; ++h) {
      for (std::size_t i = 0; i < cr.n; ++i) xn[i] = x[i] + lambda * dx(static_cast<Eigen::Index>(i));
      fn = res(xn);
      rn = max_abs(fn);
      if (rn < r) break;
      lambda *= 0.5;
    }
    // Once within tolerance, the step just taken is a polishing step.
    if (r < opt.residual_tol) return rn < r ? xn : x;
    if (!std::isfinite(rn)) throw NewtonFailure("damped Newton step left the rule's domain", t);
    x.swap(xn);
    f.swap(fn);
    r = rn;
  }
  if (r < opt.residual_tol) return x;
  throw NewtonFailure("Newton did not converge in " + std::to_string(opt.max_iterations) +
                          " iterations (residual " + std::to_string(r) + ")",
                      t);
}

// Grid shared by a tuple of trajectories: the common prefix of their grids.
std::size_t shared_length(std::span<const Trajectory> tuple) {
  if (tuple.empty()) throw std::invalid_argument("empty trajectory tuple");
  std::size_t len = tuple[0].size();
  for (const auto& tr : tuple) len = std::min(len, tr.size());
  for (const auto& tr : tuple)
    for (std::size_t j = 0; j < len; ++j)
      if (std::abs(tr.t[j] - tuple[0].t[j]) > 1e-12 * std::max(1.0, std::abs(tr.t[j])))
        throw std::invalid_argument("trajectories do not share a grid");
  return len;
}

// Random point of the product chart moved onto the constraint set by
// minimum-norm Gauss-Newton steps in the slot-0 coordinates.
std::optional<std::vector<double>> point_on_constraints(const CompiledRule& cr, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> lattice(-2048, 2048);
  std::vector<double> p((cr.m + 1) * cr.n);
  for (auto& v : p) v = lattice(rng) / 1024.0;
  if (cr.c == 0) return p;
  std::vector<double> zero_k(cr.s, 0.0);
  for (int it = 0; it < 60; ++it) {
    auto f = cr.residual(p, zero_k);
    Eigen::VectorXd g(static_cast<Eigen::Index>(cr.c));
    for (std::size_t i = 0; i < cr.c; ++i) g(static_cast<Eigen::Index>(i)) = f[cr.s + i];
    if (!g.allFinite()) return std::nullopt;
    if (g.lpNorm<Eigen::Infinity>() < 1e-14) return p;
    Eigen::MatrixXd full = cr.jacobian(p, cr.s + cr.c);
    Eigen::MatrixXd jc = full.bottomRows(static_cast<Eigen::Index>(cr.c));
    if (!jc.allFinite()) return std::nullopt;
    Eigen::VectorXd dx = jc.completeOrthogonalDecomposition().solve(-g);
    for (std::size_t i = 0; i < cr.n; ++i) p[i] += dx(static_cast<Eigen::Index>(i));
  }
  return std::nullopt;
}

}  // namespace

// ---------------------------------------------------------------------------

SuperpositionRule::SuperpositionRule(Chart base, int m, const std::vector<std::string>& psi,
                                     const std::optional<std::vector<std::string>>& phi,
                                     const std::vector<std::string>& constraints)
    : m_(m),
      product_(std::move(base), (m >= 1 ? m : 1) + 1),
      phi_chart_(make_phi_chart(product_.base(), m >= 1 ? m : 1, std::max<int>(1, static_cast<int>(psi.size())))) {
  if (m < 1) throw std::invalid_argument("a superposition rule needs m >= 1");
  const std::size_t n = product_.base().dimension();
  if (psi.empty() || psi.size() > n)
    throw std::invalid_argument("rule needs 1..n level-map components, got " + std::to_string(psi.size()));
  if (constraints.size() != n - psi.size())
    throw std::invalid_argument("rule of rank " + std::to_string(psi.size()) + " on dimension " + std::to_string(n) +
                                " needs " + std::to_string(n - psi.size()) + " constraints, got " +
                                std::to_string(constraints.size()));
  for (const auto& p : psi) psi_.push_back(parse(p, product_.chart()));
  for (const auto& c : constraints) constraints_.push_back(parse(c, product_.chart()));
  if (phi) {
    if (phi->size() != n)
      throw std::invalid_argument("explicit map needs " + std::to_string(n) + " components, got " +
                                  std::to_string(phi->size()));
    std::vector<Expr> parsed;
    for (const auto& p : *phi) parsed.push_back(parse(p, phi_chart_));
    phi_ = std::move(parsed);
  }
}

TangencyReport verify_tangency(const SuperpositionRule& rule, std::span<const VectorField> fields,
                               const TangencyOptions& options) {
  TangencyReport report;
  const auto& product = rule.product();
  CompiledRule cr(rule);

  // Constraint-set samples shared by every residual of a partial rule.
  std::vector<std::vector<double>> on_m;
  if (rule.is_partial()) {
    std::mt19937_64 rng(options.seed);
    for (int attempt = 0; attempt < options.samples * 20 && static_cast<int>(on_m.size()) < options.samples;
         ++attempt)
      if (auto p = point_on_constraints(cr, rng)) on_m.push_back(std::move(*p));
  }

  for (std::size_t a = 0; a < fields.size(); ++a) {
    if (!(fields[a].chart() == rule.base()))
      throw std::invalid_argument("field is not on the rule's base chart");
    auto pro = diagonal_prolongation(fields[a], product);
    auto judge = [&](const Expr& target, std::size_t j, bool constraint) {
      TangencyEntry e;
      e.field = a;
      e.component = j;
      e.constraint = constraint;
      e.residual = pro.apply(target);
      if (e.residual.is_canonically_zero()) {
        e.verdict = ZeroVerdict::Zero;
      } else if (!rule.is_partial()) {
        auto z = is_zero(e.residual, options.samples, derive_seed(options.seed, a, j));
        e.verdict = z.verdict;
        e.exact = z.exact;
        e.samples = z.samples;
      } else {
        CompiledExpr ce(e.residual, product.chart().names());
        e.exact = false;
        e.samples = static_cast<int>(on_m.size());
        for (const auto& p : on_m) {
          double v = ce(p);
          e.max_abs = std::max(e.max_abs, std::isfinite(v) ? std::abs(v) : INFINITY);
        }
        e.verdict = !on_m.empty() && e.max_abs <= options.zero_threshold * (1 + max_abs(on_m.front()))
                        ? ZeroVerdict::Unknown
                        : ZeroVerdict::NonZero;
      }
      if (e.verdict == ZeroVerdict::NonZero) report.tangent = false;
      if (!e.exact) report.exact = false;
      report.entries.push_back(std::move(e));
    };
    for (std::size_t j = 0; j < rule.psi().size(); ++j) judge(rule.psi()[j], j, false);
    for (std::size_t j = 0; j < rule.constraints().size(); ++j) judge(rule.constraints()[j], j, true);
  }
  return report;
}

std::vector<double> evaluate_psi(const SuperpositionRule& rule, std::span<const double> product_point) {
  if (product_point.size() != rule.product().chart().dimension())
    throw std::invalid_argument("product point has the wrong dimension");
  std::vector<double> out;
  for (const auto& p : rule.psi()) out.push_back(CompiledExpr(p, rule.product().chart().names())(product_point));
  return out;
}

std::vector<double> constants_from_initial(const SuperpositionRule& rule, std::span<const double> x0,
                                           std::span<const std::vector<double>> particular) {
  if (particular.size() != static_cast<std::size_t>(rule.m()))
    throw std::invalid_argument("expected " + std::to_string(rule.m()) + " particular solutions");
  CompiledRule cr(rule);
  auto p = cr.point(x0, particular);
  std::vector<double> zero(cr.s, 0.0);
  auto f = cr.residual(p, zero);
  f.resize(cr.s);
  return f;
}

DriftReport verify_along_solutions(const SuperpositionRule& rule, const LieSystem& sys,
                                   std::span<const Trajectory> tuple, double tol_const) {
  if (tuple.size() != static_cast<std::size_t>(rule.m() + 1))
    throw std::invalid_argument("expected " + std::to_string(rule.m() + 1) + " trajectories");
  if (sys.dimension() != rule.base().dimension())
    throw std::invalid_argument("system and rule live on different dimensions");
  CompiledRule cr(rule);
  const std::size_t len = shared_length(tuple);
  DriftReport rep;
  rep.tol_const = tol_const;
  rep.drift.assign(cr.s, 0.0);
  std::vector<double> zero(cr.s, 0.0);
  for (std::size_t j = 0; j < len; ++j) {
    std::vector<double> p;
    for (const auto& tr : tuple) p.insert(p.end(), tr.x[j].begin(), tr.x[j].end());
    auto f = cr.residual(p, zero);
    f.resize(cr.s);
    if (max_abs(f) == INFINITY) {
      rep.singular_time = tuple[0].t[j];
      rep.pass = false;
      return rep;
    }
    if (j == 0) rep.initial = f;
    for (std::size_t i = 0; i < cr.s; ++i) rep.drift[i] = std::max(rep.drift[i], std::abs(f[i] - rep.initial[i]));
  }
  rep.max_drift = max_abs(rep.drift);
  rep.pass = len > 0 && rep.max_drift <= tol_const;
  return rep;
}

std::vector<double> solve_leaf(const SuperpositionRule& rule, std::span<const std::vector<double>> particular,
                               std::span<const double> k, std::span<const double> guess, double t,
                               const NewtonOptions& options, int* iterations) {
  CompiledRule cr(rule);
  return newton(cr, particular, k, guess, t, options, iterations);
}

Reconstruction reconstruct(const SuperpositionRule& rule, std::span<const Trajectory> particular,
                           std::span<const double> k, std::span<const double> x0_guess,
                           const NewtonOptions& options) {
  if (particular.size() != static_cast<std::size_t>(rule.m()))
    throw std::invalid_argument("expected " + std::to_string(rule.m()) + " particular solutions");
  if (k.size() != static_cast<std::size_t>(rule.s()))
    throw std::invalid_argument("expected " + std::to_string(rule.s()) + " constants");
  CompiledRule cr(rule);
  const std::size_t len = shared_length(particular);
  Reconstruction out;
  out.used_phi = rule.phi().has_value();
  std::vector<double> guess(x0_guess.begin(), x0_guess.end());
  if (guess.empty()) guess = particular[0].x[0];
  if (guess.size() != cr.n) throw std::invalid_argument("initial guess has the wrong dimension");

  std::vector<double> newton_prev = guess;
  for (std::size_t j = 0; j < len; ++j) {
    const double t = particular[0].t[j];
    std::vector<std::vector<double>> xs;
    for (const auto& tr : particular) xs.push_back(tr.x[j]);
    std::vector<double> x;
    if (out.used_phi) {
      x = cr.apply_phi(xs, k);
      if (max_abs(x) == INFINITY) throw NewtonFailure("explicit map is singular", t);
      if (j % static_cast<std::size_t>(std::max(1, options.crosscheck_every)) == 0) {
        auto xn = newton(cr, xs, k, j == 0 ? std::span<const double>(guess) : newton_prev, t, options,
                         &out.newton_iterations);
        ++out.newton_solves;
        for (std::size_t i = 0; i < cr.n; ++i) out.crosscheck = std::max(out.crosscheck, std::abs(xn[i] - x[i]));
        newton_prev = xn;
      }
    } else {
      x = newton(cr, xs, k, guess, t, options, &out.newton_iterations);
      ++out.newton_solves;
      guess = x;
    }
    out.solution.t.push_back(t);
    out.solution.x.push_back(std::move(x));
  }
  out.solution.truncation_time = out.solution.t.empty() ? 0.0 : out.solution.t.back();
  return out;
}

PartialRuleReport verify_partial_rule(const SuperpositionRule& rule, const LieSystem& sys,
                                      std::span<const Trajectory> particular, std::span<const double> k,
                                      const PartialRuleOptions& options) {
  if (particular.size() != static_cast<std::size_t>(rule.m()))
    throw std::invalid_argument("expected " + std::to_string(rule.m()) + " particular solutions");
  double start = particular[0].t.front(), end = INFINITY;
  for (const auto& tr : particular) end = std::min(end, tr.end_time());
  const auto steps = static_cast<std::size_t>(std::floor((end - start) / options.step + 1e-9));
  if (steps < 2) throw std::invalid_argument("trajectories are too short for the finite-difference check");

  std::vector<double> grid;
  for (std::size_t j = 0; j <= steps; ++j) grid.push_back(start + static_cast<double>(j) * options.step);
  std::vector<Trajectory> sampled;
  for (const auto& tr : particular) sampled.push_back(tr.segments.empty() ? tr : tr.resampled(grid));

  std::vector<double> guess;
  if (!rule.phi()) {
    // Start on the leaf through the first particular solution scaled by k.
    guess = particular[0].x[0];
  }
  auto rec = reconstruct(rule, sampled, k, guess);
  const auto& xt = rec.solution;
  CompiledRule cr(rule);
  PartialRuleReport rep;
  rep.grid_points = xt.size();
  std::vector<double> zero(cr.s, 0.0);
  for (std::size_t j = 0; j < xt.size(); ++j) {
    std::vector<std::vector<double>> xs;
    for (const auto& tr : sampled) xs.push_back(tr.x[j]);
    auto f = cr.residual(cr.point(xt.x[j], xs), zero);
    for (std::size_t i = cr.s; i < f.size(); ++i)
      rep.constraint_residual = std::max(rep.constraint_residual, std::abs(f[i]));
    if (j == 0 || j + 1 >= xt.size()) continue;
    auto v = evaluate_field(sys, xt.t[j], xt.x[j]);
    for (std::size_t i = 0; i < cr.n; ++i) {
      double fd = (xt.x[j + 1][i] - xt.x[j - 1][i]) / (xt.t[j + 1] - xt.t[j - 1]);
      rep.ode_residual = std::max(rep.ode_residual, std::abs(fd - v[i]));
    }
  }
  rep.pass = rep.ode_residual <= options.tol_ode && rep.constraint_residual <= options.tol_constraint;
  return rep;
}

ConsistencyReport check_phi_psi(const SuperpositionRule& rule, int samples, std::uint64_t seed) {
  if (!rule.phi()) throw std::invalid_argument("rule has no explicit map");
  ConsistencyReport rep;
  std::map<std::string, Expr> slot0;
  auto names0 = rule.product().slot_variables(0);
  for (std::size_t i = 0; i < names0.size(); ++i) slot0[names0[i]] = (*rule.phi())[i];
  rep.symbolic = true;
  for (std::size_t j = 0; j < rule.psi().size(); ++j) {
    Expr diff = substitute(rule.psi()[j], slot0) - Expr::variable(SuperpositionRule::constant_name(static_cast<int>(j)));
    auto z = is_zero(diff);
    if (!(z.verdict == ZeroVerdict::Zero && z.exact)) rep.symbolic = false;
  }
  for (const auto& c : rule.constraints()) {
    auto z = is_zero(substitute(c, slot0));
    if (!(z.verdict == ZeroVerdict::Zero && z.exact)) rep.symbolic = false;
  }

  CompiledRule cr(rule);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> lattice(-2048, 2048);
  std::vector<double> zero(cr.s, 0.0);
  for (int i = 0; i < samples * 10 && rep.evaluated < samples; ++i) {
    std::vector<std::vector<double>> xs(cr.m, std::vector<double>(cr.n));
    for (auto& x : xs)
      for (auto& v : x) v = lattice(rng) / 1024.0;
    std::vector<double> k(cr.s);
    for (auto& v : k) v = lattice(rng) / 1024.0;
    auto x0 = cr.apply_phi(xs, k);
    if (max_abs(x0) > 1e6) {
      ++rep.skipped;
      continue;
    }
    auto f = cr.residual(cr.point(x0, xs), k);
    if (max_abs(f) == INFINITY) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    for (std::size_t j = 0; j < cr.s; ++j) rep.max_error = std::max(rep.max_error, std::abs(f[j]) / (1 + std::abs(k[j])));
    for (std::size_t j = cr.s; j < f.size(); ++j) rep.max_constraint = std::max(rep.max_constraint, std::abs(f[j]));
  }
  return rep;
}

int generic_jacobian_rank(const SuperpositionRule& rule, int samples, std::uint64_t seed) {
  CompiledRule cr(rule);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> lattice(-2048, 2048);
  int best = 0;
  for (int i = 0; i < samples; ++i) {
    std::vector<double> p((cr.m + 1) * cr.n);
    for (auto& v : p) v = lattice(rng) / 1024.0;
    Eigen::MatrixXd j = cr.jacobian(p, cr.s);
    std::vector<double> flat(j.data(), j.data() + j.size());
    best = std::max(best, numerical_rank(flat, static_cast<std::size_t>(j.rows()), static_cast<std::size_t>(j.cols())));
  }
  return best;
}

}  // namespace liesys
