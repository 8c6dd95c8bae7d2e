#include "liesys/tasks.hpp"

#include "liesys/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace liesys {

using ojson = nlohmann::ordered_json;

namespace {

struct Resolved {
  double tol;
  double tol_const;
  std::uint64_t seed;
  std::pair<double, double> t_span;
  int samples;
};

Resolved resolve(const Problem& p, const Settings& s) {
  return {s.tol.value_or(p.tol.value_or(1e-9)), s.tol_const.value_or(p.tol_const.value_or(1e-6)),
          s.seed.value_or(p.seed.value_or(kDefaultSeed)), s.t_span.value_or(p.t_span.value_or(std::pair{0.0, 1.0})),
          s.samples.value_or(32)};
}

IntegrateOptions integrate_options(const Resolved& r) {
  IntegrateOptions o;
  o.tol = r.tol;
  return o;
}

Report start(const std::string& command, const Problem& p, const Resolved& r) {
  Report rep;
  rep.command = command;
  rep.problem = p.name;
  rep.settings["tol"] = r.tol;
  rep.settings["tol_const"] = r.tol_const;
  rep.settings["seed"] = r.seed;
  rep.settings["t_span"] = {r.t_span.first, r.t_span.second};
  rep.settings["samples"] = r.samples;
  return rep;
}

std::vector<std::string> field_strings(std::span<const VectorField> fields) {
  std::vector<std::string> out;
  for (const auto& f : fields) out.push_back(f.str());
  return out;
}

Table trajectory_table(const std::string& name, const Trajectory& tr, const std::vector<std::string>& names) {
  Table t{name, {"t"}, {}};
  for (const auto& n : names) t.columns.push_back(n);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    std::vector<double> row{tr.t[i]};
    row.insert(row.end(), tr.x[i].begin(), tr.x[i].end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

const RuleSpec& primary_rule(const Problem& p) {
  for (const auto& r : p.rules)
    if (r.expect_tangent) return r;
  throw SchemaError("$.rules", "the problem has no superposition rule");
}

std::string rule_label(const RuleSpec& r, std::size_t index) {
  return r.name.empty() ? "rule " + std::to_string(index + 1) : r.name;
}

// Start points of the particular solutions: from the file, or a random
// fundamental tuple.
std::vector<std::vector<double>> particular_points(const Problem& p, const LieSystem& sys, int m,
                                                   const Resolved& r) {
  if (p.particular) {
    if (p.particular->size() < static_cast<std::size_t>(m))
      throw SchemaError("$.particular", "needs at least " + std::to_string(m) + " start points");
    return {p.particular->begin(), p.particular->begin() + m};
  }
  SamplingOptions opts;
  opts.seed = r.seed;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto tuple = sample_tuple(opts, sys.dimension(), m, derive_seed(r.seed, 0x9a7, attempt));
    if (!coincident_slots(tuple) && is_fundamental_tuple(sys, tuple)) return tuple;
  }
  throw std::runtime_error("no fundamental tuple found in 100 draws");
}

std::vector<double> slot0_point(const Problem& p, const LieSystem& sys, const Resolved& r) {
  if (p.x0) return *p.x0;
  SamplingOptions opts;
  return sample_tuple(opts, sys.dimension(), 1, derive_seed(r.seed, 0x50))[0];
}

double max_rel_error(const Trajectory& a, const Trajectory& b) {
  double worst = 0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
    for (std::size_t j = 0; j < a.x[i].size(); ++j)
      worst = std::max(worst, std::abs(a.x[i][j] - b.x[i][j]) / std::max(1.0, std::abs(b.x[i][j])));
  return worst;
}

template <class F>
double timed_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<Trajectory> integrate_tuple(const LieSystem& sys, std::span<const std::vector<double>> points,
                                        std::pair<double, double> t_span, const IntegrateOptions& options) {
  std::vector<Trajectory> raw(points.size());
  parallel_for(points.size(), [&](std::size_t i) { raw[i] = integrate(sys, points[i], t_span, options); });
  const auto grid = common_grid(raw);
  std::vector<Trajectory> out;
  for (const auto& tr : raw) out.push_back(tr.resampled(grid));
  return out;
}

// ---------------------------------------------------------------------------

Report cmd_closure(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("closure", p, r);
  rep.settings["complete"] = s.complete;
  const auto fields = problem_fields(p);
  const auto report = closure_test(fields, {.complete = s.complete});
  std::string detail = report.closed ? "" : "not closed";
  if (report.witness)
    detail = "[X" + std::to_string(report.witness->alpha + 1) + ", X" + std::to_string(report.witness->beta + 1) +
             "] = " + report.witness->bracket.str() + " is outside the span";
  if (report.cap_exceeded) detail = "completion exceeded the dimension cap";
  rep.add(check_true("closed", report.closed, detail));
  if (report.closed && p.expect.dimension)
    rep.add(check_eq("dimension", static_cast<double>(report.dimension()), *p.expect.dimension));
  if (report.closed) rep.add(check_eq("Jacobi residual", report.jacobi_residual.get_d(), 0.0, "exact"));
  rep.summary["dimension"] = report.dimension();
  rep.summary["basis"] = field_strings(report.basis);
  rep.data["dropped"] = report.dropped;
  rep.data["dimension_trace"] = report.dimension_trace;
  if (report.witness)
    rep.summary["witness"] = "[X" + std::to_string(report.witness->alpha + 1) + ", X" +
                             std::to_string(report.witness->beta + 1) + "] = " + report.witness->bracket.str();
  if (report.closed) {
    ojson constants = ojson::array();
    for (std::size_t a = 0; a < report.constants.size(); ++a)
      for (std::size_t b = 0; b < report.constants.size(); ++b)
        for (std::size_t g = 0; g < report.constants.size(); ++g)
          if (a < b && report.constants[a][b][g] != 0)
            constants.push_back({{"alpha", a}, {"beta", b}, {"gamma", g}, {"value", report.constants[a][b][g].get_str()}});
    rep.summary["structure_constants"] = constants;
  }
  return rep;
}

Report cmd_m(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("m", p, r);
  auto fields = problem_fields(p);
  const auto keep = independent_subset(fields);
  std::vector<VectorField> basis;
  for (auto i : keep) basis.push_back(fields[i]);
  SamplingOptions opts;
  opts.seed = r.seed;
  opts.samples = r.samples;
  FundamentalSizeReport report;
  const double ms = timed_ms([&] { report = minimal_m(basis, opts); });
  rep.add(check_true("consistent", report.consistent, report.message));
  if (p.expect.m) rep.add(check_eq("m", report.m, *p.expect.m));
  rep.summary["m"] = report.m;
  rep.summary["r"] = report.r;
  rep.summary["n"] = report.n;
  rep.summary["rank_profile"] = report.rank_profile;
  rep.summary["runtime_ms"] = ms;
  rep.data["full_rank_fraction"] = report.full_rank_fraction;
  rep.data["samples"] = report.samples;
  rep.data["discarded"] = report.discarded;
  rep.data["dropped_dependent"] = fields.size() - basis.size();
  return rep;
}

Report cmd_solve(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("solve", p, r);
  const auto sys = problem_system(p);
  const auto x0 = slot0_point(p, sys, r);
  const auto tr = integrate(sys, x0, r.t_span, integrate_options(r));
  rep.add(check_true("reached end of span", !tr.truncated(),
                     tr.truncated() ? "truncated at t = " + format_number(tr.truncation_time) : ""));
  rep.summary["steps"] = tr.segments.size();
  rep.summary["end_time"] = tr.end_time();
  rep.summary["x_end"] = tr.x.back();
  rep.data["x0"] = x0;
  rep.tables.push_back(trajectory_table("solution", tr, p.chart));
  return rep;
}

Report cmd_verify(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("verify", p, r);
  if (p.rules.empty()) throw SchemaError("$.rules", "the problem has no superposition rule");
  const auto sys = problem_system(p);
  const auto x0 = slot0_point(p, sys, r);
  for (std::size_t i = 0; i < p.rules.size(); ++i) {
    const auto& spec = p.rules[i];
    const std::string label = rule_label(spec, i);
    const auto rule = problem_rule(p, spec);
    TangencyOptions topt;
    topt.seed = derive_seed(r.seed, 0x7a, i);
    const auto tangency = verify_tangency(rule, sys.basis(), topt);
    ojson residuals = ojson::array();
    std::string first_nonzero;
    for (const auto& e : tangency.entries) {
      residuals.push_back({{"field", e.field},
                           {"component", e.component},
                           {"constraint", e.constraint},
                           {"residual", e.residual.canonical_str()},
                           {"verdict", to_string(e.verdict)},
                           {"exact", e.exact}});
      if (first_nonzero.empty() && e.verdict == ZeroVerdict::NonZero && !tangency.tangent)
        first_nonzero = "X~" + std::to_string(e.field + 1) + " applied to " + (e.constraint ? "constraint " : "Psi") +
                        std::to_string(e.component + 1) + " = " + e.residual.canonical_str();
    }
    rep.data[label]["tangency"] = residuals;
    if (spec.expect_tangent) {
      rep.add(check_true(label + ": tangent to the prolonged fields", tangency.tangent,
                         tangency.exact ? "exact" : "sampled on the constraint set"));
    } else {
      rep.add(check_true(label + ": fails tangency (kept as a diagnostic)", !tangency.tangent, first_nonzero));
    }

    auto points = particular_points(p, sys, spec.m, r);
    points.insert(points.begin(), x0);
    const auto tuple = integrate_tuple(sys, points, r.t_span, integrate_options(r));
    const auto drift = verify_along_solutions(rule, sys, tuple, r.tol_const);
    rep.summary[label + ".max_drift"] = drift.max_drift;
    rep.data[label]["drift"] = drift.drift;
    rep.data[label]["psi_initial"] = drift.initial;
    if (spec.expect_tangent) {
      rep.add(check_le(label + ": drift of Psi along solutions", drift.max_drift, r.tol_const,
                       drift.singular_time ? "Psi singular at t = " + format_number(*drift.singular_time) : ""));
      if (spec.phi) {
        const auto cons = check_phi_psi(rule, 100, derive_seed(r.seed, 0xc0, i));
        rep.add(check_le(label + ": Psi(Phi(x; k), x) = k", cons.max_error, 1e-8,
                         cons.symbolic ? "symbolic identity" : std::to_string(cons.evaluated) + " random points"));
      }
      rep.summary[label + ".jacobian_rank"] = generic_jacobian_rank(rule);
    }
  }
  return rep;
}

namespace {

Report superpose_rule(const Problem& p, const Settings& s, const Resolved& r, const RuleSpec& spec,
                      const LieSystem& sys, Trajectory* solution) {
  Report rep = start("superpose", p, r);
  const auto rule = problem_rule(p, spec);
  const auto points = particular_points(p, sys, spec.m, r);
  const auto particular = integrate_tuple(sys, points, r.t_span, integrate_options(r));

  std::vector<double> k;
  std::vector<double> guess;
  if (s.k || p.k) {
    k = s.k ? *s.k : *p.k;
    if (k.size() != static_cast<std::size_t>(rule.s()))
      throw SchemaError("k", "expected " + std::to_string(rule.s()) + " constants");
    guess = p.x0 ? *p.x0 : points[0];
  } else {
    const auto x0 = slot0_point(p, sys, r);
    k = constants_from_initial(rule, x0, points);
    guess = x0;
  }
  rep.summary["k"] = k;

  if (rule.is_partial()) {
    const auto report = verify_partial_rule(rule, sys, particular, k);
    rep.add(check_le("ODE residual of the new solution", report.ode_residual, PartialRuleOptions{}.tol_ode));
    rep.add(check_le("constraint residual", report.constraint_residual, PartialRuleOptions{}.tol_constraint));
    rep.summary["grid_points"] = report.grid_points;
    return rep;
  }

  const auto recon = reconstruct(rule, particular, k, guess);
  // Reference: the same solution integrated directly from its start point.
  const auto direct =
      integrate(sys, recon.solution.x.front(), r.t_span, integrate_options(r)).resampled(recon.solution.t);
  const double err = max_rel_error(recon.solution, direct);
  rep.add(check_le("reconstruction vs direct integration", err, 1e-5, "max |x - x_direct| / max(1, |x_direct|)"));
  std::vector<Trajectory> tuple{recon.solution};
  tuple.insert(tuple.end(), particular.begin(), particular.end());
  const auto drift = verify_along_solutions(rule, sys, tuple, r.tol_const);
  rep.add(check_le("drift of Psi along the reconstructed tuple", drift.max_drift, r.tol_const));
  if (recon.used_phi) rep.add(check_le("explicit map vs Newton leaf solve", recon.crosscheck, 1e-8));
  rep.summary["reconstruction_error"] = err;
  rep.summary["used_phi"] = recon.used_phi;
  rep.summary["newton_solves"] = recon.newton_solves;
  rep.summary["grid_points"] = recon.solution.size();
  rep.tables.push_back(trajectory_table("reconstructed", recon.solution, p.chart));
  for (std::size_t i = 0; i < particular.size(); ++i)
    rep.tables.push_back(trajectory_table("particular_" + std::to_string(i + 1), particular[i], p.chart));
  if (solution) *solution = recon.solution;
  return rep;
}

}  // namespace

Report cmd_superpose(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  const auto sys = problem_system(p);
  // Explicit constants belong to one rule; otherwise every rule reconstructs
  // the solution through x0.
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < p.rules.size(); ++i)
    if (p.rules[i].expect_tangent && (chosen.empty() || !(s.k || p.k))) chosen.push_back(i);
  if (chosen.empty()) primary_rule(p);
  if (chosen.size() == 1) {
    Report rep = superpose_rule(p, s, r, p.rules[chosen[0]], sys, nullptr);
    rep.settings["k"] = rep.summary["k"];
    return rep;
  }

  Report rep = start("superpose", p, r);
  std::vector<Trajectory> solutions(chosen.size());
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    const auto& spec = p.rules[chosen[c]];
    rep.merge(superpose_rule(p, s, r, spec, sys, &solutions[c]), rule_label(spec, chosen[c]));
  }
  double spread = 0;
  for (std::size_t c = 1; c < solutions.size(); ++c)
    if (!solutions[c].t.empty() && solutions[c].t == solutions[0].t)
      spread = std::max(spread, max_rel_error(solutions[c], solutions[0]));
  rep.add(check_le("all rules give the same solution", spread, 1e-6));
  return rep;
}

Report cmd_group(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("group", p, r);
  if (!p.action) throw SchemaError("$.action", "the group command needs an action");
  const auto& spec = *p.action;
  const auto curve = problem_matrix_curve(p);
  const auto action = GroupAction::by_name(spec.name, curve.dimension());
  const auto opts = integrate_options(r);

  const auto gt = solve_group_equation(curve, r.t_span, opts);
  rep.add(check_true("group solution reached end of span", !gt.blew_up));
  rep.add(check_le("defect |g' g^-1 - a|", gt.max_defect, 10 * r.tol, "at step midpoints"));
  rep.add(check_le("Liouville |det g - exp(int trace a)|", gt.liouville, 1e-6));
  if (curve.max_trace(r.t_span.first, r.t_span.second) == 0.0) {
    double det = 0;
    for (const auto& g : gt.g) det = std::max(det, std::abs(g.determinant() - 1.0));
    rep.add(check_le("|det g - 1| on an sl(2) curve", det, 1e-6));
  }
  rep.summary["group_steps"] = gt.flat.segments.size();

  const auto res = act_solve(curve, action, spec.x0, r.t_span, opts);
  rep.summary["pole_crossings"] = res.pole_crossings;
  rep.tables.push_back(trajectory_table("orbit", res.trajectory,
                                        action.kind() == GroupAction::Kind::Mobius
                                            ? std::vector<std::string>{"x"}
                                            : std::vector<std::string>{}));
  if (action.kind() == GroupAction::Kind::Linear) {
    auto& cols = rep.tables.back().columns;
    for (std::size_t i = 0; i < curve.dimension(); ++i) cols.push_back("x" + std::to_string(i + 1));
  }

  // The same curve as a Lie system on N, integrated directly.
  double agreement = 0;
  std::size_t compared = 0;
  if (action.kind() == GroupAction::Kind::Linear) {
    Rhs rhs = [&curve](double t, std::span<const double> x, std::span<double> dx) {
      const Eigen::MatrixXd a = curve(t);
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        dx[i] = 0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) dx[i] += a(i, j) * x[j];
      }
    };
    const auto direct = integrate(rhs, spec.x0, r.t_span, opts);
    for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
      if (res.trajectory.t[i] > direct.end_time()) break;
      const auto d = direct.at(res.trajectory.t[i]);
      for (std::size_t j = 0; j < d.size(); ++j)
        agreement = std::max(agreement, std::abs(res.trajectory.x[i][j] - d[j]) / std::max(1.0, std::abs(d[j])));
      ++compared;
    }
  } else if (!spec.matrix) {
    const Chart c({"x"});
    LieSystem ric({VectorField::parse(c, {"1"}), VectorField::parse(c, {"x"}), VectorField::parse(c, {"x^2"})},
                  {CoefficientCurve::parse(p.coefficients[0]), CoefficientCurve::parse(p.coefficients[1]),
                   CoefficientCurve::parse(p.coefficients[2])});
    const auto direct = integrate(ric, spec.x0, r.t_span, opts);
    double stop = direct.end_time();
    if (!res.pole_crossings.empty()) stop = std::min(stop, res.pole_crossings.front() - 0.05);
    for (std::size_t i = 0; i < res.trajectory.size(); ++i) {
      if (res.trajectory.t[i] > stop) break;
      const double d = direct.at(res.trajectory.t[i])[0];
      agreement = std::max(agreement, std::abs(res.trajectory.x[i][0] - d) / std::max(1.0, std::abs(d)));
      ++compared;
    }
  }
  if (compared > 0)
    rep.add(check_le("orbit vs direct integration on N", agreement, 1e-5,
                     std::to_string(compared) + " grid points before any pole"));

  if (action.kind() == GroupAction::Kind::Mobius || spec.equivariance) {
    const double mismatch = sl2_generator_mismatch(16, derive_seed(r.seed, 0x512));
    rep.add(check_le("Mobius generators equal the Riccati fields 1, x, x^2", mismatch, 1e-6,
                     "sign convention of the induced fields"));
  }
  if (spec.equivariance) {
    if (p.coefficients.size() != 3) throw SchemaError("$.coefficients", "equivariance needs b1, b2, b3");
    const auto eq = check_equivariance(CoefficientCurve::parse(p.coefficients[0]),
                                       CoefficientCurve::parse(p.coefficients[1]),
                                       CoefficientCurve::parse(p.coefficients[2]), *spec.equivariance, r.t_span,
                                       0.05, opts);
    rep.add(check_le("x1/x2 vs Riccati solution", eq.max_deviation, 1e-6,
                     std::to_string(eq.compared) + " points compared, " + std::to_string(eq.excluded) + " near a pole"));
    rep.summary["equivariance_deviation"] = eq.max_deviation;
  }
  return rep;
}

Report cmd_pde_check(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("pde check", p, r);
  if (!p.pde) throw SchemaError("$.pde", "the problem has no pde section");
  const auto sys = problem_pde(*p.pde);
  const auto report = curvature(sys, 32, derive_seed(r.seed, 0xc0f));
  ojson entries = ojson::array();
  std::string nonzero;
  for (const auto& e : report.entries) {
    entries.push_back({{"a", e.a}, {"b", e.b}, {"component", e.component}, {"residual", e.residual.canonical_str()},
                       {"verdict", to_string(e.test.verdict)}, {"exact", e.test.exact}});
    if (nonzero.empty() && e.test.verdict != ZeroVerdict::Zero)
      nonzero = "residual (" + sys.parameters().names()[e.a] + "," + sys.parameters().names()[e.b] + ") = " +
                e.residual.canonical_str();
  }
  rep.data["curvature"] = entries;
  const bool expect_flat = p.pde ? p.expect.flat.value_or(true) : true;
  if (expect_flat) rep.add(check_true("zero curvature", report.flat, nonzero));
  else rep.add(check_true("nonzero curvature detected", !report.probably_flat, nonzero));
  rep.summary["flat"] = report.flat;
  if (!nonzero.empty()) rep.summary["curvature"] = nonzero;

  if (sys.decomposition()) {
    const auto bc = bracket_combination(sys);
    rep.add(check_true("basis closes on a Lie algebra", bc.closed));
    if (bc.closed) {
      rep.add(check_true("bracket-combination condition agrees with the curvature", bc.zero == report.flat));
      ojson rows = ojson::array();
      for (const auto& row : bc.residuals) {
        ojson jr = ojson::array();
        for (const auto& e : row) jr.push_back(e.canonical_str());
        rows.push_back(jr);
      }
      rep.data["bracket_combination"] = rows;
    }
  }
  if (!p.pde->target.empty()) {
    AuditOptions opts;
    opts.seed = derive_seed(r.seed, 0xa0d);
    opts.integrate.tol = r.tol;
    const auto audit = path_independence_audit(sys, p.pde->x0, p.pde->base, p.pde->target, opts);
    rep.summary["path_spread"] = audit.spread;
    rep.data["endpoints"] = audit.endpoints;
    if (expect_flat) rep.add(check_le("path-independence spread", audit.spread, 1e-5, std::to_string(audit.endpoints.size()) + " staircases"));
    else rep.add(check_gt("path dependence", audit.spread, 1e-3, std::to_string(audit.endpoints.size()) + " staircases"));
  }
  return rep;
}

Report cmd_pde_solve(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("pde solve", p, r);
  if (!p.pde) throw SchemaError("$.pde", "the problem has no pde section");
  const auto& spec = *p.pde;
  const auto sys = problem_pde(spec);
  const auto opts = integrate_options(r);
  if (!spec.target.empty()) {
    std::vector<std::size_t> order(sys.s());
    for (std::size_t a = 0; a < order.size(); ++a) order[a] = a;
    const auto sol = path_solve(sys, spec.x0, spec.base, axis_staircase(spec.base, spec.target, order), opts);
    rep.add(check_true("path solve reached the target", true));
    rep.summary["target"] = spec.target;
    rep.summary["endpoint"] = sol.endpoint;
  }
  if (!spec.axes.empty()) {
    auto axes = pde_axes(spec);
    for (std::size_t a = 0; a < axes.size(); ++a)
      if (axes[a].front() != spec.base[a]) throw SchemaError("$.pde.axes", "grids start at the base point");
    const auto grid = solve_on_grid(sys, spec.x0, axes, opts);
    rep.add(check_true("grid solve completed", grid.size() > 0));
    rep.summary["grid_points"] = grid.size();
    Table t{"grid", spec.parameters, {}};
    t.columns.insert(t.columns.end(), spec.chart.begin(), spec.chart.end());
    for (std::size_t f = 0; f < grid.size(); ++f) {
      auto row = grid.point(f);
      row.insert(row.end(), grid.values[f].begin(), grid.values[f].end());
      t.rows.push_back(std::move(row));
    }
    rep.tables.push_back(std::move(t));
  }
  if (rep.checks.empty()) throw SchemaError("$.pde", "pde solve needs a target or axes");
  return rep;
}

Report cmd_pde_superpose(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("pde superpose", p, r);
  if (!p.pde) throw SchemaError("$.pde", "the problem has no pde section");
  const auto& spec = *p.pde;
  if (spec.axes.empty()) throw SchemaError("$.pde.axes", "pde superpose needs a grid");
  const auto& rs = primary_rule(p);
  const auto sys = problem_pde(spec);
  const SuperpositionRule rule(sys.chart(), rs.m, rs.psi, rs.phi, rs.constraints);
  if (spec.particular.size() < static_cast<std::size_t>(rs.m))
    throw SchemaError("$.pde.particular", "needs " + std::to_string(rs.m) + " start values");
  const auto axes = pde_axes(spec);
  for (std::size_t a = 0; a < axes.size(); ++a)
    if (axes[a].front() != spec.base[a]) throw SchemaError("$.pde.axes", "grids start at the base point");
  const auto opts = integrate_options(r);

  std::vector<PdeGrid> particular(rs.m);
  parallel_for(particular.size(), [&](std::size_t i) { particular[i] = solve_on_grid(sys, spec.particular[i], axes, opts); });
  std::vector<std::vector<double>> starts(spec.particular.begin(), spec.particular.begin() + rs.m);
  const auto k = s.k ? *s.k : constants_from_initial(rule, spec.x0, starts);
  const auto res = pde_superpose(sys, rule, particular, k, spec.x0);
  const auto direct = solve_on_grid(sys, spec.x0, axes, opts);
  double err = 0;
  for (std::size_t f = 0; f < direct.size(); ++f)
    for (std::size_t i = 0; i < sys.n(); ++i)
      err = std::max(err, std::abs(res.solution.values[f][i] - direct.values[f][i]));
  rep.add(check_le("superposed vs directly solved grid", err, 1e-5, std::to_string(direct.size()) + " grid points"));
  rep.summary["k"] = k;
  rep.summary["newton_iterations"] = res.newton_iterations;
  Table t{"superposed", spec.parameters, {}};
  t.columns.insert(t.columns.end(), spec.chart.begin(), spec.chart.end());
  for (std::size_t f = 0; f < res.solution.size(); ++f) {
    auto row = res.solution.point(f);
    row.insert(row.end(), res.solution.values[f].begin(), res.solution.values[f].end());
    t.rows.push_back(std::move(row));
  }
  rep.tables.push_back(std::move(t));
  return rep;
}

Report cmd_prolongation(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("prolongation", p, r);
  if (!p.prolongation) throw SchemaError("$.prolongation", "the problem has no prolongation section");
  const auto fields = problem_fields(p);
  const ProductChart product(problem_chart(p), p.prolongation->copies);
  std::vector<VectorField> prolonged;
  for (const auto& f : fields) prolonged.push_back(diagonal_prolongation(f, product));
  VectorField z = VectorField::zero(product.chart());
  for (const auto& [coeff, index] : p.prolongation->terms) {
    if (index >= fields.size()) throw SchemaError("$.prolongation.terms", "field index out of range");
    z = z + parse(coeff, product.chart()) * prolonged[index];
  }
  rep.summary["combination"] = z.str();
  const auto check = is_diagonal_prolongation(z, product);
  rep.add(check_true("is a diagonal prolongation", check.is_prolongation, check.witness));
  if (check.base) {
    rep.summary["base"] = check.base->str();
    if (p.expect.base)
      rep.add(check_true("base field", canonically_equal(*check.base, VectorField::parse(problem_chart(p), *p.expect.base)),
                         check.base->str()));
  }
  const auto span = span_coefficients(z, prolonged);
  const bool expect_in_span = p.expect.in_span.value_or(true);
  rep.add(check_true(expect_in_span ? "in the constant span of the prolonged basis"
                                    : "outside the constant span of the prolonged basis",
                     span.in_span == expect_in_span, span.in_span ? "" : "residual " + span.residual.str()));
  rep.summary["in_span"] = span.in_span;
  return rep;
}

Report run_task(const std::string& task, const Problem& p, const Settings& s) {
  if (task == "closure") return cmd_closure(p, s);
  if (task == "m") return cmd_m(p, s);
  if (task == "solve") return cmd_solve(p, s);
  if (task == "verify") return cmd_verify(p, s);
  if (task == "superpose") return cmd_superpose(p, s);
  if (task == "group") return cmd_group(p, s);
  if (task == "pde_check") return cmd_pde_check(p, s);
  if (task == "pde_solve") return cmd_pde_solve(p, s);
  if (task == "pde_superpose") return cmd_pde_superpose(p, s);
  if (task == "prolongation") return cmd_prolongation(p, s);
  throw SchemaError("task", "unknown task '" + task + "'");
}

Report run_problem(const Problem& p, const Settings& s) {
  const auto r = resolve(p, s);
  Report rep = start("run", p, r);
  if (p.tasks.empty()) throw SchemaError("$.tasks", "the problem lists no tasks");
  for (const auto& task : p.tasks) {
    Report sub;
    const double ms = timed_ms([&] {
      try {
        sub = run_task(task, p, s);
      } catch (const std::exception& e) {
        sub.command = task;
        sub.error = e.what();
      }
    });
    sub.summary["runtime_ms"] = ms;
    rep.merge(sub, task);
  }
  return rep;
}

}  // namespace liesys
