#include "liesys/algebra.hpp"

#include "liesys/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace liesys {

namespace {

Polynomial lcm(const Polynomial& a, const Polynomial& b) {
  if (a.is_constant()) return b;
  if (b.is_constant()) return a;
  return a * *divide_exact(b, gcd(a, b));
}

// Reduced row echelon form in place; returns pivot column per row (or -1).
std::vector<int> row_reduce(std::vector<std::vector<Rational>>& m, std::size_t cols) {
  std::vector<int> pivots(m.size(), -1);
  std::size_t row = 0;
  for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
    std::size_t p = row;
    while (p < m.size() && m[p][col] == 0) ++p;
    if (p == m.size()) continue;
    std::swap(m[p], m[row]);
    Rational inv = 1 / m[row][col];
    for (auto& v : m[row]) v *= inv;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i == row || m[i][col] == 0) continue;
      Rational f = m[i][col];
      for (std::size_t j = col; j < m[i].size(); ++j) m[i][j] -= f * m[row][j];
    }
    pivots[row] = static_cast<int>(col);
    ++row;
  }
  return pivots;
}

VectorField combination(const Chart& chart, std::span<const VectorField> basis, const std::vector<Rational>& c) {
  std::vector<RationalFunction> acc(chart.dimension());
  for (std::size_t a = 0; a < basis.size(); ++a) {
    if (c[a] == 0) continue;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = acc[i] + RationalFunction(c[a]) * basis[a][i].canonical();
  }
  std::vector<Expr> comps;
  for (auto& rf : acc) comps.push_back(Expr::from_canonical(rf));
  return VectorField(chart, std::move(comps));
}

// Scales so that the leading numerator coefficient of the first nonzero
// component is 1, e.g. 2x d/dx -> x d/dx.
VectorField normalized(const VectorField& x) {
  for (const auto& c : x.components()) {
    if (c.is_canonically_zero()) continue;
    Rational lead = c.canonical().numerator().leading_term().second;
    return Expr(Rational(1 / lead)) * x;
  }
  return x;
}

}  // namespace

SpanResult span_coefficients(const VectorField& target, std::span<const VectorField> basis) {
  for (const auto& b : basis)
    if (!(b.chart() == target.chart())) throw std::invalid_argument("span_coefficients: chart mismatch");
  const std::size_t r = basis.size();
  std::vector<std::vector<Rational>> rows;
  for (std::size_t i = 0; i < target.dimension(); ++i) {
    Polynomial d = target[i].canonical().denominator();
    for (const auto& b : basis) d = lcm(d, b[i].canonical().denominator());
    auto lift = [&](const RationalFunction& f) { return f.numerator() * *divide_exact(d, f.denominator()); };
    std::map<Monomial, std::vector<Rational>, Monomial::GradedLexLess> eqs;
    auto add = [&](const Polynomial& p, std::size_t col) {
      for (const auto& [mono, coef] : p.terms()) {
        auto& row = eqs[mono];
        if (row.empty()) row.assign(r + 1, Rational(0));
        row[col] += coef;
      }
    };
    for (std::size_t a = 0; a < r; ++a) add(lift(basis[a][i].canonical()), a);
    add(lift(target[i].canonical()), r);
    for (auto& [mono, row] : eqs) rows.push_back(std::move(row));
  }

  auto pivots = row_reduce(rows, r);
  SpanResult out;
  out.coefficients.assign(r, Rational(0));
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (pivots[i] >= 0) out.coefficients[pivots[i]] = rows[i][r];
  out.residual = target - combination(target.chart(), basis, out.coefficients);
  out.in_span = out.residual.is_zero();
  return out;
}

std::vector<std::size_t> independent_subset(std::span<const VectorField> fields) {
  std::vector<std::size_t> keep;
  std::vector<VectorField> kept;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (fields[i].is_zero()) continue;
    if (!kept.empty() && span_coefficients(fields[i], kept).in_span) continue;
    keep.push_back(i);
    kept.push_back(fields[i]);
  }
  return keep;
}

Rational jacobi_residual(const StructureConstants& c) {
  const std::size_t r = c.size();
  Rational worst = 0;
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b)
      for (std::size_t g = 0; g < r; ++g)
        for (std::size_t v = 0; v < r; ++v) {
          Rational s = 0;
          for (std::size_t mu = 0; mu < r; ++mu)
            s += c[a][b][mu] * c[mu][g][v] + c[b][g][mu] * c[mu][a][v] + c[g][a][mu] * c[mu][b][v];
          if (abs(s) > worst) worst = abs(s);
        }
  return worst;
}

LieClosureReport closure_test(std::span<const VectorField> fields, const ClosureOptions& options) {
  if (fields.empty()) throw std::invalid_argument("closure_test needs at least one field");
  LieClosureReport report;
  auto keep = independent_subset(fields);
  for (std::size_t i = 0, k = 0; i < fields.size(); ++i) {
    if (k < keep.size() && keep[k] == i) {
      report.basis.push_back(fields[i]);
      ++k;
    } else {
      report.dropped.push_back(i);
    }
  }
  report.dimension_trace.push_back(report.basis.size());

  while (true) {
    const std::size_t r = report.basis.size();
    StructureConstants c(r, std::vector<std::vector<Rational>>(r, std::vector<Rational>(r, Rational(0))));
    std::vector<VectorField> extension = report.basis;
    bool all_in = true;
    for (std::size_t a = 0; a < r; ++a)
      for (std::size_t b = a + 1; b < r; ++b) {
        auto br = lie_bracket(report.basis[a], report.basis[b]);
        auto s = span_coefficients(br, report.basis);
        if (s.in_span) {
          for (std::size_t g = 0; g < r; ++g) {
            c[a][b][g] = s.coefficients[g];
            c[b][a][g] = -s.coefficients[g];
          }
          continue;
        }
        all_in = false;
        if (!report.witness) report.witness = BracketWitness{a, b, br, s.residual};
        if (options.complete && !span_coefficients(br, extension).in_span) extension.push_back(normalized(br));
      }
    if (all_in) {
      report.closed = true;
      report.witness.reset();
      report.constants = std::move(c);
      report.jacobi_residual = jacobi_residual(report.constants);
      return report;
    }
    if (!options.complete) return report;
    if (extension.size() > options.dimension_cap) {
      report.cap_exceeded = true;
      return report;
    }
    report.basis = std::move(extension);
    report.dimension_trace.push_back(report.basis.size());
    report.witness.reset();
  }
}

// ---------------------------------------------------------------------------
// Numerical rank

CompiledFields::CompiledFields(std::span<const VectorField> fields) {
  if (fields.empty()) return;
  n_ = fields[0].dimension();
  const auto& vars = fields[0].chart().names();
  for (const auto& f : fields) {
    if (!(f.chart() == fields[0].chart())) throw std::invalid_argument("fields on different charts");
    std::vector<CompiledExpr> comps;
    for (const auto& c : f.components()) comps.emplace_back(c, vars);
    fields_.push_back(std::move(comps));
  }
}

std::vector<double> evaluation_matrix(const CompiledFields& fields, std::span<const std::vector<double>> points,
                                      std::size_t& rows, std::size_t& cols) {
  const std::size_t n = fields.dimension();
  rows = points.size() * n;
  cols = fields.count();
  std::vector<double> m(rows * cols);  // column-major
  for (std::size_t a = 0; a < cols; ++a)
    for (std::size_t k = 0; k < points.size(); ++k)
      for (std::size_t i = 0; i < n; ++i) m[a * rows + k * n + i] = fields(a, i, points[k]);
  return m;
}

int numerical_rank(std::span<const double> matrix, std::size_t rows, std::size_t cols, double rel_threshold) {
  for (double v : matrix)
    if (!std::isfinite(v)) return -1;
  if (rows == 0 || cols == 0) return 0;
  Eigen::Map<const Eigen::MatrixXd> a(matrix.data(), static_cast<Eigen::Index>(rows),
                                      static_cast<Eigen::Index>(cols));
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_threshold * s(0)) ++rank;
  return rank;
}

int prolonged_rank(const CompiledFields& fields, std::span<const std::vector<double>> points,
                   double rel_threshold) {
  std::size_t rows = 0, cols = 0;
  auto m = evaluation_matrix(fields, points, rows, cols);
  return numerical_rank(m, rows, cols, rel_threshold);
}

bool coincident_slots(std::span<const std::vector<double>> points, double separation) {
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      double d = 0;
      for (std::size_t i = 0; i < points[a].size(); ++i) d = std::max(d, std::abs(points[a][i] - points[b][i]));
      if (d < separation) return true;
    }
  return false;
}

std::vector<std::vector<double>> sample_tuple(const SamplingOptions& options, std::size_t n, std::size_t k,
                                              std::uint64_t stream) {
  std::mt19937_64 rng(stream);
  const long half = std::lround(options.box * 1024);
  std::uniform_int_distribution<long> lattice(-half, half);
  std::vector<std::vector<double>> tuple(k, std::vector<double>(n));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (auto& p : tuple)
      for (auto& v : p) v = static_cast<double>(lattice(rng)) / 1024.0;
    bool excluded = options.exclude ? options.exclude(tuple) : coincident_slots(tuple);
    if (!excluded) return tuple;
  }
  throw std::runtime_error("sample_tuple: exclusion predicate rejects every draw");
}

FundamentalSizeReport minimal_m(std::span<const VectorField> fields, const SamplingOptions& options) {
  FundamentalSizeReport rep;
  rep.seed = options.seed;
  rep.r = static_cast<int>(fields.size());
  if (fields.empty()) {
    rep.consistent = false;
    rep.message = "no fields";
    return rep;
  }
  rep.n = static_cast<int>(fields[0].dimension());
  if (independent_subset(fields).size() != fields.size()) {
    rep.consistent = false;
    rep.message = "fields are linearly dependent over R; prune them first";
    return rep;
  }
  CompiledFields compiled(fields);
  const std::size_t samples = static_cast<std::size_t>(std::max(1, options.samples));
  for (int k = 1; k <= rep.r; ++k) {
    std::vector<int> ranks(samples);
    parallel_for(samples, [&](std::size_t j) {
      auto tuple = sample_tuple(options, compiled.dimension(), k, derive_seed(options.seed, k, j));
      ranks[j] = prolonged_rank(compiled, tuple, options.rank_threshold);
    });
    rep.samples += static_cast<int>(samples);
    std::map<int, int> histogram;
    int retained = 0, full = 0, nonfinite = 0;
    for (int rk : ranks) {
      if (rk < 0) {
        ++nonfinite;
        continue;
      }
      ++retained;
      ++histogram[rk];
      if (rk == rep.r) ++full;
    }
    rep.discarded += nonfinite;
    int modal = -1, modal_count = 0;
    for (auto [rk, count] : histogram)
      if (count >= modal_count) modal = rk, modal_count = count;
    double fraction = retained ? static_cast<double>(full) / retained : 0.0;
    rep.rank_profile.push_back(modal);
    rep.full_rank_fraction.push_back(fraction);
    if (retained > 0 && fraction >= options.vote) {
      rep.m = k;
      rep.discarded += retained - full;
      return rep;
    }
  }
  rep.consistent = false;
  rep.message = "no copy count up to r reached full rank at generic samples";
  return rep;
}

}  // namespace liesys
