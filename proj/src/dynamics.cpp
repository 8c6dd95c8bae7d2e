#include "liesys/dynamics.hpp"

#include "liesys/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace liesys {

// ---------------------------------------------------------------------------
// Coefficient curves

const Chart& CoefficientCurve::time_chart() {
  static const Chart chart({"t"});
  return chart;
}

CoefficientCurve::CoefficientCurve(const Expr& e) : expr_(e), compiled_(e, {"t"}) {}

CoefficientCurve::CoefficientCurve(double c) : CoefficientCurve(Expr(Rational(c))) {}

CoefficientCurve CoefficientCurve::parse(const std::string& text) {
  return CoefficientCurve(liesys::parse(text, time_chart()));
}

CoefficientCurve CoefficientCurve::tabulated(std::vector<double> times, std::vector<double> values) {
  if (times.size() != values.size() || times.size() < 2)
    throw std::invalid_argument("tabulated curve needs matching time/value lists of length >= 2");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("tabulated times must increase strictly");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("tabulated values must be finite");
  CoefficientCurve c;
  c.expr_.reset();
  c.times_ = std::move(times);
  c.values_ = std::move(values);
  return c;
}

double CoefficientCurve::operator()(double t) const {
  if (expr_) {
    double v = compiled_(std::span<const double>(&t, 1));
    if (!std::isfinite(v)) throw std::domain_error("coefficient is not finite at t = " + std::to_string(t));
    return v;
  }
  const double slack = 1e-12 * std::max(1.0, std::abs(times_.back() - times_.front()));
  if (t < times_.front() - slack || t > times_.back() + slack)
    throw std::domain_error("t = " + std::to_string(t) + " outside the tabulated range");
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - times_.begin()), 1, times_.size() - 1);
  double w = (t - times_[j - 1]) / (times_[j] - times_[j - 1]);
  return (1 - w) * values_[j - 1] + w * values_[j];
}

// ---------------------------------------------------------------------------
// Lie systems

LieSystem::LieSystem(std::vector<VectorField> basis, std::vector<CoefficientCurve> coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)), compiled_(basis_) {
  if (basis_.empty()) throw std::invalid_argument("Lie system needs at least one basis field");
  if (basis_.size() != coefficients_.size())
    throw std::invalid_argument("Lie system has " + std::to_string(basis_.size()) + " fields but " +
                                std::to_string(coefficients_.size()) + " coefficients");
  if (independent_subset(basis_).size() != basis_.size())
    throw std::invalid_argument("Lie system basis is linearly dependent over R");
}

void LieSystem::velocity(double t, std::span<const double> x, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t a = 0; a < basis_.size(); ++a) {
    double b = coefficients_[a](t);
    if (b == 0.0) continue;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b * compiled_(a, i, x);
  }
}

std::vector<double> evaluate_field(const LieSystem& sys, double t, std::span<const double> x) {
  if (x.size() != sys.dimension())
    throw std::invalid_argument("state has dimension " + std::to_string(x.size()) + ", expected " +
                                std::to_string(sys.dimension()));
  std::vector<double> out(x.size());
  sys.velocity(t, x, out);
  for (double v : out)
    if (!std::isfinite(v)) throw std::domain_error("field value is not finite");
  return out;
}

// ---------------------------------------------------------------------------
// Trajectory

double Trajectory::end_time() const {
  // The last step lands exactly on t1, while t0 + h may round below it.
  const double recorded = t.empty() ? 0.0 : t.back();
  if (!segments.empty()) return std::max(segments.back().t0 + segments.back().h, recorded);
  return recorded;
}

namespace {

const Trajectory::Segment& locate(const std::vector<Trajectory::Segment>& segments, double time, double end) {
  if (segments.empty()) throw std::out_of_range("trajectory has no continuous output");
  const double start = segments.front().t0;
  const double slack = 1e-12 * std::max(1.0, std::abs(end - start));
  if (time < start - slack || time > end + slack)
    throw std::out_of_range("t = " + std::to_string(time) + " outside the trajectory");
  auto it = std::upper_bound(segments.begin(), segments.end(), time,
                             [](double v, const Trajectory::Segment& s) { return v < s.t0; });
  return it == segments.begin() ? segments.front() : *(it - 1);
}

}  // namespace

std::vector<double> Trajectory::at(double time) const {
  if (segments.empty() && !t.empty() && time == t.front()) return x.front();
  const Segment& s = locate(segments, time, end_time());
  const std::size_t n = s.r.size() / 5;
  const double th = (time - s.t0) / s.h, th1 = 1 - th;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = &s.r[5 * i];
    y[i] = r[0] + th * (r[1] + th1 * (r[2] + th * (r[3] + th1 * r[4])));
  }
  return y;
}

std::vector<double> Trajectory::derivative_at(double time) const {
  const Segment& s = locate(segments, time, end_time());
  const std::size_t n = s.r.size() / 5;
  const double th = (time - s.t0) / s.h, th1 = 1 - th;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = &s.r[5 * i];
    double p = r[3] + th1 * r[4], dp = -r[4];
    double q = r[2] + th * p, dq = p + th * dp;
    double u = r[1] + th1 * q, du = -q + th1 * dq;
    y[i] = (u + th * du) / s.h;
  }
  return y;
}

Trajectory Trajectory::resampled(std::span<const double> grid) const {
  Trajectory out;
  out.blew_up = blew_up;
  out.step_underflow = step_underflow;
  out.truncation_time = truncation_time;
  out.segments = segments;
  const double end = end_time();
  for (double g : grid) {
    if (g > end) break;
    out.t.push_back(g);
    out.x.push_back(at(g));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

namespace {

constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

}  // namespace

Trajectory integrate(const Rhs& f, std::span<const double> x0, std::pair<double, double> t_span,
                     const IntegrateOptions& options) {
  const auto [t0, t1] = t_span;
  if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 >= t0))
    throw std::invalid_argument("t_span must be finite with t1 >= t0");
  if (!(options.tol > 0)) throw std::invalid_argument("tol must be positive");
  if (!all_finite(x0)) throw std::invalid_argument("initial state is not finite");
  const std::size_t n = x0.size();
  const double tol = options.tol;

  Trajectory traj;
  traj.t.push_back(t0);
  traj.x.emplace_back(x0.begin(), x0.end());
  traj.truncation_time = t1;
  if (t1 == t0) return options.grid.empty() ? traj : traj.resampled(options.grid);

  std::vector<double> y(x0.begin(), x0.end()), ynew(n), ytmp(n), err(n);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
  double t = t0;
  f(t, y, k1);
  if (!all_finite(k1)) throw std::domain_error("field is not finite at the initial state");

  // Initial step: Hairer's hinit, using one explicit Euler probe.
  double h;
  {
    double dnf = 0, dny = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double sk = tol * (1 + std::abs(y[i]));
      dnf += (k1[i] / sk) * (k1[i] / sk);
      dny += (y[i] / sk) * (y[i] / sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, t1 - t0);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * k1[i];
    f(t + h, ytmp, k2);
    double der2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double sk = tol * (1 + std::abs(y[i]));
      der2 += ((k2[i] - k1[i]) / sk) * ((k2[i] - k1[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    double der12 = std::max(std::isfinite(der2) ? der2 : 0.0, std::sqrt(dnf));
    double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100 * h, h1, t1 - t0});
  }

  const double h_min_rel = 1e-13;
  std::size_t steps = 0;
  bool last_rejected = false;
  double err_old = 1e-4;
  while (t < t1) {
    if (++steps > options.max_steps) {
      traj.step_underflow = true;
      traj.truncation_time = t;
      break;
    }
    const double h_min = h_min_rel * std::max(1.0, std::abs(t));
    if (t1 - t <= h_min) h = t1 - t;
    if (h < h_min && t1 - t > h_min) {
      traj.step_underflow = true;
      traj.truncation_time = t;
      break;
    }
    bool final_step = false;
    if (t + h >= t1) {
      h = t1 - t;
      final_step = true;
    } else if (t + 2 * h > t1) {
      h = 0.5 * (t1 - t);  // split the remainder evenly instead of leaving a sliver
    }
    auto stage = [&](auto&& combine, double c, std::vector<double>& k) {
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * combine(i);
      f(t + c * h, ytmp, k);
    };
    stage([&](std::size_t i) { return a21 * k1[i]; }, c2, k2);
    stage([&](std::size_t i) { return a31 * k1[i] + a32 * k2[i]; }, c3, k3);
    stage([&](std::size_t i) { return a41 * k1[i] + a42 * k2[i] + a43 * k3[i]; }, c4, k4);
    stage([&](std::size_t i) { return a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]; }, c5, k5);
    stage([&](std::size_t i) { return a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]; },
          1.0, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + h * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    f(t + h, ynew, k7);

    double e = 0;
    bool finite = all_finite(ynew) && all_finite(k7);
    if (finite) {
      for (std::size_t i = 0; i < n; ++i) {
        double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        double sk = tol * (1 + std::max(std::abs(y[i]), std::abs(ynew[i])));
        e = std::max(e, std::abs(ei) / sk);
      }
      e /= std::min(h, 1.0);
      finite = std::isfinite(e);
    }
    if (!finite) {
      h *= 0.25;
      last_rejected = true;
      continue;
    }
    // PI step control (Gustafsson) on the error per unit step.
    constexpr double beta = 0.04, expo = 0.25 - 0.75 * beta;
    double fac = std::pow(std::max(e, 1e-16), expo) / std::pow(err_old, beta);
    fac = std::clamp(fac / 0.9, 0.2, 10.0);  // h_new = h / fac
    if (e > 1.0) {
      h /= std::max(fac, 1.0);
      last_rejected = true;
      continue;
    }
    if (last_rejected) fac = std::max(fac, 1.0);
    last_rejected = false;
    err_old = std::max(e, 1e-4);

    Trajectory::Segment seg{t, h, std::vector<double>(5 * n)};
    for (std::size_t i = 0; i < n; ++i) {
      double ydiff = ynew[i] - y[i];
      double bspl = h * k1[i] - ydiff;
      double* r = &seg.r[5 * i];
      r[0] = y[i];
      r[1] = ydiff;
      r[2] = bspl;
      r[3] = ydiff - h * k7[i] - bspl;
      r[4] = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
    }
    traj.segments.push_back(std::move(seg));
    t = final_step ? t1 : t + h;
    y.swap(ynew);
    k1.swap(k7);
    traj.t.push_back(t);
    traj.x.push_back(y);

    double norm = 0;
    for (double v : y) norm = std::max(norm, std::abs(v));
    if (norm > options.blowup) {
      traj.blew_up = true;
      traj.truncation_time = t;
      break;
    }
    h /= fac;
  }
  if (!options.grid.empty()) return traj.resampled(options.grid);
  return traj;
}

Trajectory integrate(const LieSystem& sys, std::span<const double> x0, std::pair<double, double> t_span,
                     const IntegrateOptions& options) {
  if (x0.size() != sys.dimension())
    throw std::invalid_argument("initial state has dimension " + std::to_string(x0.size()) + ", expected " +
                                std::to_string(sys.dimension()));
  return integrate([&sys](double t, std::span<const double> x, std::span<double> dx) { sys.velocity(t, x, dx); },
                   x0, t_span, options);
}

// ---------------------------------------------------------------------------
// Fundamental sets

bool is_fundamental_tuple(const LieSystem& sys, std::span<const std::vector<double>> points,
                          double rel_threshold) {
  return prolonged_rank(sys.compiled(), points, rel_threshold) == static_cast<int>(sys.basis().size());
}

std::vector<double> common_grid(std::span<const Trajectory> trajectories) {
  std::vector<double> grid;
  double end = std::numeric_limits<double>::infinity();
  for (const auto& tr : trajectories) {
    grid.insert(grid.end(), tr.t.begin(), tr.t.end());
    end = std::min(end, tr.end_time());
  }
  std::sort(grid.begin(), grid.end());
  std::vector<double> out;
  for (double g : grid) {
    if (g > end) break;
    if (out.empty() || g - out.back() > 1e-13 * std::max(1.0, std::abs(g))) out.push_back(g);
  }
  return out;
}

FundamentalSet fundamental_set(const LieSystem& sys, int m, std::pair<double, double> t_span,
                               std::span<const std::vector<double>> initial,
                               const FundamentalSetOptions& options) {
  if (m < 1) throw std::invalid_argument("fundamental_set needs m >= 1");
  FundamentalSet out;
  if (!initial.empty()) {
    if (initial.size() != static_cast<std::size_t>(m))
      throw std::invalid_argument("expected " + std::to_string(m) + " initial points");
    for (const auto& p : initial)
      if (p.size() != sys.dimension()) throw std::invalid_argument("initial point has the wrong dimension");
    if (!is_fundamental_tuple(sys, initial, options.sampling.rank_threshold))
      throw std::invalid_argument("initial points are not a fundamental tuple (prolonged rank below r)");
    out.initial.assign(initial.begin(), initial.end());
  } else {
    for (int attempt = 0;; ++attempt) {
      if (attempt >= options.max_resamples)
        throw std::runtime_error("no fundamental tuple found in " + std::to_string(options.max_resamples) +
                                 " resamples");
      auto tuple = sample_tuple(options.sampling, sys.dimension(), m, derive_seed(options.sampling.seed, 0xf5, attempt));
      if (is_fundamental_tuple(sys, tuple, options.sampling.rank_threshold)) {
        out.initial = std::move(tuple);
        out.resamples = attempt;
        break;
      }
    }
  }
  std::vector<Trajectory> raw(m);
  IntegrateOptions io = options.integrate;
  io.grid.clear();
  parallel_for(m, [&](std::size_t a) { raw[a] = integrate(sys, out.initial[a], t_span, io); });
  std::vector<double> grid = common_grid(raw);
  if (!options.integrate.grid.empty()) {
    const double end = grid.empty() ? t_span.first : grid.back();
    grid.clear();
    for (double g : options.integrate.grid)
      if (g <= end) grid.push_back(g);
  }
  for (auto& tr : raw) out.solutions.push_back(tr.resampled(grid));
  return out;
}

}  // namespace liesys
