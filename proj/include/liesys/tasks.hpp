#pragma once

// The commands shared by the CLI, the acceptance suite and the Python
// module: each takes a problem and settings and returns a Report.

#include "liesys/problem.hpp"
#include "liesys/report.hpp"

#include <optional>
#include <string>
#include <vector>

namespace liesys {

/// Command-line overrides; unset values fall back to the problem file, then
/// to the defaults below.
struct Settings {
  std::optional<double> tol;        // 1e-9
  std::optional<double> tol_const;  // 1e-6
  std::optional<std::uint64_t> seed;
  std::optional<std::pair<double, double>> t_span;  // [0, 1]
  bool complete = false;
  std::optional<int> samples;  // 32
  std::optional<std::vector<double>> k;
};

inline constexpr std::uint64_t kDefaultSeed = 20070613;

Report cmd_closure(const Problem& p, const Settings& s = {});
Report cmd_m(const Problem& p, const Settings& s = {});
Report cmd_solve(const Problem& p, const Settings& s = {});
Report cmd_verify(const Problem& p, const Settings& s = {});
Report cmd_superpose(const Problem& p, const Settings& s = {});
Report cmd_group(const Problem& p, const Settings& s = {});
Report cmd_pde_check(const Problem& p, const Settings& s = {});
Report cmd_pde_solve(const Problem& p, const Settings& s = {});
Report cmd_pde_superpose(const Problem& p, const Settings& s = {});
Report cmd_prolongation(const Problem& p, const Settings& s = {});

/// Runs one named task ("closure", "m", ..., "pde_check", "prolongation").
Report run_task(const std::string& task, const Problem& p, const Settings& s = {});
/// Runs every task listed in the problem; task errors become failed reports.
Report run_problem(const Problem& p, const Settings& s = {});

/// Integrates each start point over the span concurrently and puts all
/// trajectories on their common grid.
std::vector<Trajectory> integrate_tuple(const LieSystem& sys, std::span<const std::vector<double>> points,
                                        std::pair<double, double> t_span, const IntegrateOptions& options = {});

}  // namespace liesys
