// liesys: command-line front end.
//
//   liesys closure FILE [--complete]
//   liesys m FILE [--samples N]
//   liesys solve|verify|superpose|group FILE
//   liesys pde check|solve|superpose FILE
//   liesys examples list | show NAME | run NAME | run-all
//
// Exit codes: 0 all checks pass, 1 a check fails or a computation errors,
// 2 usage or problem-file errors.

#include "liesys/catalog.hpp"
#include "liesys/expr.hpp"
#include "liesys/problem.hpp"
#include "liesys/tasks.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

struct Options {
  std::optional<double> tol, tol_const;
  std::optional<std::uint64_t> seed;
  std::vector<double> t_span;
  std::vector<double> k;
  std::optional<int> samples;
  bool complete = false;
  std::string json_out;
  std::string csv_dir;
};

liesys::Settings settings_from(const Options& o) {
  liesys::Settings s;
  s.tol = o.tol;
  s.tol_const = o.tol_const;
  s.seed = o.seed;
  if (!o.t_span.empty()) s.t_span = std::pair{o.t_span[0], o.t_span[1]};
  if (!o.k.empty()) s.k = o.k;
  s.samples = o.samples;
  s.complete = o.complete;
  return s;
}

void write_json(const std::string& path, const nlohmann::ordered_json& j) {
  if (path == "-") {
    std::cout << j.dump(2) << "\n";
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

int emit(const liesys::Report& rep, const Options& o) {
  if (o.json_out != "-") std::cout << rep.text();
  if (!o.json_out.empty()) write_json(o.json_out, rep.to_json());
  if (!o.csv_dir.empty()) rep.write_csv(o.csv_dir);
  return rep.pass() ? 0 : 1;
}

// Runs a command on a problem; computation errors become a failed report so
// that --json still records them.
template <class F>
int run(const std::string& command, const liesys::Problem& p, const Options& o, F&& f) {
  liesys::Report rep;
  try {
    rep = f(p, settings_from(o));
  } catch (const liesys::SchemaError&) {
    throw;
  } catch (const liesys::ParseError&) {
    throw;
  } catch (const std::exception& e) {
    rep.command = command;
    rep.problem = p.name;
    rep.error = e.what();
  }
  return emit(rep, o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lie systems: closure, superposition rules, group and PDE solvers"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", liesys::kVersion);

  Options o;
  app.add_option("--tol", o.tol, "integrator tolerance (default 1e-9)")->check(CLI::PositiveNumber);
  app.add_option("--tol-const", o.tol_const, "allowed drift of first integrals (default 1e-6)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "master seed for all sampling");
  app.add_option("--t-span", o.t_span, "time interval a,b")->delimiter(',')->expected(2);
  app.add_option("--k", o.k, "constants of the superposition rule, comma separated")->delimiter(',');
  app.add_option("--samples", o.samples, "random tuples per rank test (default 32)")->check(CLI::PositiveNumber);
  app.add_flag("--complete", o.complete, "close the fields under brackets before testing");
  app.add_option("--json", o.json_out, "write the JSON report to a file ('-' for stdout)");
  app.add_option("--csv", o.csv_dir, "write trajectory tables as CSV files into a directory");

  std::string file;
  using Cmd = liesys::Report (*)(const liesys::Problem&, const liesys::Settings&);
  const std::vector<std::tuple<std::string, std::string, Cmd>> simple{
      {"closure", "test closure under Lie brackets", liesys::cmd_closure},
      {"m", "number of particular solutions a rule needs", liesys::cmd_m},
      {"solve", "integrate the system from x0", liesys::cmd_solve},
      {"verify", "check a rule's tangency and its first integrals", liesys::cmd_verify},
      {"superpose", "reconstruct a solution from particular ones", liesys::cmd_superpose},
      {"group", "solve through the group equation and an action", liesys::cmd_group},
  };
  std::vector<std::pair<CLI::App*, Cmd>> commands;
  for (const auto& [name, help, fn] : simple) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("file", file, "problem file")->required()->check(CLI::ExistingFile);
    commands.emplace_back(sub, fn);
  }
  auto* pde = app.add_subcommand("pde", "PDE Lie systems");
  pde->require_subcommand(1);
  for (const auto& [name, help, fn] :
       std::vector<std::tuple<std::string, std::string, Cmd>>{
           {"check", "zero-curvature test and path-independence audit", liesys::cmd_pde_check},
           {"solve", "solve on a grid and along a path", liesys::cmd_pde_solve},
           {"superpose", "grid solution from particular solutions", liesys::cmd_pde_superpose}}) {
    auto* sub = pde->add_subcommand(name, help);
    sub->add_option("file", file, "problem file")->required()->check(CLI::ExistingFile);
    commands.emplace_back(sub, fn);
  }

  std::string example;
  auto* examples = app.add_subcommand("examples", "the bundled example catalog");
  examples->require_subcommand(1);
  auto* ex_list = examples->add_subcommand("list", "list the examples");
  auto* ex_show = examples->add_subcommand("show", "print an example's problem file");
  ex_show->add_option("name", example)->required();
  auto* ex_run = examples->add_subcommand("run", "run an example's tasks");
  ex_run->add_option("name", example)->required();
  auto* ex_all = examples->add_subcommand("run-all", "run every example concurrently");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [sub, fn] : commands)
      if (sub->parsed()) return run(sub->get_name(), liesys::load_problem(file), o, fn);

    if (ex_list->parsed()) {
      for (const auto& name : liesys::catalog_names())
        std::cout << name << "  " << liesys::catalog_document(name).value("description", "") << "\n";
      return 0;
    }
    if (ex_show->parsed()) {
      std::cout << liesys::catalog_document(example).dump(2) << "\n";
      return 0;
    }
    if (ex_run->parsed()) {
      const auto p = liesys::catalog_problem(example);
      return run("run", p, o, [](const liesys::Problem& q, const liesys::Settings& s) {
        return liesys::run_problem(q, s);
      });
    }
    if (ex_all->parsed()) {
      if (!o.k.empty() || !o.t_span.empty()) {
        std::cerr << "error: --k and --t-span do not apply to run-all\n";
        return 2;
      }
      const auto result = liesys::run_catalog(settings_from(o));
      nlohmann::ordered_json j;
      j["verdict"] = result.pass() ? "PASS" : "FAIL";
      j["version"] = liesys::kVersion;
      j["seed"] = o.seed.value_or(liesys::kDefaultSeed);
      j["runtime_ms"] = result.runtime_ms;
      j["reports"] = nlohmann::ordered_json::array();
      std::size_t passed = 0;
      for (const auto& rep : result.reports) {
        if (o.json_out != "-") std::cout << rep.text();
        j["reports"].push_back(rep.to_json());
        if (!o.csv_dir.empty()) rep.write_csv(o.csv_dir + "/" + rep.problem);
        passed += rep.pass();
      }
      if (o.json_out != "-")
        std::cout << "examples: " << passed << "/" << result.reports.size() << " PASS in "
                  << liesys::format_number(result.runtime_ms / 1000) << " s\n";
      if (!o.json_out.empty()) write_json(o.json_out, j);
      return result.pass() ? 0 : 1;
    }
  } catch (const liesys::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const liesys::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
