// sparsedae: command-line front end.
//
// Exit codes: 0 success, 1 configuration or input error, 2 the integration
// stopped early (too many steps or step-size underflow). Data goes to files,
// or to stdout with --stdout; diagnostics go to stderr.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "sparsedae/errors.hpp"
#include "sparsedae/io.hpp"
#include "sparsedae/problems.hpp"
#include "sparsedae/sparse_matrix.hpp"
#include "sparsedae/stepper.hpp"
#include "sparsedae/studies.hpp"

namespace {

using namespace sparsedae;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIncomplete = 2;

struct Settings {
  std::string problem;
  std::string method = "imptrap";
  std::optional<double> tf;
  double atol = 1e-6;
  std::optional<double> hinit;
  std::optional<double> hmax;
  std::size_t ntot = 1000;
  int iter = 5;
  std::optional<double> ctol;
  std::string norm = "max";
  std::string denominator = "literal";
  bool no_extrapolate = false;
  std::optional<double> fixed_h;

  std::string output;
  bool to_stdout = false;
  std::vector<std::string> observables;

  ProblemConfig grid;
  std::vector<std::size_t> sizes{4, 8, 16, 32, 64};
  std::vector<double> steps{1.0 / 80, 1.0 / 160, 1.0 / 320};
  std::vector<std::string> methods;
  unsigned threads = 0;
  bool values = false;
};

SolverOptions solver_options(const Settings& s) {
  SolverOptions opt;
  opt.method = parse_method(s.method);
  opt.tf = *s.tf;
  opt.atol = s.atol;
  opt.hinit = s.hinit.value_or(std::min(1e-6, opt.tf * opt.atol));
  opt.hmax = s.hmax.value_or(opt.tf / 20.0);
  opt.ntot = s.ntot;
  opt.iter = s.iter;
  if (s.ctol) opt.ctol = *s.ctol;
  opt.reduction = s.norm == "rms" ? NormReduction::Rms : NormReduction::Max;
  opt.denominator = s.denominator == "standard" ? ErrorDenominator::Standard : ErrorDenominator::Literal;
  opt.extrapolate = !s.no_extrapolate;
  opt.fixed_h = s.fixed_h;
  opt.validate();
  return opt;
}

Problem load(const Settings& s) {
  const auto ids = builtin_problem_ids();
  if (std::find(ids.begin(), ids.end(), s.problem) != ids.end() || s.problem == "decay")
    return make_problem(s.problem, s.grid);
  if (std::filesystem::exists(s.problem)) return load_problem(s.problem);
  throw InvalidOptions("'" + s.problem + "' is neither a built-in problem nor a readable file");
}

// Writes `text` to -o, to stdout with --stdout, or else to `fallback`.
void emit(const Settings& s, const std::string& text, const std::string& fallback) {
  if (s.to_stdout) {
    std::cout << text;
    return;
  }
  const std::string path = s.output.empty() ? fallback : s.output;
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  std::cerr << "wrote " << path << '\n';
}

int run_solve(const Settings& s) {
  const Problem problem = load(s);
  const SolverOptions opt = solver_options(s);
  const Trajectory traj = integrate(problem.system, opt);

  ProbeValues probes;
  for (const auto& name : s.observables) probes.emplace_back(name, probe(problem, traj.final_state(), name));
  std::ostringstream csv;
  write_trajectory_csv(csv, traj, probes);
  emit(s, csv.str(), problem.id + ".csv");

  std::cerr << problem.id << " " << traits(opt.method).name << ": " << traj.message << "\n  accepted=" << traj.accepted
            << " rejected=" << traj.rejected << " jac_updates=" << traj.jacobian_updates << " lu=" << traj.lu_count
            << " t_final=" << traj.final_time() << '\n';
  return traj.ok() ? kExitOk : kExitIncomplete;
}

int run_converge(const Settings& s) {
  const SolverOptions opt = solver_options(s);
  const unsigned threads = s.threads ? s.threads : std::max(1u, std::thread::hardware_concurrency());
  const ConvergenceTable table = convergence_study(s.problem, s.grid, s.sizes, opt, s.observables, threads);

  std::cerr << table.to_markdown() << "monotone=" << (table.monotone() ? "true" : "false") << '\n';
  emit(s, table.to_csv(), s.problem + "_converge.csv");
  const bool complete =
      std::all_of(table.rows.begin(), table.rows.end(), [](const auto& r) { return r.status == Status::Success; });
  return complete ? kExitOk : kExitIncomplete;
}

int run_orders(const Settings& s) {
  const Problem problem = load(s);
  SolverOptions opt = solver_options(s);
  std::vector<std::string> methods = s.methods;
  if (methods.empty()) methods = {"eb", "cn", "imptrap", "rad"};

  char buf[160];
  std::ostringstream csv;
  csv << "method,h,raw_error,extrapolated_error\n";
  std::cerr << "| method | raw slope | extrapolated slope | expected |\n|---|---|---|---|\n";
  for (const auto& name : methods) {
    const Method m = parse_method(name);
    const OrderStudy study = order_study(problem, m, s.steps, opt);
    for (std::size_t i = 0; i < study.h.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g\n", name.c_str(), study.h[i], study.raw_error[i],
                    study.extrapolated_error[i]);
      csv << buf;
    }
    for (const auto& [label, slope] : {std::pair{"raw_slope", study.raw_slope},
                                       std::pair{"extrapolated_slope", study.extrapolated_slope}}) {
      std::snprintf(buf, sizeof buf, "# %s %s=%.4f\n", name.c_str(), label, slope);
      csv << buf;
    }
    std::snprintf(buf, sizeof buf, "| %s | %.3f | %.3f | %d / %d |\n", name.c_str(), study.raw_slope,
                  study.extrapolated_slope, traits(m).order, traits(m).extrapolated_order);
    std::cerr << buf;
  }
  emit(s, csv.str(), problem.id + "_orders.csv");
  return kExitOk;
}

int run_pattern(const Settings& s) {
  const Problem problem = load(s);
  const Method method = parse_method(s.method);
  const Integrator integrator(std::make_shared<const DaeSystem>(problem.system), method);
  const double h = s.hinit.value_or(1e-3);
  const SparseMatrix jac =
      s.values ? integrator.jacobian_at(problem.system.initial(), h) : integrator.pattern().to_matrix();

  std::ostringstream mm;
  write_matrix_market(mm, jac, !s.values);
  emit(s, mm.str(), problem.id + "_" + s.method + ".mtx");
  std::cerr << problem.id << " " << s.method << ": n=" << jac.n() << " nnz=" << jac.nnz() << '\n';
  return kExitOk;
}

void add_solver_flags(CLI::App& app, Settings& s) {
  app.add_option("--method", s.method, "eb, cn, imptrap or rad")
      ->check(CLI::IsMember({"eb", "cn", "imptrap", "rad"}))
      ->capture_default_str();
  app.add_option("--tf", s.tf, "final time");
  app.add_option("--atol", s.atol, "absolute tolerance (rtol = 10 atol)")->capture_default_str();
  app.add_option("--hinit", s.hinit, "initial step [min(1e-6, tf*atol)]");
  app.add_option("--hmax", s.hmax, "largest step [tf/20]");
  app.add_option("--ntot", s.ntot, "maximum number of accepted steps")->capture_default_str();
  app.add_option("--iter", s.iter, "Newton iterations per solve")->capture_default_str();
  app.add_option("--ctol", s.ctol, "Newton correction tolerance [atol/100]");
  app.add_option("--norm", s.norm, "max or rms")->check(CLI::IsMember({"max", "rms"}))->capture_default_str();
  app.add_option("--denominator", s.denominator, "error scaling: literal or standard")
      ->check(CLI::IsMember({"literal", "standard"}))
      ->capture_default_str();
  app.add_flag("--no-extrapolate", s.no_extrapolate, "continue from the two half steps");
  app.add_option("--fixed-h", s.fixed_h, "take fixed steps of this size");
}

void add_problem_flags(CLI::App& app, Settings& s) {
  app.add_option("-N,--N", s.grid.N, "grid cells in x");
  app.add_option("-M,--M", s.grid.M, "grid cells in y");
  app.add_option("--mu", s.grid.mu, "ex2 parameter")->capture_default_str();
  app.add_option("--phi", s.grid.phi, "ex5 parameter")->capture_default_str();
  app.add_option("--lambda", s.grid.lambda, "decay rate of the linear test")->capture_default_str();
  app.add_option("--Dx", s.grid.ex6.Dx, "ex6 parameter")->capture_default_str();
  app.add_option("--Dy", s.grid.ex6.Dy, "ex6 parameter")->capture_default_str();
  app.add_option("--Da", s.grid.ex6.Da, "ex6 parameter")->capture_default_str();
  app.add_option("--delta", s.grid.ex6.delta, "ex6 parameter")->capture_default_str();
}

void add_output_flags(CLI::App& app, Settings& s) {
  app.add_option("-o,--output", s.output, "output file");
  app.add_flag("--stdout", s.to_stdout, "write data to stdout instead of a file");
}

}  // namespace

int main(int argc, char** argv) {
  Settings s;
  CLI::App app{"Sparse index-1 DAE and stiff ODE solver"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value file; command-line flags take precedence");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  add_solver_flags(app, s);
  add_problem_flags(app, s);
  add_output_flags(app, s);
  app.add_option("--observable", s.observables, "observable or variable to probe; repeatable")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

  const std::string problem_help = "ex1..ex6, decay, or a problem file";
  auto* solve = app.add_subcommand("solve", "integrate a problem and write its trajectory as CSV")->fallthrough();
  solve->add_option("problem", s.problem, problem_help)->required();

  auto* converge = app.add_subcommand("converge", "grid-refinement study on ex4, ex5 or ex6")->fallthrough();
  converge->add_option("problem", s.problem, "ex4, ex5 or ex6")->required();
  converge->add_option("--sizes", s.sizes, "grid sizes N")->delimiter(',')->capture_default_str();
  converge->add_option("--threads", s.threads, "worker threads [all cores]");

  auto* orders = app.add_subcommand("orders", "fixed-step order study against a closed-form solution")->fallthrough();
  orders->add_option("problem", s.problem, "ex1 or decay")->required();
  orders->add_option("--steps", s.steps, "step sizes")->delimiter(',');
  orders->add_option("--methods", s.methods, "methods to study [all]")->delimiter(',');

  auto* pattern = app.add_subcommand("pattern", "write the Newton matrix as Matrix Market")->fallthrough();
  pattern->add_option("problem", s.problem, problem_help)->required();
  pattern->add_flag("--values", s.values, "numeric Jacobian at the initial state with h = hinit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const bool needs_tf = !pattern->parsed();
  if (needs_tf && !s.tf) {
    std::cerr << "error: --tf is required\n\n" << app.help();
    return kExitConfig;
  }
  if (!s.tf) s.tf = 1.0;

  try {
    if (solve->parsed()) return run_solve(s);
    if (converge->parsed()) return run_converge(s);
    if (orders->parsed()) return run_orders(s);
    return run_pattern(s);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
