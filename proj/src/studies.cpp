#include "sparsedae/studies.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>

#include "sparsedae/errors.hpp"

namespace sparsedae {

namespace {

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[40];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

bool ConvergenceTable::monotone() const {
  for (std::size_t k = 0; k < observables.size(); ++k) {
    bool up = true, down = true;
    for (std::size_t r = 1; r < rows.size(); ++r) {
      const double d = rows[r].probes[k] - rows[r - 1].probes[k];
      if (d < 0.0) up = false;
      if (d > 0.0) down = false;
    }
    if (!up && !down) return false;
  }
  return true;
}

std::string ConvergenceTable::to_markdown() const {
  std::ostringstream out;
  out << "| N | M | unknowns |";
  for (const auto& o : observables) out << ' ' << o << " |";
  out << " accepted | rejected | status |\n|---|---|---|";
  for (std::size_t k = 0; k < observables.size(); ++k) out << "---|";
  out << "---|---|---|\n";
  for (const auto& r : rows) {
    out << "| " << r.N << " | " << r.M << " | " << r.unknowns << " |";
    for (double v : r.probes) out << ' ' << fmt(v, "%.10g") << " |";
    out << ' ' << r.accepted << " | " << r.rejected << " | " << to_string(r.status) << " |\n";
  }
  return out.str();
}

std::string ConvergenceTable::to_csv() const {
  std::ostringstream out;
  out << "N,M,unknowns";
  for (const auto& o : observables) out << ',' << o;
  out << ",accepted,rejected,status,seconds\n";
  for (const auto& r : rows) {
    out << r.N << ',' << r.M << ',' << r.unknowns;
    for (double v : r.probes) out << ',' << fmt(v);
    out << ',' << r.accepted << ',' << r.rejected << ',' << to_string(r.status) << ',' << fmt(r.seconds, "%.3f")
        << '\n';
  }
  out << "# monotone=" << (monotone() ? "true" : "false") << '\n';
  return out.str();
}

ConvergenceTable convergence_study(const std::string& problem_id, const ProblemConfig& cfg,
                                   const std::vector<std::size_t>& sizes, const SolverOptions& opt,
                                   std::vector<std::string> observables, unsigned threads) {
  if (problem_id != "ex4" && problem_id != "ex5" && problem_id != "ex6")
    throw InvalidOptions("convergence studies need a grid problem (ex4, ex5 or ex6)");
  if (sizes.empty()) throw InvalidOptions("no grid sizes given");
  opt.validate();

  ConvergenceTable table;
  table.problem = problem_id;
  if (observables.empty()) {
    ProblemConfig small = cfg;
    small.N = problem_id == "ex4" ? 4 : 2;
    small.M = problem_id == "ex6" ? 4 : 2;
    observables = observable_names(make_problem(problem_id, small));
  }
  table.observables = observables;
  table.rows.resize(sizes.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t k = next++; k < sizes.size() && !failed; k = next++) {
      try {
        ProblemConfig c = cfg;
        c.N = sizes[k];
        const Problem problem = make_problem(problem_id, c);
        const auto start = std::chrono::steady_clock::now();
        const Trajectory traj = integrate(problem.system, opt);
        ConvergenceRow& row = table.rows[k];
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        row.N = problem.grid ? problem.grid->N : sizes[k];
        row.M = problem.grid ? problem.grid->M : 0;
        row.unknowns = problem.system.size();
        for (const auto& name : observables) row.probes.push_back(probe(problem, traj.final_state(), name));
        row.accepted = traj.accepted;
        row.rejected = traj.rejected;
        row.jacobian_updates = traj.jacobian_updates;
        row.lu_count = traj.lu_count;
        row.status = traj.status;
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };

  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(sizes.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

double fitted_slope(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2) throw InvalidOptions("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

OrderStudy order_study(const Problem& problem, Method method, const std::vector<double>& h, SolverOptions opt) {
  if (!problem.exact) throw InvalidOptions("problem '" + problem.id + "' has no closed-form solution");
  OrderStudy study;
  study.method = method;
  study.h = h;
  opt.method = method;
  const Integrator integrator(std::make_shared<const DaeSystem>(problem.system), method);
  const ValueVector exact = problem.exact(opt.tf);

  auto distance = [&](const ValueVector& state) {
    double e = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) e = std::max(e, std::abs(state[i] - exact[i]));
    return e;
  };
  for (double step : h) {
    opt.fixed_h = step;
    opt.hinit = std::min(opt.hinit, step);
    opt.hmax = std::max(opt.hmax, step);
    opt.extrapolate = false;
    study.raw_error.push_back(distance(integrator.integrate_fixed(opt).final_state()));
    opt.extrapolate = true;
    study.extrapolated_error.push_back(distance(integrator.integrate_fixed(opt).final_state()));
  }
  study.raw_slope = fitted_slope(h, study.raw_error);
  study.extrapolated_slope = fitted_slope(h, study.extrapolated_error);
  return study;
}

}  // namespace sparsedae
