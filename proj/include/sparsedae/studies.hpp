#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sparsedae/problems.hpp"
#include "sparsedae/stepper.hpp"

namespace sparsedae {

struct ConvergenceRow {
  std::size_t N = 0;
  std::size_t M = 0;
  std::size_t unknowns = 0;
  std::vector<double> probes;  // one per ConvergenceTable::observables entry
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t jacobian_updates = 0;
  std::size_t lu_count = 0;
  Status status = Status::Success;
  double seconds = 0.0;
};

struct ConvergenceTable {
  std::string problem;
  std::vector<std::string> observables;
  std::vector<ConvergenceRow> rows;

  /// Every probe column is non-increasing or non-decreasing down the rows.
  bool monotone() const;
  std::string to_markdown() const;
  std::string to_csv() const;
};

/// Solves a built-in grid problem for each N in `sizes` (M follows the
/// problem's default aspect unless cfg.M is set) and probes the final state.
/// An empty observable list selects every observable of the problem. Grid
/// sizes run on up to `threads` worker threads.
ConvergenceTable convergence_study(const std::string& problem_id, const ProblemConfig& cfg,
                                   const std::vector<std::size_t>& sizes, const SolverOptions& opt,
                                   std::vector<std::string> observables = {}, unsigned threads = 1);

struct OrderStudy {
  Method method = Method::EB;
  std::vector<double> h;
  std::vector<double> raw_error;           // two half steps, no extrapolation
  std::vector<double> extrapolated_error;  // Richardson-combined state
  double raw_slope = 0.0;
  double extrapolated_slope = 0.0;
};

/// Least-squares slope of log(err) against log(h).
double fitted_slope(const std::vector<double>& h, const std::vector<double>& err);

/// Fixed-step runs to opt.tf for every h; errors are max-norm distances to
/// problem.exact at tf. Throws InvalidOptions when the problem has no exact solution.
OrderStudy order_study(const Problem& problem, Method method, const std::vector<double>& h, SolverOptions opt);

}  // namespace sparsedae
