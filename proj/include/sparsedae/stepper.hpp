#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsedae/dae_system.hpp"
#include "sparsedae/newton.hpp"
#include "sparsedae/sparse_jacobian.hpp"
#include "sparsedae/sparse_matrix.hpp"

namespace sparsedae {

/// Denominator of the scaled error: Literal uses atol + |y_err|*rtol,
/// Standard uses atol + |y|*rtol.
enum class ErrorDenominator { Literal, Standard };
enum class NormReduction { Max, Rms };

struct SolverOptions {
  double tf = 1.0;
  double atol = 1e-6;
  double hinit = 1e-6;
  double hmax = 0.05;
  std::size_t ntot = 1000;
  int iter = 5;
  Method method = Method::IMPTRAP;

  double growth_cap = 3.0;
  double safety = 0.9;
  double reject_divisor = 4.0;
  double refresh_threshold = 0.1;
  int max_consecutive_rejections = 40;
  bool extrapolate = true;
  std::optional<double> fixed_h;
  ErrorDenominator denominator = ErrorDenominator::Literal;
  NormReduction reduction = NormReduction::Max;

  /// Newton correction tolerance; 0 selects default_ctol(atol).
  double ctol = 0.0;
  /// Consistent initialization: iterations per Jacobian refresh and refresh rounds.
  int init_iter = 50;
  int init_rounds = 10;

  double rtol() const noexcept { return 10.0 * atol; }
  double newton_tol() const noexcept { return ctol > 0.0 ? ctol : default_ctol(atol); }
  /// Throws InvalidOptions.
  void validate() const;
};

double error_norm(std::span<const double> y_err, std::span<const double> yref, double atol, double rtol,
                  ErrorDenominator denominator = ErrorDenominator::Literal,
                  NormReduction reduction = NormReduction::Max);

/// min(hmax, h_old * min(growth_cap, safety * err^(-1/(p+1)))); err = 0 gives the cap.
double next_h(double h_old, double err, int p, double hmax, double growth_cap = 3.0, double safety = 0.9);

/// (2^p y_h2 - y_h) / (2^p - 1), componentwise.
ValueVector richardson(std::span<const double> y_h, std::span<const double> y_h2, int p);

struct StepTrial {
  double h = 0.0;
  ValueVector y_h;
  ValueVector y_h2;
  ValueVector y_err;
  double err = 0.0;
  bool failed = false;  // non-finite residual; err is +inf
  int newton_iterations = 0;
  std::string message;
};

enum class Status { Success, TooManySteps, StepUnderflow };
std::string_view to_string(Status s) noexcept;

struct StepLogEntry {
  double t;  // start of the attempted step
  double h;
  double err;
  bool accepted;
  bool refreshed;  // Jacobian assembled and factorized for this attempt
};

struct Trajectory {
  std::vector<std::string> names;
  std::vector<double> t;
  std::vector<ValueVector> states;

  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t jacobian_updates = 0;  // includes the assemblies made during initialization
  std::size_t lu_count = 0;
  Status status = Status::Success;
  std::string message;
  std::vector<StepLogEntry> log;

  const ValueVector& final_state() const { return states.back(); }
  double final_time() const { return t.back(); }
  bool ok() const noexcept { return status == Status::Success; }
};

/// Holds everything that depends only on (system, method): the residual set,
/// its pattern, the symbolic Jacobian and the compiled assembler.
class Integrator {
 public:
  Integrator(std::shared_ptr<const DaeSystem> sys, Method method);

  const DaeSystem& system() const noexcept { return residual_.system(); }
  Method method() const noexcept { return residual_.method(); }
  const MethodResidual& residual() const noexcept { return residual_; }
  const SparsityPattern& pattern() const noexcept { return jacobian_.pattern; }
  const SymbolicJacobian& jacobian() const noexcept { return jacobian_; }

  /// Numeric Jacobian at uu = 0 for a step of size h from `state`.
  SparseMatrix jacobian_at(std::span<const double> state, double h) const;
  /// Assembles and factorizes jacobian_at(state, h).
  Factorization factorize_at(std::span<const double> state, double h) const;

  /// Solves the h = 0 residual from `guess`. Counts its Jacobian refreshes in
  /// `traj`. Throws InitializationFailed.
  ValueVector initialize(std::span<const double> guess, const SolverOptions& opt, Trajectory* traj = nullptr) const;

  /// One step of size h and two of size h/2, all against the frozen `f`.
  StepTrial attempt_step(std::span<const double> state, double h, const Factorization& f,
                         const SolverOptions& opt) const;

  Trajectory integrate(const SolverOptions& opt) const;
  Trajectory integrate_fixed(const SolverOptions& opt) const;

 private:
  ValueVector advance(std::span<const double> state, double h, const Factorization& f, const SolverOptions& opt,
                      int& iterations, std::string& failure) const;

  MethodResidual residual_;
  SymbolicJacobian jacobian_;
  JacobianAssembler assembler_;
  std::vector<std::size_t> column_order_;
};

/// Adaptive integration; uses options.fixed_h when set.
Trajectory integrate(const DaeSystem& sys, const SolverOptions& opt);
Trajectory integrate_fixed(const DaeSystem& sys, const SolverOptions& opt);

}  // namespace sparsedae
