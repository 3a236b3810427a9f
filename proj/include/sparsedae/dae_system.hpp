#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparsedae/expr.hpp"
#include "sparsedae/tape.hpp"

namespace sparsedae {

/// Autonomous semi-explicit index-1 DAE
///
///     y' = f(y, z),   0 = g(y, z)
///
/// over the stacked state Y = (y, z). Right-hand sides reference the state
/// through Expr::unknown(j), j = 0..size()-1, ODE variables first.
class DaeSystem {
 public:
  DaeSystem(std::vector<Expr> ode_rhs, std::vector<Expr> alg_residual, std::vector<std::string> var_names,
            ValueVector initial, ParameterMap params = {});

  std::size_t ode_count() const noexcept { return ode_rhs_.size(); }
  std::size_t alg_count() const noexcept { return alg_residual_.size(); }
  std::size_t size() const noexcept { return ode_rhs_.size() + alg_residual_.size(); }

  const std::vector<Expr>& ode_rhs() const noexcept { return ode_rhs_; }
  const std::vector<Expr>& alg_residual() const noexcept { return alg_residual_; }
  const std::vector<std::string>& var_names() const noexcept { return var_names_; }
  const ValueVector& initial() const noexcept { return initial_; }
  const ParameterMap& params() const noexcept { return params_; }

  std::size_t index_of(std::string_view var_name) const;  // throws UnboundSymbol

  /// Copy with one model parameter changed (all other data shared).
  DaeSystem with_param(const std::string& name, double value) const;
  DaeSystem with_initial(ValueVector initial) const;

 private:
  std::vector<Expr> ode_rhs_;
  std::vector<Expr> alg_residual_;
  std::vector<std::string> var_names_;
  ValueVector initial_;
  ParameterMap params_;
};

enum class Method { EB, CN, IMPTRAP, RAD };

struct MethodTraits {
  std::string_view name;
  int order;       // p in the error estimate and step-size law
  int multiplier;  // unknowns per state component
  bool a_stable;
  bool l_stable;
  int extrapolated_order;
};

constexpr MethodTraits traits(Method m) noexcept {
  switch (m) {
    case Method::EB: return {"eb", 1, 1, true, true, 2};
    case Method::CN: return {"cn", 2, 1, true, false, 4};
    case Method::IMPTRAP: return {"imptrap", 2, 1, true, false, 4};
    case Method::RAD: return {"rad", 3, 2, true, true, 4};
  }
  return {"?", 0, 0, false, false, 0};
}

Method parse_method(std::string_view name);  // throws InvalidOptions

/// Residual equations R(uu) = 0 for one step of a method, in the increment
/// unknowns uu = Y1 - Y0. The step size and base state enter as parameters, so
/// the structure is fixed for a given (system, method) and only the numeric
/// bindings change from step to step.
class MethodResidual {
 public:
  static constexpr std::string_view kStepParam = "h";
  static std::string base_state_param(std::size_t j);   // Y0 component j
  static std::string explicit_term_param(std::size_t i);  // f_i(Y0), CN only

  MethodResidual(std::shared_ptr<const DaeSystem> system, Method method, std::vector<Expr> residuals);

  const DaeSystem& system() const noexcept { return *system_; }
  std::shared_ptr<const DaeSystem> system_ptr() const noexcept { return system_; }
  Method method() const noexcept { return method_; }
  std::size_t size() const noexcept { return residuals_.size(); }
  const std::vector<Expr>& residuals() const noexcept { return residuals_; }
  const Expr& residual(std::size_t i) const { return residuals_.at(i); }

  /// Slot layout: h, Y0[0..N), f0[0..N_ode) for CN, then model parameters.
  const ParameterLayout& layout() const noexcept { return layout_; }

  /// Slot values for a step of size h from base state y0. For CN this
  /// evaluates f(y0) for the explicit term.
  std::vector<double> bind(double h, std::span<const double> y0) const;

  /// Name-keyed bindings, for the reference evaluator.
  ParameterMap bind_map(double h, std::span<const double> y0) const;

  /// Fast residual evaluation through compiled tapes.
  void evaluate(std::span<const double> uu, std::span<const double> slots, std::span<double> out) const;

 private:
  std::shared_ptr<const DaeSystem> system_;
  Method method_;
  std::vector<Expr> residuals_;
  ParameterLayout layout_;
  std::vector<CompiledExpr> tapes_;
  std::vector<CompiledExpr> rhs_tapes_;  // f_i over the plain state, for CN
};

/// Lowers the system into the method's residual set.
///   EB:      uu_i - h f_i(uu + Y0);                       g(uu + Y0)
///   CN:      uu_i - h/2 f_i(uu + Y0) - h/2 f_i(Y0);       g(uu + Y0)
///   IMPTRAP: uu_i - h f_i(uu/2 + Y0);                     g(uu + Y0)
///   RAD:     endpoint block  5/2 uu_i - 9/2 uu_{i+N} - h f_i(uu[0,N) + Y0);  g(uu[0,N) + Y0)
///            interior block  1/2 uu_i + 3/2 uu_{i+N} - h f_i(uu[N,2N) + Y0); g(uu[N,2N) + Y0)
/// Throws UnsupportedSystem for CN/IMPTRAP when an algebraic equation does not
/// involve any algebraic variable.
MethodResidual build_residual(std::shared_ptr<const DaeSystem> sys, Method method);
MethodResidual build_residual(const DaeSystem& sys, Method method);

/// The same residual set, intended for evaluation with h = 0 to obtain a
/// consistent initial state; structure is identical to build_residual.
MethodResidual initialization_residual(std::shared_ptr<const DaeSystem> sys, Method method);

/// Y0 + uu restricted to the first N components (the endpoint block).
ValueVector state_update(std::span<const double> y0, std::span<const double> uu, Method method);

}  // namespace sparsedae
