#include "sparsedae/dae_system.hpp"

#include <algorithm>
#include <unordered_set>

#include "sparsedae/errors.hpp"

namespace sparsedae {

namespace {

void check_references(const Expr& e, std::size_t n, const ParameterMap& params, const std::string& where) {
  for (std::size_t j : free_unknowns(e)) {
    if (j >= n) {
      throw InvalidSystem(where + " references state " + std::to_string(j + 1) + " but the system has " +
                          std::to_string(n) + " variables");
    }
  }
  for (const auto& p : free_parameters(e)) {
    if (!params.contains(p)) throw InvalidSystem(where + " references undeclared parameter '" + p + "'");
  }
}

}  // namespace

DaeSystem::DaeSystem(std::vector<Expr> ode_rhs, std::vector<Expr> alg_residual, std::vector<std::string> var_names,
                     ValueVector initial, ParameterMap params)
    : ode_rhs_(std::move(ode_rhs)),
      alg_residual_(std::move(alg_residual)),
      var_names_(std::move(var_names)),
      initial_(std::move(initial)),
      params_(std::move(params)) {
  const std::size_t n = size();
  if (n == 0) throw InvalidSystem("a system needs at least one equation");
  if (var_names_.size() != n) {
    throw InvalidSystem("expected " + std::to_string(n) + " variable names, got " + std::to_string(var_names_.size()));
  }
  if (initial_.size() != n) {
    throw InvalidSystem("expected " + std::to_string(n) + " initial values, got " + std::to_string(initial_.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& name : var_names_) {
    if (name.empty()) throw InvalidSystem("empty variable name");
    if (!seen.insert(name).second) throw InvalidSystem("duplicate variable name '" + name + "'");
  }
  if (params_.contains(std::string(MethodResidual::kStepParam))) {
    throw InvalidSystem("parameter name 'h' is reserved for the step size");
  }
  for (std::size_t i = 0; i < ode_rhs_.size(); ++i) {
    check_references(ode_rhs_[i], n, params_, "ODE " + std::to_string(i + 1));
  }
  for (std::size_t i = 0; i < alg_residual_.size(); ++i) {
    check_references(alg_residual_[i], n, params_, "algebraic equation " + std::to_string(i + 1));
  }
}

std::size_t DaeSystem::index_of(std::string_view var_name) const {
  auto it = std::find(var_names_.begin(), var_names_.end(), var_name);
  if (it == var_names_.end()) throw UnboundSymbol("no variable named '" + std::string(var_name) + "'");
  return static_cast<std::size_t>(it - var_names_.begin());
}

DaeSystem DaeSystem::with_param(const std::string& name, double value) const {
  ParameterMap p = params_;
  p[name] = value;
  return DaeSystem(ode_rhs_, alg_residual_, var_names_, initial_, std::move(p));
}

DaeSystem DaeSystem::with_initial(ValueVector initial) const {
  return DaeSystem(ode_rhs_, alg_residual_, var_names_, std::move(initial), params_);
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::EB, Method::CN, Method::IMPTRAP, Method::RAD}) {
    if (traits(m).name == name) return m;
  }
  throw InvalidOptions("unknown method '" + std::string(name) + "' (expected eb, cn, imptrap or rad)");
}

// ---------------------------------------------------------------------------

std::string MethodResidual::base_state_param(std::size_t j) { return "Y0[" + std::to_string(j + 1) + "]"; }

std::string MethodResidual::explicit_term_param(std::size_t i) { return "f0[" + std::to_string(i + 1) + "]"; }

MethodResidual::MethodResidual(std::shared_ptr<const DaeSystem> system, Method method, std::vector<Expr> residuals)
    : system_(std::move(system)), method_(method), residuals_(std::move(residuals)) {
  const DaeSystem& sys = *system_;
  layout_.add(std::string(kStepParam));
  for (std::size_t j = 0; j < sys.size(); ++j) layout_.add(base_state_param(j));
  if (method_ == Method::CN) {
    for (std::size_t i = 0; i < sys.ode_count(); ++i) layout_.add(explicit_term_param(i));
  }
  for (const auto& [name, value] : sys.params()) layout_.add(name);

  tapes_.reserve(residuals_.size());
  for (const auto& r : residuals_) tapes_.push_back(CompiledExpr::compile(r, layout_));
  if (method_ == Method::CN) {
    rhs_tapes_.reserve(sys.ode_count());
    for (const auto& f : sys.ode_rhs()) rhs_tapes_.push_back(CompiledExpr::compile(f, layout_));
  }
}

std::vector<double> MethodResidual::bind(double h, std::span<const double> y0) const {
  const DaeSystem& sys = *system_;
  if (y0.size() != sys.size()) throw DimensionMismatch("base state length does not match the system");
  std::vector<double> slots(layout_.size(), 0.0);
  slots[0] = h;
  std::copy(y0.begin(), y0.end(), slots.begin() + 1);
  std::size_t next = 1 + sys.size();
  const std::size_t explicit_begin = next;
  if (method_ == Method::CN) next += sys.ode_count();
  for (const auto& [name, value] : sys.params()) slots[next++] = value;
  for (std::size_t i = 0; i < rhs_tapes_.size(); ++i) slots[explicit_begin + i] = rhs_tapes_[i].eval(y0, slots);
  return slots;
}

ParameterMap MethodResidual::bind_map(double h, std::span<const double> y0) const {
  const auto slots = bind(h, y0);
  ParameterMap out;
  for (std::size_t s = 0; s < slots.size(); ++s) out[layout_.name(s)] = slots[s];
  return out;
}

void MethodResidual::evaluate(std::span<const double> uu, std::span<const double> slots, std::span<double> out) const {
  if (out.size() != tapes_.size() || uu.size() != tapes_.size()) {
    throw DimensionMismatch("residual evaluation with mismatched vector lengths");
  }
  for (std::size_t i = 0; i < tapes_.size(); ++i) out[i] = tapes_[i].eval(uu, slots);
}

// ---------------------------------------------------------------------------

MethodResidual build_residual(std::shared_ptr<const DaeSystem> sys_ptr, Method method) {
  const DaeSystem& sys = *sys_ptr;
  const std::size_t n = sys.size();
  const std::size_t n_ode = sys.ode_count();
  const Expr h = Expr::parameter(std::string(MethodResidual::kStepParam));

  if (method == Method::CN || method == Method::IMPTRAP) {
    for (std::size_t i = 0; i < sys.alg_count(); ++i) {
      const auto vars = free_unknowns(sys.alg_residual()[i]);
      const bool touches_alg = std::any_of(vars.begin(), vars.end(), [&](std::size_t j) { return j >= n_ode; });
      if (!touches_alg) {
        throw UnsupportedSystem("algebraic equation " + std::to_string(i + 1) +
                                " involves no algebraic variable at the step endpoint");
      }
    }
  }

  std::vector<Expr> base(n);
  for (std::size_t j = 0; j < n; ++j) base[j] = Expr::parameter(MethodResidual::base_state_param(j));

  // Replacement tables: state_j -> scale*uu_{j+offset} + Y0_j
  auto shifted = [&](std::size_t offset, double scale) {
    std::vector<Expr> table(n);
    for (std::size_t j = 0; j < n; ++j) table[j] = Expr(scale) * Expr::unknown(j + offset) + base[j];
    return table;
  };
  auto apply = [](const Expr& e, const std::vector<Expr>& table) {
    return substitute(e, [&](std::size_t j) { return table[j]; });
  };

  std::vector<Expr> res;
  res.reserve(n * static_cast<std::size_t>(traits(method).multiplier));
  switch (method) {
    case Method::EB: {
      const auto endpoint = shifted(0, 1.0);
      for (std::size_t i = 0; i < n_ode; ++i) {
        res.push_back(Expr::unknown(i) - h * apply(sys.ode_rhs()[i], endpoint));
      }
      for (const auto& g : sys.alg_residual()) res.push_back(apply(g, endpoint));
      break;
    }
    case Method::CN: {
      const auto endpoint = shifted(0, 1.0);
      const Expr half_h = h / Expr(2.0);
      for (std::size_t i = 0; i < n_ode; ++i) {
        res.push_back(Expr::unknown(i) - half_h * apply(sys.ode_rhs()[i], endpoint) -
                      half_h * Expr::parameter(MethodResidual::explicit_term_param(i)));
      }
      for (const auto& g : sys.alg_residual()) res.push_back(apply(g, endpoint));
      break;
    }
    case Method::IMPTRAP: {
      const auto midpoint = shifted(0, 0.5);
      const auto endpoint = shifted(0, 1.0);
      for (std::size_t i = 0; i < n_ode; ++i) {
        res.push_back(Expr::unknown(i) - h * apply(sys.ode_rhs()[i], midpoint));
      }
      for (const auto& g : sys.alg_residual()) res.push_back(apply(g, endpoint));
      break;
    }
    case Method::RAD: {
      const auto endpoint = shifted(0, 1.0);
      const auto interior = shifted(n, 1.0);
      for (std::size_t i = 0; i < n_ode; ++i) {
        res.push_back(Expr(2.5) * Expr::unknown(i) - Expr(4.5) * Expr::unknown(i + n) -
                      h * apply(sys.ode_rhs()[i], endpoint));
      }
      for (const auto& g : sys.alg_residual()) res.push_back(apply(g, endpoint));
      for (std::size_t i = 0; i < n_ode; ++i) {
        res.push_back(Expr(0.5) * Expr::unknown(i) + Expr(1.5) * Expr::unknown(i + n) -
                      h * apply(sys.ode_rhs()[i], interior));
      }
      for (const auto& g : sys.alg_residual()) res.push_back(apply(g, interior));
      break;
    }
  }
  return MethodResidual(std::move(sys_ptr), method, std::move(res));
}

MethodResidual build_residual(const DaeSystem& sys, Method method) {
  return build_residual(std::make_shared<const DaeSystem>(sys), method);
}

MethodResidual initialization_residual(std::shared_ptr<const DaeSystem> sys, Method method) {
  return build_residual(std::move(sys), method);
}

ValueVector state_update(std::span<const double> y0, std::span<const double> uu, Method method) {
  const std::size_t n = y0.size();
  if (uu.size() != n * static_cast<std::size_t>(traits(method).multiplier)) {
    throw DimensionMismatch("increment length " + std::to_string(uu.size()) + " does not match " +
                            std::to_string(n) + " states for method " + std::string(traits(method).name));
  }
  ValueVector out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = y0[j] + uu[j];
  return out;
}

}  // namespace sparsedae
