#include "sparsedae/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsedae/errors.hpp"

namespace sparsedae {

void SolverOptions::validate() const {
  auto bad = [](const std::string& what) { throw InvalidOptions(what); };
  if (!(std::isfinite(tf) && tf > 0.0)) bad("tf must be positive");
  if (!(std::isfinite(atol) && atol > 0.0)) bad("atol must be positive");
  if (!(hinit > 0.0)) bad("hinit must be positive");
  if (!(hinit <= hmax)) bad("hinit must not exceed hmax");
  if (!(hmax <= tf)) bad("hmax must not exceed tf");
  if (ntot < 1) bad("Ntot must be at least 1");
  if (iter < 1) bad("iter must be at least 1");
  if (!(growth_cap >= 1.0) || !(safety > 0.0) || !(reject_divisor > 1.0)) bad("invalid step-size controller constants");
  if (max_consecutive_rejections < 1) bad("rejection cap must be at least 1");
  if (init_iter < 1 || init_rounds < 1) bad("initialization budget must be at least 1");
  if (ctol < 0.0) bad("ctol must be non-negative");
  if (fixed_h) {
    if (!(*fixed_h > 0.0)) bad("fixed step must be positive");
    const double steps = tf / *fixed_h;
    if (std::abs(steps - std::round(steps)) * *fixed_h > 1e-12 * tf || std::round(steps) < 1) {
      bad("fixed step does not divide tf");
    }
  }
}

double error_norm(std::span<const double> y_err, std::span<const double> yref, double atol, double rtol,
                  ErrorDenominator denominator, NormReduction reduction) {
  if (denominator == ErrorDenominator::Standard && yref.size() != y_err.size()) {
    throw DimensionMismatch("error and reference vectors differ in length");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < y_err.size(); ++i) {
    const double e = std::abs(y_err[i]);
    const double scale = denominator == ErrorDenominator::Literal ? e : std::abs(yref[i]);
    const double ratio = e / (atol + scale * rtol);
    if (reduction == NormReduction::Max) {
      acc = std::max(acc, ratio);
    } else {
      acc += ratio * ratio;
    }
  }
  if (reduction == NormReduction::Rms && !y_err.empty()) acc = std::sqrt(acc / static_cast<double>(y_err.size()));
  return acc;
}

double next_h(double h_old, double err, int p, double hmax, double growth_cap, double safety) {
  double factor = growth_cap;
  if (err > 0.0) factor = std::min(growth_cap, safety * std::pow(1.0 / err, 1.0 / (p + 1)));
  return std::min(hmax, h_old * factor);
}

ValueVector richardson(std::span<const double> y_h, std::span<const double> y_h2, int p) {
  if (y_h.size() != y_h2.size()) throw DimensionMismatch("Richardson inputs differ in length");
  const double two_p = std::ldexp(1.0, p);
  ValueVector out(y_h.size());
  for (std::size_t i = 0; i < y_h.size(); ++i) out[i] = (two_p * y_h2[i] - y_h[i]) / (two_p - 1.0);
  return out;
}

std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::Success: return "success";
    case Status::TooManySteps: return "too_many_steps";
    case Status::StepUnderflow: return "step_underflow";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

namespace {

SymbolicJacobian build_jacobian(const MethodResidual& res) { return differentiate(res, detect_pattern(res)); }

}  // namespace

Integrator::Integrator(std::shared_ptr<const DaeSystem> sys, Method method)
    : residual_(build_residual(std::move(sys), method)),
      jacobian_(build_jacobian(residual_)),
      assembler_(jacobian_, residual_.layout()) {
  if (residual_.size() > kDenseLimit) column_order_ = fill_reducing_order(jacobian_.pattern.to_matrix());
}

SparseMatrix Integrator::jacobian_at(std::span<const double> state, double h) const {
  const std::vector<double> zero(residual_.size(), 0.0);
  return assembler_.assemble(zero, residual_.bind(h, state));
}

Factorization Integrator::factorize_at(std::span<const double> state, double h) const {
  return factorize(jacobian_at(state, h), column_order_);
}

ValueVector Integrator::initialize(std::span<const double> guess, const SolverOptions& opt, Trajectory* traj) const {
  const std::size_t n = system().size();
  if (guess.size() != n) throw DimensionMismatch("initial guess has the wrong length");
  ValueVector y(guess.begin(), guess.end());
  const std::vector<double> zero(residual_.size(), 0.0);
  double last_norm = std::numeric_limits<double>::infinity();
  for (int round = 0; round < opt.init_rounds; ++round) {
    const auto slots = residual_.bind(0.0, y);
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    const double tol = std::min(opt.newton_tol(), 1e-10 * (1.0 + scale));
    if (traj) {
      ++traj->jacobian_updates;
      ++traj->lu_count;
    }
    NewtonOutcome out;
    try {
      const auto f = factorize(assembler_.assemble(zero, slots), column_order_);
      out = newton_solve(residual_, slots, f, zero, opt.init_iter, tol);
    } catch (const SingularMatrix& e) {
      throw InitializationFailed(std::string("consistent initialization: ") + e.what());
    } catch (const NonFinite& e) {
      throw InitializationFailed(std::string("consistent initialization: ") + e.what());
    }
    if (out.non_finite) throw InitializationFailed("consistent initialization: " + out.message);
    y = state_update(y, out.uu, residual_.method());
    last_norm = out.correction_norm;
    if (out.converged) return y;
  }
  throw InitializationFailed("consistent initialization did not converge (last correction " +
                             std::to_string(last_norm) + ")");
}

ValueVector Integrator::advance(std::span<const double> state, double h, const Factorization& f,
                                const SolverOptions& opt, int& iterations, std::string& failure) const {
  const std::vector<double> zero(residual_.size(), 0.0);
  const auto slots = residual_.bind(h, state);
  const auto out = newton_solve(residual_, slots, f, zero, opt.iter, opt.newton_tol());
  iterations += out.iterations;
  if (out.non_finite) {
    failure = out.message;
    return {};
  }
  return state_update(state, out.uu, residual_.method());
}

StepTrial Integrator::attempt_step(std::span<const double> state, double h, const Factorization& f,
                                   const SolverOptions& opt) const {
  StepTrial trial;
  trial.h = h;
  auto fail = [&](std::string message) {
    trial.failed = true;
    trial.err = std::numeric_limits<double>::infinity();
    trial.message = std::move(message);
    return trial;
  };
  try {
    std::string failure;
    trial.y_h = advance(state, h, f, opt, trial.newton_iterations, failure);
    if (!failure.empty()) return fail(failure);
    const auto mid = advance(state, 0.5 * h, f, opt, trial.newton_iterations, failure);
    if (!failure.empty()) return fail(failure);
    trial.y_h2 = advance(mid, 0.5 * h, f, opt, trial.newton_iterations, failure);
    if (!failure.empty()) return fail(failure);
  } catch (const NonFinite& e) {
    return fail(e.what());
  }
  const int p = traits(residual_.method()).order;
  const double denom = std::ldexp(1.0, p) - 1.0;
  trial.y_err.resize(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) trial.y_err[i] = (trial.y_h2[i] - trial.y_h[i]) / denom;
  trial.err = error_norm(trial.y_err, trial.y_h2, opt.atol, opt.rtol(), opt.denominator, opt.reduction);
  if (!std::isfinite(trial.err)) return fail("error estimate is not finite");
  return trial;
}

Trajectory Integrator::integrate(const SolverOptions& opt) const {
  if (opt.fixed_h) return integrate_fixed(opt);
  opt.validate();
  Trajectory traj;
  traj.names = system().var_names();
  ValueVector state = initialize(system().initial(), opt, &traj);
  double t = 0.0;
  traj.t.push_back(t);
  traj.states.push_back(state);

  const int p = traits(residual_.method()).order;
  const double h_floor = std::max(1e-14 * opt.tf, 1e-3 * opt.hinit);
  double h = std::min({opt.hinit, opt.hmax, opt.tf});
  bool refresh = true;
  int consecutive = 0;
  std::optional<Factorization> f;

  auto reject = [&](double err, bool refreshed) {
    traj.log.push_back({t, h, err, false, refreshed});
    ++traj.rejected;
    ++consecutive;
    h /= opt.reject_divisor;
    refresh = true;
    if (consecutive >= opt.max_consecutive_rejections || h < h_floor) {
      traj.status = Status::StepUnderflow;
      traj.message = "step size underflow at t=" + std::to_string(t) + " after " + std::to_string(consecutive) +
                     " consecutive rejections";
      return false;
    }
    return true;
  };

  while (t < opt.tf) {
    if (traj.accepted >= opt.ntot) {
      traj.status = Status::TooManySteps;
      traj.message = "reached Ntot=" + std::to_string(opt.ntot) + " accepted steps at t=" + std::to_string(t);
      break;
    }
    const bool refreshed = refresh;
    if (refresh) {
      ++traj.jacobian_updates;
      ++traj.lu_count;
      try {
        f = factorize_at(state, h);
        refresh = false;
      } catch (const SingularMatrix&) {
        if (!reject(std::numeric_limits<double>::infinity(), true)) break;
        continue;
      } catch (const NonFinite&) {
        if (!reject(std::numeric_limits<double>::infinity(), true)) break;
        continue;
      }
    }
    const StepTrial trial = attempt_step(state, h, *f, opt);
    if (trial.err > 1.0) {
      if (!reject(trial.err, refreshed)) break;
      continue;
    }
    traj.log.push_back({t, h, trial.err, true, refreshed});
    consecutive = 0;
    ++traj.accepted;
    state = opt.extrapolate ? richardson(trial.y_h, trial.y_h2, p) : trial.y_h2;
    const double remaining = opt.tf - t;
    t = h >= remaining * (1.0 - 1e-14) ? opt.tf : t + h;
    traj.t.push_back(t);
    traj.states.push_back(state);
    if (trial.err > opt.refresh_threshold) refresh = true;
    h = std::min(next_h(h, trial.err, p, opt.hmax, opt.growth_cap, opt.safety), opt.tf - t);
  }
  if (traj.message.empty()) {
    traj.message = "integration completed, number of failed steps = " + std::to_string(traj.rejected);
  } else {
    traj.message += "; number of failed steps = " + std::to_string(traj.rejected);
  }
  return traj;
}

Trajectory Integrator::integrate_fixed(const SolverOptions& opt) const {
  opt.validate();
  if (!opt.fixed_h) throw InvalidOptions("integrate_fixed needs a fixed step");
  const double h = *opt.fixed_h;
  const auto steps = static_cast<std::size_t>(std::llround(opt.tf / h));
  Trajectory traj;
  traj.names = system().var_names();
  ValueVector state = initialize(system().initial(), opt, &traj);
  traj.t.push_back(0.0);
  traj.states.push_back(state);
  const int p = traits(residual_.method()).order;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    ++traj.jacobian_updates;
    ++traj.lu_count;
    const auto f = factorize_at(state, h);
    const StepTrial trial = attempt_step(state, h, f, opt);
    if (trial.failed) throw NonFinite("fixed step at t=" + std::to_string(t) + ": " + trial.message);
    traj.log.push_back({t, h, trial.err, true, true});
    ++traj.accepted;
    state = opt.extrapolate ? richardson(trial.y_h, trial.y_h2, p) : trial.y_h2;
    traj.t.push_back(k + 1 == steps ? opt.tf : static_cast<double>(k + 1) * h);
    traj.states.push_back(state);
  }
  traj.message = "fixed-step integration completed with " + std::to_string(steps) + " steps";
  return traj;
}

Trajectory integrate(const DaeSystem& sys, const SolverOptions& opt) {
  return Integrator(std::make_shared<const DaeSystem>(sys), opt.method).integrate(opt);
}

Trajectory integrate_fixed(const DaeSystem& sys, const SolverOptions& opt) {
  return Integrator(std::make_shared<const DaeSystem>(sys), opt.method).integrate_fixed(opt);
}

}  // namespace sparsedae
