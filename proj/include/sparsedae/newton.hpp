#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "sparsedae/dae_system.hpp"
#include "sparsedae/sparse_matrix.hpp"

namespace sparsedae {

struct NewtonOutcome {
  ValueVector uu;
  int iterations = 0;
  double correction_norm = 0.0;  // infinity norm of the last correction
  bool converged = false;
  bool non_finite = false;  // residual evaluation failed; uu is the last good iterate
  std::string message;
};

/// Modified Newton: uu <- uu - F^{-1} R(uu), at most `iter` times, stopping
/// early once the correction is at most `ctol` in the infinity norm. The
/// factorization is never rebuilt here. Running out of iterations is reported
/// through `converged`, not thrown.
NewtonOutcome newton_solve(const MethodResidual& res, std::span<const double> slots, const Factorization& f,
                           std::span<const double> uu0, int iter, double ctol);

inline double default_ctol(double atol) noexcept { return 0.01 * atol; }

}  // namespace sparsedae
