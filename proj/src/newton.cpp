#include "sparsedae/newton.hpp"

#include <algorithm>
#include <cmath>

#include "sparsedae/errors.hpp"

namespace sparsedae {

NewtonOutcome newton_solve(const MethodResidual& res, std::span<const double> slots, const Factorization& f,
                           std::span<const double> uu0, int iter, double ctol) {
  const std::size_t n = res.size();
  if (uu0.size() != n || f.n() != n) throw DimensionMismatch("Newton start or factorization has the wrong size");

  NewtonOutcome out;
  out.uu.assign(uu0.begin(), uu0.end());
  std::vector<double> r(n), work(n);
  for (int k = 0; k < iter; ++k) {
    try {
      res.evaluate(out.uu, slots, r);
    } catch (const NonFinite& e) {
      out.non_finite = true;
      out.converged = false;
      out.message = e.what();
      return out;
    }
    f.solve_in_place(r, work);
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out.uu[i] -= r[i];
      norm = std::max(norm, std::abs(r[i]));
    }
    out.iterations = k + 1;
    out.correction_norm = norm;
    if (!std::isfinite(norm)) {
      out.non_finite = true;
      out.message = "Newton correction is not finite";
      return out;
    }
    if (norm <= ctol) {
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace sparsedae
