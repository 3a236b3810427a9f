#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sparsedae/dae_system.hpp"

namespace sparsedae {

struct GridSpec {
  std::size_t N = 0;
  std::size_t M = 0;  // 0 for one-dimensional grids
  double dx = 0.0;
  double dy = 0.0;
};

/// A named linear functional of the state, usually a two- or four-cell average.
struct Observable {
  std::string name;
  std::vector<std::pair<std::size_t, double>> terms;  // (state index, weight)
};

struct Problem {
  std::string id;
  DaeSystem system;
  std::optional<GridSpec> grid;
  std::vector<Observable> observables;
  /// Closed-form solution, when one is known.
  std::function<ValueVector(double)> exact;
};

/// y' = z, 0 = y^2 + z^2 - 1; y(0) = 0, z guess 0.95. Exact: y = sin t, z = cos t.
Problem example1();
/// y' = lambda y, y(0) = 1. Exact: exp(lambda t).
Problem linear_decay(double lambda = -1.0);
/// Van der Pol: x' = mu (1 - y^2) x - y, y' = x; x(0) = 0, y(0) = 2.
Problem example2(double mu = 2.0);
/// y' = -2y + z^2, 0 = -100 ln z + 2y - 5; y(0) = 2, z guess 1.
Problem example3();

/// 1D reaction-diffusion pair on (0,1), N cells:
///   c_t = c_xx - c(1+z),  0 = z_xx - (1-c^2) exp(-z)
/// zero flux at x = 0, c = 1 and z = 0 at x = 1. Ghost cells are algebraic
/// unknowns. Order: c_1..c_N, then c_0, c_{N+1}, z_0, z_1..z_N, z_{N+1}.
/// Observables c_x0 = (c_0+c_1)/2 and z_x0 = (z_0+z_1)/2.
Problem example4(std::size_t N);

/// 2D reaction-diffusion on the unit square:
///   c_t = c_xx + c_yy - phi^2 c^2
/// zero flux at x = 0 and y = 0, c = 1 at x = 1 and y = 1, c(.,.,0) = 0.
/// Interior cells (j-major) come first, then ghost layers left, right, bottom,
/// top. No corner ghosts. phi is the model parameter "phi".
Problem example5(std::size_t N, std::size_t M, double phi = 0.5);

struct Example6Params {
  double Dx = 1.0;
  double Dy = 1.0;
  double Da = 1.0;
  double delta = 1.0;
};

/// Concentration c and potential p in a 0.1 x 1 electrolyte cell:
///   c_t = Dx c_xx + Dy c_yy,  0 = (Dx c p_x)_x + (Dy c p_y)_y
/// with no flux at y = 0 and y = 1, applied current delta at x = L, and a
/// kinetic electrode on the lower half of x = 0. Requires M even. When
/// Da = 0 the potential is fixed only up to a constant; the first left ghost
/// row of p is then replaced by (p_{0,1} + p_{1,1})/2 = 0.
/// Order: c interior, p interior, c ghosts (left, right, bottom, top), p ghosts.
Problem example6(std::size_t N, std::size_t M, const Example6Params& params = {});

/// Settings for make_problem; zero grid sizes select the defaults.
struct ProblemConfig {
  std::size_t N = 0;
  std::size_t M = 0;
  double mu = 2.0;
  double phi = 0.5;
  double lambda = -1.0;
  Example6Params ex6;
};

/// "ex1".."ex6" or "decay". Throws InvalidOptions for an unknown id.
Problem make_problem(std::string_view id, const ProblemConfig& cfg = {});
std::vector<std::string> builtin_problem_ids();

/// Value of a named observable or of a single variable. Throws UnknownObservable.
double probe(const Problem& problem, std::span<const double> state, std::string_view name);
std::vector<std::string> observable_names(const Problem& problem);

}  // namespace sparsedae
