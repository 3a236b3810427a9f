#include "sparsedae/problems.hpp"

#include <algorithm>
#include <cmath>

#include "sparsedae/errors.hpp"

namespace sparsedae {

namespace {

Expr u(std::size_t j) { return Expr::unknown(j); }
Expr num(double v) { return Expr::constant(v); }

std::string cell_name(const char* field, std::size_t i) { return std::string(field) + std::to_string(i); }

std::string cell_name(const char* field, std::size_t i, std::size_t j) {
  return std::string(field) + "[" + std::to_string(i) + "," + std::to_string(j) + "]";
}

// Index bookkeeping for a field on a cell-centered 2D grid with ghost layers
// on all four sides (no corners).
struct Field2D {
  std::size_t N, M;
  std::size_t interior, left, right, bottom, top;  // block offsets

  std::size_t at(std::size_t i, std::size_t j) const {
    if (i == 0) return left + (j - 1);
    if (i == N + 1) return right + (j - 1);
    if (j == 0) return bottom + (i - 1);
    if (j == M + 1) return top + (i - 1);
    return interior + (j - 1) * N + (i - 1);
  }
};

void check_grid(std::size_t N, std::size_t M, bool two_d) {
  if (N < 2) throw InvalidGrid("N must be at least 2");
  if (two_d && M < 2) throw InvalidGrid("M must be at least 2");
}

}  // namespace

Problem example1() {
  DaeSystem sys({u(1)}, {u(0) * u(0) + u(1) * u(1) - num(1.0)}, {"y", "z"}, {0.0, 0.95});
  return {"ex1", std::move(sys), std::nullopt, {}, [](double t) { return ValueVector{std::sin(t), std::cos(t)}; }};
}

Problem linear_decay(double lambda) {
  DaeSystem sys({Expr::parameter("lambda") * u(0)}, {}, {"y"}, {1.0}, {{"lambda", lambda}});
  return {"decay", std::move(sys), std::nullopt, {}, [lambda](double t) { return ValueVector{std::exp(lambda * t)}; }};
}

Problem example2(double mu) {
  const Expr x = u(0), y = u(1), m = Expr::parameter("mu");
  DaeSystem sys({m * (num(1.0) - y * y) * x - y, x}, {}, {"x", "y"}, {0.0, 2.0}, {{"mu", mu}});
  return {"ex2", std::move(sys), std::nullopt, {}, {}};
}

Problem example3() {
  const Expr y = u(0), z = u(1);
  DaeSystem sys({num(-2.0) * y + z * z}, {num(-100.0) * Expr::ln(z) + num(2.0) * y - num(5.0)}, {"y", "z"},
                {2.0, 1.0});
  return {"ex3", std::move(sys), std::nullopt, {}, {}};
}

Problem example4(std::size_t N) {
  check_grid(N, 0, false);
  const double dx = 1.0 / static_cast<double>(N);
  // c_1..c_N, c_0, c_{N+1}, z_0..z_{N+1}
  auto c = [N](std::size_t i) -> std::size_t {
    if (i == 0) return N;
    if (i == N + 1) return N + 1;
    return i - 1;
  };
  auto z = [N](std::size_t i) -> std::size_t { return N + 2 + i; };

  std::vector<std::string> names(2 * N + 4);
  for (std::size_t i = 0; i <= N + 1; ++i) {
    names[c(i)] = cell_name("c", i);
    names[z(i)] = cell_name("z", i);
  }
  const Expr dx2 = num(dx * dx);

  std::vector<Expr> odes;
  for (std::size_t i = 1; i <= N; ++i) {
    odes.push_back((u(c(i + 1)) - num(2.0) * u(c(i)) + u(c(i - 1))) / dx2 - u(c(i)) * (num(1.0) + u(z(i))));
  }
  std::vector<Expr> algs;
  algs.push_back((u(c(1)) - u(c(0))) / num(dx));
  algs.push_back((u(c(N)) + u(c(N + 1))) / num(2.0) - num(1.0));
  algs.push_back((u(z(1)) - u(z(0))) / num(dx));
  for (std::size_t i = 1; i <= N; ++i) {
    algs.push_back((u(z(i + 1)) - num(2.0) * u(z(i)) + u(z(i - 1))) / dx2 -
                   (num(1.0) - u(c(i)) * u(c(i))) * Expr::exp(-u(z(i))));
  }
  algs.push_back((u(z(N)) + u(z(N + 1))) / num(2.0));

  ValueVector init(2 * N + 4, 0.0);
  for (std::size_t i = 0; i <= N + 1; ++i) init[c(i)] = 1.0;

  Problem p{"ex4", DaeSystem(std::move(odes), std::move(algs), std::move(names), std::move(init)),
            GridSpec{N, 0, dx, 0.0}, {}, {}};
  p.observables.push_back({"c_x0", {{c(0), 0.5}, {c(1), 0.5}}});
  p.observables.push_back({"z_x0", {{z(0), 0.5}, {z(1), 0.5}}});
  return p;
}

Problem example5(std::size_t N, std::size_t M, double phi) {
  check_grid(N, M, true);
  const double dx = 1.0 / static_cast<double>(N);
  const double dy = 1.0 / static_cast<double>(M);
  const std::size_t nm = N * M;
  const Field2D c{N, M, 0, nm, nm + M, nm + 2 * M, nm + 2 * M + N};
  const std::size_t total = nm + 2 * N + 2 * M;

  std::vector<std::string> names(total);
  for (std::size_t j = 1; j <= M; ++j) {
    for (std::size_t i = 0; i <= N + 1; ++i) names[c.at(i, j)] = cell_name("c", i, j);
  }
  for (std::size_t i = 1; i <= N; ++i) {
    names[c.at(i, 0)] = cell_name("c", i, 0);
    names[c.at(i, M + 1)] = cell_name("c", i, M + 1);
  }

  const Expr ph = Expr::parameter("phi");
  const Expr dx2 = num(dx * dx), dy2 = num(dy * dy);
  std::vector<Expr> odes;
  odes.reserve(nm);
  for (std::size_t j = 1; j <= M; ++j) {
    for (std::size_t i = 1; i <= N; ++i) {
      const Expr cc = u(c.at(i, j));
      odes.push_back((u(c.at(i + 1, j)) - num(2.0) * cc + u(c.at(i - 1, j))) / dx2 +
                     (u(c.at(i, j + 1)) - num(2.0) * cc + u(c.at(i, j - 1))) / dy2 - ph * ph * cc * cc);
    }
  }
  std::vector<Expr> algs;
  for (std::size_t j = 1; j <= M; ++j) algs.push_back((u(c.at(1, j)) - u(c.at(0, j))) / num(dx));
  for (std::size_t j = 1; j <= M; ++j) algs.push_back((u(c.at(N, j)) + u(c.at(N + 1, j))) / num(2.0) - num(1.0));
  for (std::size_t i = 1; i <= N; ++i) algs.push_back((u(c.at(i, 1)) - u(c.at(i, 0))) / num(dy));
  for (std::size_t i = 1; i <= N; ++i) algs.push_back((u(c.at(i, M)) + u(c.at(i, M + 1))) / num(2.0) - num(1.0));

  ValueVector init(total, 0.0);
  for (std::size_t j = 1; j <= M; ++j) init[c.at(N + 1, j)] = 2.0;
  for (std::size_t i = 1; i <= N; ++i) init[c.at(i, M + 1)] = 2.0;

  Problem p{"ex5",
            DaeSystem(std::move(odes), std::move(algs), std::move(names), std::move(init), {{"phi", phi}}),
            GridSpec{N, M, dx, dy},
            {}, {}};
  p.observables.push_back({"c_x0_y0", {{c.at(0, 1), 0.5}, {c.at(1, 1), 0.5}}});
  return p;
}

Problem example6(std::size_t N, std::size_t M, const Example6Params& prm) {
  check_grid(N, M, true);
  if (M % 2 != 0) throw InvalidGrid("M must be even so that the electrode ends between two cells");
  const double dx = 0.1 / static_cast<double>(N);
  const double dy = 1.0 / static_cast<double>(M);
  const std::size_t nm = N * M;
  const std::size_t ghosts = 2 * N + 2 * M;
  const Field2D c{N, M, 0, 2 * nm, 2 * nm + M, 2 * nm + 2 * M, 2 * nm + 2 * M + N};
  const std::size_t pg = 2 * nm + ghosts;
  const Field2D p{N, M, nm, pg, pg + M, pg + 2 * M, pg + 2 * M + N};
  const std::size_t total = 2 * nm + 2 * ghosts;

  std::vector<std::string> names(total);
  auto name_field = [&](const Field2D& f, const char* label) {
    for (std::size_t j = 1; j <= M; ++j) {
      for (std::size_t i = 0; i <= N + 1; ++i) names[f.at(i, j)] = cell_name(label, i, j);
    }
    for (std::size_t i = 1; i <= N; ++i) {
      names[f.at(i, 0)] = cell_name(label, i, 0);
      names[f.at(i, M + 1)] = cell_name(label, i, M + 1);
    }
  };
  name_field(c, "c");
  name_field(p, "phi");

  const Expr Dx = Expr::parameter("Dx"), Dy = Expr::parameter("Dy");
  const Expr Da = Expr::parameter("Da"), delta = Expr::parameter("delta");
  const Expr hx = num(dx), hy = num(dy), two = num(2.0);
  auto C = [&](std::size_t i, std::size_t j) { return u(c.at(i, j)); };
  auto P = [&](std::size_t i, std::size_t j) { return u(p.at(i, j)); };

  std::vector<Expr> odes;
  odes.reserve(nm);
  for (std::size_t j = 1; j <= M; ++j) {
    for (std::size_t i = 1; i <= N; ++i) {
      odes.push_back(Dx * (C(i + 1, j) - two * C(i, j) + C(i - 1, j)) / num(dx * dx) +
                     Dy * (C(i, j + 1) - two * C(i, j) + C(i, j - 1)) / num(dy * dy));
    }
  }

  std::vector<Expr> algs;
  algs.reserve(nm + 2 * ghosts);
  for (std::size_t j = 1; j <= M; ++j) {
    for (std::size_t i = 1; i <= N; ++i) {
      const Expr east = Dx * ((C(i + 1, j) + C(i, j)) / two) * ((P(i + 1, j) - P(i, j)) / hx);
      const Expr west = Dx * ((C(i, j) + C(i - 1, j)) / two) * ((P(i, j) - P(i - 1, j)) / hx);
      const Expr north = Dy * ((C(i, j) + C(i, j + 1)) / two) * ((P(i, j + 1) - P(i, j)) / hy);
      const Expr south = Dy * ((C(i, j) + C(i, j - 1)) / two) * ((P(i, j) - P(i, j - 1)) / hy);
      algs.push_back((east - west) / hx + (north - south) / hy);
    }
  }

  const bool pin_potential = prm.Da == 0.0;
  // Ghost rows in the same block order as the unknowns: c left, right,
  // bottom, top, then the same for the potential.
  for (std::size_t j = 1; j <= M; ++j) {
    if (j <= M / 2) {
      const Expr cbar = (C(0, j) + C(1, j)) / two, pbar = (P(0, j) + P(1, j)) / two;
      algs.push_back(Dx * (C(1, j) - C(0, j)) / hx - Da * cbar * pbar);
    } else {
      algs.push_back((C(1, j) - C(0, j)) / hx);
    }
  }
  for (std::size_t j = 1; j <= M; ++j) algs.push_back(Dx * (C(N + 1, j) - C(N, j)) / hx - delta);
  for (std::size_t i = 1; i <= N; ++i) algs.push_back((C(i, 1) - C(i, 0)) / hy);
  for (std::size_t i = 1; i <= N; ++i) algs.push_back((C(i, M + 1) - C(i, M)) / hy);

  for (std::size_t j = 1; j <= M; ++j) {
    if (j == 1 && pin_potential) {
      algs.push_back((P(0, j) + P(1, j)) / two);
    } else if (j <= M / 2) {
      const Expr cbar = (C(0, j) + C(1, j)) / two, pbar = (P(0, j) + P(1, j)) / two;
      algs.push_back(Dx * (P(1, j) - P(0, j)) / hx - Da * cbar * pbar);
    } else {
      algs.push_back((P(1, j) - P(0, j)) / hx);
    }
  }
  for (std::size_t j = 1; j <= M; ++j) {
    algs.push_back(Dx * ((C(N + 1, j) + C(N, j)) / two) * ((P(N + 1, j) - P(N, j)) / hx) - delta);
  }
  for (std::size_t i = 1; i <= N; ++i) algs.push_back((P(i, 1) - P(i, 0)) / hy);
  for (std::size_t i = 1; i <= N; ++i) algs.push_back((P(i, M + 1) - P(i, M)) / hy);

  ValueVector init(total, 0.0);
  for (std::size_t j = 1; j <= M; ++j) {
    for (std::size_t i = 0; i <= N + 1; ++i) init[c.at(i, j)] = 1.0;
  }
  for (std::size_t i = 1; i <= N; ++i) {
    init[c.at(i, 0)] = 1.0;
    init[c.at(i, M + 1)] = 1.0;
  }

  ParameterMap params{{"Dx", prm.Dx}, {"Dy", prm.Dy}, {"Da", prm.Da}, {"delta", prm.delta}};
  Problem prob{"ex6",
               DaeSystem(std::move(odes), std::move(algs), std::move(names), std::move(init), std::move(params)),
               GridSpec{N, M, dx, dy},
               {}, {}};

  // x = L/2 on the y = 0 wall, and x = 0 at y = H/2.
  auto mid_x = [&](const Field2D& f, std::size_t j) {
    std::vector<std::pair<std::size_t, double>> terms;
    if (N % 2 == 0) {
      terms = {{f.at(N / 2, j), 0.5}, {f.at(N / 2 + 1, j), 0.5}};
    } else {
      terms = {{f.at((N + 1) / 2, j), 1.0}};
    }
    return terms;
  };
  auto wall_average = [&](const Field2D& f) {
    std::vector<std::pair<std::size_t, double>> terms;
    for (auto [k, w] : mid_x(f, 0)) terms.emplace_back(k, 0.5 * w);
    for (auto [k, w] : mid_x(f, 1)) terms.emplace_back(k, 0.5 * w);
    return terms;
  };
  auto electrode_edge = [&](const Field2D& f) {
    return std::vector<std::pair<std::size_t, double>>{
        {f.at(0, M / 2), 0.25}, {f.at(1, M / 2), 0.25}, {f.at(0, M / 2 + 1), 0.25}, {f.at(1, M / 2 + 1), 0.25}};
  };
  prob.observables.push_back({"c_xmid_y0", wall_average(c)});
  prob.observables.push_back({"phi_xmid_y0", wall_average(p)});
  prob.observables.push_back({"c_x0_ymid", electrode_edge(c)});
  prob.observables.push_back({"phi_x0_ymid", electrode_edge(p)});
  return prob;
}

std::vector<std::string> builtin_problem_ids() { return {"ex1", "ex2", "ex3", "ex4", "ex5", "ex6"}; }

Problem make_problem(std::string_view id, const ProblemConfig& cfg) {
  if (id == "ex1") return example1();
  if (id == "ex2") return example2(cfg.mu);
  if (id == "ex3") return example3();
  if (id == "decay") return linear_decay(cfg.lambda);
  if (id == "ex4") return example4(cfg.N ? cfg.N : 128);
  if (id == "ex5") {
    const std::size_t n = cfg.N ? cfg.N : 64;
    return example5(n, cfg.M ? cfg.M : n, cfg.phi);
  }
  if (id == "ex6") {
    const std::size_t n = cfg.N ? cfg.N : 64;
    return example6(n, cfg.M ? cfg.M : 2 * n, cfg.ex6);
  }
  throw InvalidOptions("unknown problem '" + std::string(id) + "' (expected ex1..ex6 or decay)");
}

double probe(const Problem& problem, std::span<const double> state, std::string_view name) {
  if (state.size() != problem.system.size()) throw DimensionMismatch("state length does not match the problem");
  for (const auto& obs : problem.observables) {
    if (obs.name != name) continue;
    double v = 0.0;
    for (auto [k, w] : obs.terms) v += w * state[k];
    return v;
  }
  const auto& names = problem.system.var_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it != names.end()) return state[static_cast<std::size_t>(it - names.begin())];
  throw UnknownObservable("no observable or variable named '" + std::string(name) + "' in " + problem.id);
}

std::vector<std::string> observable_names(const Problem& problem) {
  std::vector<std::string> out;
  for (const auto& o : problem.observables) out.push_back(o.name);
  return out;
}

}  // namespace sparsedae
