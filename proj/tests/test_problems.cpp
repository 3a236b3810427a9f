#include <doctest.h>

#include <cmath>

#include "sparsedae/errors.hpp"
#include "sparsedae/problems.hpp"
#include "sparsedae/stepper.hpp"

using namespace sparsedae;

TEST_CASE("system sizes") {
  CHECK(example4(128).system.size() == 260);
  CHECK(example4(256).system.size() == 516);
  CHECK(example5(64, 64).system.size() == 4352);
  CHECK(example5(8, 4).system.size() == 8 * 4 + 2 * 8 + 2 * 4);
  CHECK(example6(64, 128).system.size() == 17152);
  CHECK(example6(4, 8).system.size() == 2 * 4 * 8 + 4 * 4 + 4 * 8);
}

TEST_CASE("small examples") {
  const Problem p1 = example1();
  CHECK(p1.system.ode_count() == 1);
  CHECK(p1.system.alg_count() == 1);
  CHECK(p1.system.initial() == ValueVector{0.0, 0.95});
  const Problem p2 = example2();
  CHECK(p2.system.alg_count() == 0);
  CHECK(p2.system.initial() == ValueVector{0.0, 2.0});
  CHECK(p2.system.params().at("mu") == 2.0);
  CHECK(example3().system.initial() == ValueVector{2.0, 1.0});
  CHECK(linear_decay(-2.0).exact(1.0)[0] == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("variable layout and names") {
  const Problem p4 = example4(4);
  CHECK(p4.system.ode_count() == 4);
  CHECK(p4.system.var_names()[0] == "c1");
  CHECK(p4.system.index_of("c0") == 4);
  CHECK(p4.system.index_of("z0") == 6);
  const Problem p5 = example5(3, 2);
  CHECK(p5.system.ode_count() == 6);
  CHECK(p5.system.var_names()[0] == "c[1,1]");
  CHECK(p5.system.var_names()[1] == "c[2,1]");
  const Problem p6 = example6(2, 4);
  CHECK(p6.system.ode_count() == 8);
  CHECK(p6.system.var_names()[8] == "phi[1,1]");
}

TEST_CASE("invalid grids") {
  CHECK_THROWS_AS(example4(0), InvalidGrid);
  CHECK_THROWS_AS(example5(0, 4), InvalidGrid);
  CHECK_THROWS_AS(example6(4, 3), InvalidGrid);
  CHECK_THROWS_AS(make_problem("ex9"), InvalidOptions);
}

TEST_CASE("probes") {
  const Problem p = example4(4);
  const ValueVector ones(p.system.size(), 1.0);
  CHECK(probe(p, ones, "c_x0") == 1.0);
  CHECK(probe(p, ones, "z5") == 1.0);
  CHECK_THROWS_AS(probe(p, ones, "nope"), UnknownObservable);
  CHECK(observable_names(example6(2, 4)).size() == 4);
}

TEST_CASE("example 4 steady probes") {
  // Late-time values; the two-cell averages at x = 0 have settled by t = 5.
  SolverOptions opt;
  opt.tf = 5.0;
  opt.atol = 1e-6;
  opt.hmax = 0.25;
  struct Case {
    std::size_t N;
    double c, z;
  };
  for (const Case& k : {Case{4, 0.708501773693253, -0.276198079090988}, Case{8, 0.706802805832433, -0.274160215413445}}) {
    const Problem p = example4(k.N);
    const Trajectory traj = integrate(p.system, opt);
    REQUIRE(traj.ok());
    CHECK(std::abs(probe(p, traj.final_state(), "c_x0") - k.c) < 1e-7);
    CHECK(std::abs(probe(p, traj.final_state(), "z_x0") - k.z) < 1e-7);
  }
}

TEST_CASE("example 5 without reaction relaxes to the boundary value") {
  SolverOptions opt;
  opt.tf = 10.0;
  opt.atol = 1e-6;
  opt.hmax = 1.0;
  opt.method = Method::RAD;
  const Problem p = example5(8, 8, 0.0);
  const Trajectory traj = integrate(p.system, opt);
  REQUIRE(traj.ok());
  CHECK(std::abs(probe(p, traj.final_state(), "c_x0_y0") - 1.0) <= 10 * opt.atol);
}

TEST_CASE("example 6 without current keeps c at one") {
  SolverOptions opt;
  opt.tf = 1.0;
  opt.atol = 1e-6;
  const Problem p = example6(4, 8, {1.0, 1.0, 0.0, 0.0});
  const Trajectory traj = integrate(p.system, opt);
  REQUIRE(traj.ok());
  for (std::size_t i = 0; i < p.system.size(); ++i)
    if (p.system.var_names()[i].starts_with("c[")) CHECK(std::abs(traj.final_state()[i] - 1.0) <= 10 * opt.atol);
}
