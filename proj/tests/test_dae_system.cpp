#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>

#include "sparsedae/dae_system.hpp"
#include "sparsedae/errors.hpp"
#include "sparsedae/problems.hpp"

using namespace sparsedae;

namespace {

ValueVector residual_at(const MethodResidual& res, const ValueVector& uu, double h, const ValueVector& y0) {
  ValueVector out(res.size());
  res.evaluate(uu, res.bind(h, y0), out);
  return out;
}

// Solves the linear RAD residual of y' = lambda y from y0 = 1 and returns y1.
double radau_step(double z) {
  const DaeSystem sys({Expr::parameter("lambda") * Expr::unknown(0)}, {}, {"y"}, {1.0}, {{"lambda", z}});
  const MethodResidual res = build_residual(sys, Method::RAD);
  const ValueVector y0{1.0};
  const ValueVector r0 = residual_at(res, {0.0, 0.0}, 1.0, y0);
  const ValueVector c0 = residual_at(res, {1.0, 0.0}, 1.0, y0);
  const ValueVector c1 = residual_at(res, {0.0, 1.0}, 1.0, y0);
  const double a = c0[0] - r0[0], b = c1[0] - r0[0], c = c0[1] - r0[1], d = c1[1] - r0[1];
  const double det = a * d - b * c;
  const double uu0 = (-r0[0] * d + r0[1] * b) / det;
  return 1.0 + uu0;
}

}  // namespace

TEST_CASE("example 1 EB residual") {
  const MethodResidual res = build_residual(example1().system, Method::EB);
  REQUIRE(res.size() == 2);
  const ValueVector y0{0.2, 0.9};
  const ValueVector uu{0.01, -0.02};
  const double h = 0.1;
  const ValueVector r = residual_at(res, uu, h, y0);
  CHECK(r[0] == doctest::Approx(uu[0] - h * (uu[1] + y0[1])));
  CHECK(r[1] == doctest::Approx(std::pow(uu[0] + y0[0], 2) + std::pow(uu[1] + y0[1], 2) - 1.0));
}

TEST_CASE("example 1 RAD residual has two blocks") {
  const MethodResidual res = build_residual(example1().system, Method::RAD);
  REQUIRE(res.size() == 4);
  const ValueVector y0{0.2, 0.9};
  const ValueVector uu{0.01, -0.02, 0.03, 0.04};
  const double h = 0.1;
  const ValueVector r = residual_at(res, uu, h, y0);
  CHECK(r[0] == doctest::Approx(2.5 * uu[0] - 4.5 * uu[2] - h * (uu[1] + y0[1])));
  CHECK(r[1] == doctest::Approx(std::pow(uu[0] + y0[0], 2) + std::pow(uu[1] + y0[1], 2) - 1.0));
  CHECK(r[2] == doctest::Approx(0.5 * uu[0] + 1.5 * uu[2] - h * (uu[3] + y0[1])));
  CHECK(r[3] == doctest::Approx(std::pow(uu[2] + y0[0], 2) + std::pow(uu[3] + y0[1], 2) - 1.0));
}

TEST_CASE("CN and IMPTRAP residuals") {
  const Problem vdp = example2(2.0);
  const ValueVector y0{0.3, 1.7};
  const ValueVector uu{0.05, -0.01};
  const double h = 0.2;
  auto f = [](const ValueVector& s) {
    return ValueVector{2.0 * (1 - s[1] * s[1]) * s[0] - s[1], s[0]};
  };
  const ValueVector f0 = f(y0);
  const ValueVector f1 = f({y0[0] + uu[0], y0[1] + uu[1]});
  const ValueVector fm = f({y0[0] + uu[0] / 2, y0[1] + uu[1] / 2});

  const ValueVector cn = residual_at(build_residual(vdp.system, Method::CN), uu, h, y0);
  const ValueVector it = residual_at(build_residual(vdp.system, Method::IMPTRAP), uu, h, y0);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(cn[i] == doctest::Approx(uu[i] - h / 2 * f1[i] - h / 2 * f0[i]));
    CHECK(it[i] == doctest::Approx(uu[i] - h * fm[i]));
  }
}

TEST_CASE("pure ODE systems have no algebraic rows") {
  for (Method m : {Method::EB, Method::CN, Method::IMPTRAP, Method::RAD}) {
    const MethodResidual res = build_residual(example2().system, m);
    CHECK(res.size() == 2u * static_cast<std::size_t>(traits(m).multiplier));
  }
}

TEST_CASE("EB and CN agree when f is constant") {
  const DaeSystem sys({Expr(3.0), Expr(-1.0)}, {}, {"a", "b"}, {0.0, 0.0});
  const ValueVector y0{0.4, -0.2}, uu{0.1, 0.3};
  const ValueVector eb = residual_at(build_residual(sys, Method::EB), uu, 0.05, y0);
  const ValueVector cn = residual_at(build_residual(sys, Method::CN), uu, 0.05, y0);
  CHECK(eb[0] == doctest::Approx(cn[0]));
  CHECK(eb[1] == doctest::Approx(cn[1]));
}

TEST_CASE("a consistent state is a root at h = 0") {
  const ValueVector y{std::sin(0.3), std::cos(0.3)};
  for (Method m : {Method::EB, Method::CN, Method::IMPTRAP, Method::RAD}) {
    const MethodResidual res = initialization_residual(std::make_shared<const DaeSystem>(example1().system), m);
    const ValueVector r = residual_at(res, ValueVector(res.size(), 0.0), 0.0, y);
    for (double v : r) CHECK(std::abs(v) < 1e-15);
  }
}

TEST_CASE("RAD reproduces the RadauIIA stability function") {
  for (double z : {-1.0, -0.5, -0.1, 0.0, 0.3, 1.0}) {
    const double exact = (1 + z / 3) / (1 - 2 * z / 3 + z * z / 6);
    CHECK(std::abs(radau_step(z) - exact) < 1e-12);
  }
}

TEST_CASE("state_update") {
  CHECK(state_update(ValueVector{1, 2}, ValueVector{0.1, -0.2}, Method::EB) == ValueVector{1.1, 1.8});
  CHECK(state_update(ValueVector{0, 1}, ValueVector{0.5, 0.25, 7, 9}, Method::RAD) == ValueVector{0.5, 1.25});
  CHECK(state_update(ValueVector{3, 4}, ValueVector{0, 0}, Method::CN) == ValueVector{3, 4});
}

TEST_CASE("invalid systems") {
  CHECK_THROWS_AS(DaeSystem({Expr::unknown(5)}, {}, {"y"}, {0.0}), InvalidSystem);
  CHECK_THROWS_AS(DaeSystem({Expr::parameter("k")}, {}, {"y"}, {0.0}), InvalidSystem);
  CHECK_THROWS_AS(DaeSystem({Expr(1.0)}, {}, {"y", "z"}, {0.0}), InvalidSystem);
  CHECK_THROWS_AS(DaeSystem({Expr(1.0)}, {}, {"y"}, {0.0}, {{"h", 1.0}}), InvalidSystem);
  // g does not involve the algebraic variable
  const DaeSystem hidden({Expr::unknown(1)}, {Expr::unknown(0) - Expr(1.0)}, {"y", "z"}, {1.0, 0.0});
  CHECK_THROWS_AS(build_residual(hidden, Method::IMPTRAP), UnsupportedSystem);
  CHECK_THROWS_AS(build_residual(hidden, Method::CN), UnsupportedSystem);
  CHECK_THROWS_AS(parse_method("rk4"), InvalidOptions);
  CHECK(parse_method("rad") == Method::RAD);
}
