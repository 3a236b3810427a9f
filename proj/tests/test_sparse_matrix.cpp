#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sparsedae/errors.hpp"
#include "sparsedae/sparse_matrix.hpp"

using namespace sparsedae;

namespace {

// Plain Gaussian elimination with partial pivoting on a row-major copy.
std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
    for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double m = a[i * n + k] / a[k * n + k];
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= m * a[k * n + j];
      b[i] -= m * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * x[j];
    x[i] = s / a[i * n + i];
  }
  return x;
}

SparseMatrix random_sparse(std::size_t n, std::mt19937& rng, double density) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  std::vector<SparseMatrix::Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || !keep(rng)) continue;
      const double v = val(rng);
      row_sum += std::abs(v);
      t.push_back({i, j, v});
    }
    t.push_back({i, i, row_sum + 1.0});
  }
  return SparseMatrix::from_triplets(n, t);
}

double residual_inf(const SparseMatrix& a, const std::vector<double>& x, const std::vector<double>& b) {
  const auto ax = a.multiply(x);
  double r = 0.0;
  for (std::size_t i = 0; i < b.size(); ++i) r = std::max(r, std::abs(ax[i] - b[i]));
  return r;
}

}  // namespace

TEST_CASE("identity and diagonal solves") {
  const auto f = factorize(SparseMatrix::identity(5));
  const std::vector<double> b{1, -2, 3, 0.5, 7};
  CHECK(f.solve(b) == b);
  CHECK(factorize(SparseMatrix::identity(2)).solve(std::vector<double>{3, -1}) == std::vector<double>{3, -1});
  const std::vector<double> d{2, 0, 0, 4};
  const auto x = factorize(SparseMatrix::from_dense(2, d)).solve(std::vector<double>{2, 8});
  CHECK(x[0] == doctest::Approx(1.0));
  CHECK(x[1] == doctest::Approx(2.0));
}

TEST_CASE("pivoting handles a zero diagonal") {
  const std::vector<double> swap{0, 1, 1, 0};
  const auto x = factorize(SparseMatrix::from_dense(2, swap)).solve(std::vector<double>{1, 2});
  CHECK(x == std::vector<double>{2, 1});
}

TEST_CASE("tridiagonal system matches the Thomas algorithm") {
  for (std::size_t n : {10u, 300u}) {
    std::vector<SparseMatrix::Triplet> t;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back({i, i, 2.0});
      if (i > 0) t.push_back({i, i - 1, -1.0});
      if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    const auto f = factorize(SparseMatrix::from_triplets(n, t));
    CHECK(f.dense() == (n <= kDenseLimit));
    const auto x = f.solve(std::vector<double>(n, 1.0));

    std::vector<double> c(n), d(n), y(n);
    c[0] = -1.0 / 2.0;
    d[0] = 1.0 / 2.0;
    for (std::size_t i = 1; i < n; ++i) {
      const double m = 2.0 + c[i - 1];
      c[i] = -1.0 / m;
      d[i] = (1.0 + d[i - 1]) / m;
    }
    y[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) y[i] = d[i] - c[i] * y[i + 1];
    double scale = 0.0;
    for (double v : y) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(x[i] - y[i]) <= 1e-12 * scale);
  }
}

TEST_CASE("random sparse systems agree with dense elimination") {
  std::mt19937 rng(2024);
  for (std::size_t n : {50u, 200u}) {
    const SparseMatrix a = random_sparse(n, rng, n == 50 ? 0.1 : 0.02);
    const auto f = factorize(a);
    std::normal_distribution<double> g;
    for (int rhs = 0; rhs < 20; ++rhs) {
      std::vector<double> b(n);
      for (double& v : b) v = g(rng);
      const auto x = f.solve(b);
      CHECK(residual_inf(a, x, b) <= 1e-10);
      const auto oracle = dense_solve(a.to_dense(), b);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(x[i] - oracle[i]) <= 1e-10);
    }
  }
}

TEST_CASE("sparse path pivots across rows") {
  // Permuted diagonal plus a weak diagonal: forces off-diagonal pivots.
  const std::size_t n = 120;
  std::vector<SparseMatrix::Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, (i + 7) % n, 5.0 + static_cast<double>(i % 3)});
    t.push_back({i, i, 1e-3});
  }
  const SparseMatrix a = SparseMatrix::from_triplets(n, t);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = std::sin(static_cast<double>(i));
  const auto x = factorize(a).solve(b);
  CHECK(residual_inf(a, x, b) <= 1e-12);
}

TEST_CASE("singular matrices are reported") {
  const std::vector<double> rank1{1, 2, 2, 4};
  CHECK_THROWS_AS(factorize(SparseMatrix::from_dense(2, rank1)), SingularMatrix);
  const std::size_t n = 100;
  std::vector<SparseMatrix::Triplet> t;
  for (std::size_t i = 0; i + 1 < n; ++i) t.push_back({i, i, 1.0});
  CHECK_THROWS_AS(factorize(SparseMatrix::from_triplets(n, t)), SingularMatrix);
}

TEST_CASE("factorization counter advances") {
  const auto before = factorization_count();
  factorize(SparseMatrix::identity(3));
  CHECK(factorization_count() >= before + 1);
}

TEST_CASE("matrix market round trip") {
  std::mt19937 rng(3);
  const SparseMatrix a = random_sparse(30, rng, 0.1);
  std::stringstream ss;
  write_matrix_market(ss, a);
  const SparseMatrix b = read_matrix_market(ss);
  CHECK(b.pattern_fingerprint() == a.pattern_fingerprint());
  CHECK(b.values() == a.values());

  std::stringstream sym("%%MatrixMarket matrix coordinate real symmetric\n3 3 2\n1 1 4\n3 1 -1\n");
  const SparseMatrix s = read_matrix_market(sym);
  CHECK(s.at(0, 2) == -1.0);
  CHECK(s.at(2, 0) == -1.0);
  std::stringstream bad("%%MatrixMarket matrix array real general\n");
  CHECK_THROWS_AS(read_matrix_market(bad), ParseError);
}

TEST_CASE("triplets sum duplicates and validate indices") {
  std::vector<SparseMatrix::Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}, {1, 1, 1.0}};
  CHECK(SparseMatrix::from_triplets(2, t).at(0, 0) == 3.0);
  std::vector<SparseMatrix::Triplet> out_of_range{{2, 0, 1.0}};
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, out_of_range), DimensionMismatch);
}
