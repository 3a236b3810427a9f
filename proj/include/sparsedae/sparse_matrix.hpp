#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace sparsedae {

/// Square compressed-column matrix with 0-based indices. Row indices are
/// strictly ascending within each column. Explicit zeros are legal entries.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  /// Validates the structure; throws DimensionMismatch on malformed input.
  SparseMatrix(std::size_t n, std::vector<std::size_t> col_ptr, std::vector<std::size_t> row_idx,
               std::vector<double> values);

  struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
  };
  /// Duplicates are summed.
  static SparseMatrix from_triplets(std::size_t n, std::span<const Triplet> entries);
  static SparseMatrix identity(std::size_t n);
  static SparseMatrix from_dense(std::size_t n, std::span<const double> row_major);

  std::size_t n() const noexcept { return n_; }
  std::size_t nnz() const noexcept { return row_idx_.size(); }
  const std::vector<std::size_t>& col_ptr() const noexcept { return col_ptr_; }
  const std::vector<std::size_t>& row_idx() const noexcept { return row_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }

  double at(std::size_t row, std::size_t col) const;  // 0 outside the pattern
  std::vector<double> multiply(std::span<const double> x) const;
  double norm_inf() const;
  std::vector<double> to_dense() const;  // row-major

  /// Hash of (n, col_ptr, row_idx); equal patterns give equal fingerprints.
  std::uint64_t pattern_fingerprint() const noexcept;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<std::size_t> row_idx_;
  std::vector<double> values_;
};

/// Fill-reducing column order: order[k] is the column eliminated at step k.
std::vector<std::size_t> fill_reducing_order(const SparseMatrix& a);

/// LU factors P A Q = L U with row partial pivoting. Immutable after
/// construction; solve may be called concurrently.
class Factorization {
 public:
  std::size_t n() const noexcept { return n_; }
  std::vector<double> solve(std::span<const double> b) const;
  /// In-place variant; `work` is scratch of length n.
  void solve_in_place(std::span<double> x, std::span<double> work) const;

  std::uint64_t pattern_fingerprint() const noexcept { return fingerprint_; }
  /// Nonzeros in L (excluding its unit diagonal) plus U.
  std::size_t factor_nnz() const noexcept;
  bool dense() const noexcept { return dense_; }

 private:
  friend Factorization factorize(const SparseMatrix& a, std::span<const std::size_t> column_order);

  std::size_t n_ = 0;
  std::uint64_t fingerprint_ = 0;
  bool dense_ = false;
  // Dense path: row-major LU with unit-lower L, row permutation in q_.
  std::vector<double> lu_;
  // Sparse path: column-compressed L (unit diagonal omitted) and U (diagonal last).
  std::vector<std::size_t> lp_, li_, up_, ui_;
  std::vector<double> lx_, ux_;
  std::vector<std::size_t> pinv_;  // original row -> pivot position
  std::vector<std::size_t> q_;     // pivot position -> original column
};

/// Matrices up to this size are factorized densely.
inline constexpr std::size_t kDenseLimit = 64;
/// A pivot is rejected when smaller than this times the largest magnitude in
/// the original column.
inline constexpr double kSingularPivotRatio = 1e-14;

/// Throws SingularMatrix (reporting the 0-based column) on a rejected pivot.
/// `column_order` is used for the sparse path when non-empty; otherwise a
/// fill-reducing order is computed.
Factorization factorize(const SparseMatrix& a, std::span<const std::size_t> column_order = {});

/// Number of factorize() calls made by this process.
std::uint64_t factorization_count() noexcept;

void write_matrix_market(std::ostream& os, const SparseMatrix& a, bool pattern_only = false);
SparseMatrix read_matrix_market(std::istream& is);

}  // namespace sparsedae
