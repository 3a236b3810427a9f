#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparsedae/dae_system.hpp"
#include "sparsedae/expr.hpp"
#include "sparsedae/sparse_matrix.hpp"
#include "sparsedae/tape.hpp"

namespace sparsedae {

/// Row-wise support of a residual set: rows[i] = free_unknowns(residual i).
struct SparsityPattern {
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> rows;

  std::size_t nnz() const noexcept;
  bool contains(std::size_t row, std::size_t col) const;
  /// Same support in compressed-column form (values all zero).
  SparseMatrix to_matrix() const;
};

/// Throws EmptyRow for a row with no unknown.
SparsityPattern detect_pattern(const MethodResidual& res);
SparsityPattern detect_pattern(std::span<const Expr> residuals);

/// Analytic partials on the pattern; entries[i][p] = d residual_i / d u_{rows[i][p]}.
/// Entries that simplify to zero keep their slot.
struct SymbolicJacobian {
  SparsityPattern pattern;
  std::vector<std::vector<Expr>> entries;

  const Expr& entry(std::size_t row, std::size_t col) const;  // zero constant off the pattern
};

SymbolicJacobian differentiate(const MethodResidual& res, const SparsityPattern& pattern);
SymbolicJacobian differentiate(std::span<const Expr> residuals, const SparsityPattern& pattern);

/// Reference assembly through the tree evaluator. Throws NonFinite naming the
/// offending entry.
SparseMatrix assemble(const SymbolicJacobian& jac, std::span<const double> uu, const ParameterMap& bindings);

/// Compiled assembly for the stepping loop. The compressed-column structure is
/// built once; every assemble() call returns identical index arrays.
class JacobianAssembler {
 public:
  JacobianAssembler(const SymbolicJacobian& jac, const ParameterLayout& layout);

  std::size_t n() const noexcept { return structure_.n(); }
  std::size_t nnz() const noexcept { return structure_.nnz(); }

  SparseMatrix assemble(std::span<const double> uu, std::span<const double> slots) const;
  /// Overwrites the values of `out`, which must have come from assemble().
  void assemble_into(SparseMatrix& out, std::span<const double> uu, std::span<const double> slots) const;

 private:
  struct Entry {
    std::size_t row;
    std::size_t col;
    std::size_t position;  // index into the CSC value array
    CompiledExpr tape;
  };
  SparseMatrix structure_;
  std::vector<Entry> entries_;  // row-major
};

}  // namespace sparsedae
