#include "sparsedae/sparse_jacobian.hpp"

#include <algorithm>

#include "sparsedae/errors.hpp"

namespace sparsedae {

namespace {

NonFinite entry_error(std::size_t row, std::size_t col, const std::exception& e) {
  return NonFinite("Jacobian entry (" + std::to_string(row + 1) + ", " + std::to_string(col + 1) + "): " + e.what());
}

const Expr& zero_expr() {
  static const Expr zero;
  return zero;
}

}  // namespace

std::size_t SparsityPattern::nnz() const noexcept {
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  return total;
}

bool SparsityPattern::contains(std::size_t row, std::size_t col) const {
  const auto& r = rows.at(row);
  return std::binary_search(r.begin(), r.end(), col);
}

SparseMatrix SparsityPattern::to_matrix() const {
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(nnz());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t k : rows[i]) t.push_back({i, k, 0.0});
  }
  return SparseMatrix::from_triplets(n, t);
}

SparsityPattern detect_pattern(std::span<const Expr> residuals) {
  SparsityPattern p;
  p.n = residuals.size();
  p.rows.reserve(p.n);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    auto support = free_unknowns(residuals[i]);
    if (support.empty()) throw EmptyRow(i);
    if (support.back() >= p.n) {
      throw DimensionMismatch("residual row " + std::to_string(i + 1) + " references unknown " +
                              std::to_string(support.back() + 1) + " of " + std::to_string(p.n));
    }
    p.rows.push_back(std::move(support));
  }
  return p;
}

SparsityPattern detect_pattern(const MethodResidual& res) { return detect_pattern(res.residuals()); }

const Expr& SymbolicJacobian::entry(std::size_t row, std::size_t col) const {
  const auto& r = pattern.rows.at(row);
  auto it = std::lower_bound(r.begin(), r.end(), col);
  if (it == r.end() || *it != col) return zero_expr();
  return entries[row][static_cast<std::size_t>(it - r.begin())];
}

SymbolicJacobian differentiate(std::span<const Expr> residuals, const SparsityPattern& pattern) {
  if (residuals.size() != pattern.rows.size()) throw DimensionMismatch("pattern does not match the residual set");
  SymbolicJacobian jac;
  jac.pattern = pattern;
  jac.entries.resize(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    jac.entries[i].reserve(pattern.rows[i].size());
    for (std::size_t k : pattern.rows[i]) jac.entries[i].push_back(diff(residuals[i], k));
  }
  return jac;
}

SymbolicJacobian differentiate(const MethodResidual& res, const SparsityPattern& pattern) {
  return differentiate(res.residuals(), pattern);
}

SparseMatrix assemble(const SymbolicJacobian& jac, std::span<const double> uu, const ParameterMap& bindings) {
  SparseMatrix m = jac.pattern.to_matrix();
  auto& values = m.values();
  const auto& cp = m.col_ptr();
  const auto& ri = m.row_idx();
  for (std::size_t i = 0; i < jac.pattern.rows.size(); ++i) {
    for (std::size_t p = 0; p < jac.pattern.rows[i].size(); ++p) {
      const std::size_t k = jac.pattern.rows[i][p];
      double v = 0.0;
      try {
        v = eval(jac.entries[i][p], uu, bindings);
      } catch (const NonFinite& e) {
        throw entry_error(i, k, e);
      }
      auto begin = ri.begin() + static_cast<std::ptrdiff_t>(cp[k]);
      auto pos = std::lower_bound(begin, ri.begin() + static_cast<std::ptrdiff_t>(cp[k + 1]), i);
      values[static_cast<std::size_t>(pos - ri.begin())] = v;
    }
  }
  return m;
}

JacobianAssembler::JacobianAssembler(const SymbolicJacobian& jac, const ParameterLayout& layout)
    : structure_(jac.pattern.to_matrix()) {
  const auto& cp = structure_.col_ptr();
  const auto& ri = structure_.row_idx();
  entries_.reserve(structure_.nnz());
  for (std::size_t i = 0; i < jac.pattern.rows.size(); ++i) {
    for (std::size_t p = 0; p < jac.pattern.rows[i].size(); ++p) {
      const std::size_t k = jac.pattern.rows[i][p];
      auto begin = ri.begin() + static_cast<std::ptrdiff_t>(cp[k]);
      auto pos = std::lower_bound(begin, ri.begin() + static_cast<std::ptrdiff_t>(cp[k + 1]), i);
      entries_.push_back({i, k, static_cast<std::size_t>(pos - ri.begin()),
                          CompiledExpr::compile(jac.entries[i][p], layout)});
    }
  }
}

SparseMatrix JacobianAssembler::assemble(std::span<const double> uu, std::span<const double> slots) const {
  SparseMatrix out = structure_;
  assemble_into(out, uu, slots);
  return out;
}

void JacobianAssembler::assemble_into(SparseMatrix& out, std::span<const double> uu,
                                      std::span<const double> slots) const {
  if (out.nnz() != structure_.nnz() || out.n() != structure_.n()) {
    throw DimensionMismatch("assembly target does not have the Jacobian structure");
  }
  auto& values = out.values();
  for (const auto& e : entries_) {
    try {
      values[e.position] = e.tape.eval(uu, slots);
    } catch (const NonFinite& err) {
      throw entry_error(e.row, e.col, err);
    }
  }
}

}  // namespace sparsedae
