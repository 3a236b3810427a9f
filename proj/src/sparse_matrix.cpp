#include "sparsedae/sparse_matrix.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "sparsedae/errors.hpp"

namespace sparsedae {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

std::atomic<std::uint64_t> g_factorizations{0};

}  // namespace

SparseMatrix::SparseMatrix(std::size_t n, std::vector<std::size_t> col_ptr, std::vector<std::size_t> row_idx,
                           std::vector<double> values)
    : n_(n), col_ptr_(std::move(col_ptr)), row_idx_(std::move(row_idx)), values_(std::move(values)) {
  if (col_ptr_.size() != n_ + 1 || col_ptr_.front() != 0 || col_ptr_.back() != row_idx_.size() ||
      values_.size() != row_idx_.size()) {
    throw DimensionMismatch("inconsistent compressed-column arrays");
  }
  for (std::size_t j = 0; j < n_; ++j) {
    if (col_ptr_[j] > col_ptr_[j + 1]) throw DimensionMismatch("column pointers must be nondecreasing");
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) {
      if (row_idx_[p] >= n_) throw DimensionMismatch("row index out of range");
      if (p > col_ptr_[j] && row_idx_[p] <= row_idx_[p - 1]) {
        throw DimensionMismatch("row indices must be strictly ascending within a column");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t n, std::span<const Triplet> entries) {
  std::vector<Triplet> sorted(entries.begin(), entries.end());
  for (const auto& t : sorted) {
    if (t.row >= n || t.col >= n) throw DimensionMismatch("triplet index out of range");
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const Triplet& a, const Triplet& b) { return a.col != b.col ? a.col < b.col : a.row < b.row; });
  std::vector<std::size_t> col_ptr(n + 1, 0);
  std::vector<std::size_t> rows;
  std::vector<double> vals;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (k > 0 && sorted[k].row == sorted[k - 1].row && sorted[k].col == sorted[k - 1].col) {
      vals.back() += sorted[k].value;
      continue;
    }
    rows.push_back(sorted[k].row);
    vals.push_back(sorted[k].value);
    ++col_ptr[sorted[k].col + 1];
  }
  std::partial_sum(col_ptr.begin(), col_ptr.end(), col_ptr.begin());
  return SparseMatrix(n, std::move(col_ptr), std::move(rows), std::move(vals));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<std::size_t> cp(n + 1);
  std::iota(cp.begin(), cp.end(), std::size_t{0});
  std::vector<std::size_t> ri(n);
  std::iota(ri.begin(), ri.end(), std::size_t{0});
  return SparseMatrix(n, std::move(cp), std::move(ri), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_dense(std::size_t n, std::span<const double> row_major) {
  if (row_major.size() != n * n) throw DimensionMismatch("dense input must have n*n entries");
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (row_major[i * n + j] != 0.0) t.push_back({i, j, row_major[i * n + j]});
    }
  }
  return from_triplets(n, t);
}

double SparseMatrix::at(std::size_t row, std::size_t col) const {
  const auto begin = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_.at(col));
  const auto end = row_idx_.begin() + static_cast<std::ptrdiff_t>(col_ptr_.at(col + 1));
  auto it = std::lower_bound(begin, end, row);
  if (it == end || *it != row) return 0.0;
  return values_[static_cast<std::size_t>(it - row_idx_.begin())];
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw DimensionMismatch("vector length does not match matrix");
  std::vector<double> y(n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) y[row_idx_[p]] += values_[p] * x[j];
  }
  return y;
}

double SparseMatrix::norm_inf() const {
  std::vector<double> row_sum(n_, 0.0);
  for (std::size_t p = 0; p < row_idx_.size(); ++p) row_sum[row_idx_[p]] += std::abs(values_[p]);
  return row_sum.empty() ? 0.0 : *std::max_element(row_sum.begin(), row_sum.end());
}

std::vector<double> SparseMatrix::to_dense() const {
  std::vector<double> d(n_ * n_, 0.0);
  for (std::size_t j = 0; j < n_; ++j) {
    for (std::size_t p = col_ptr_[j]; p < col_ptr_[j + 1]; ++p) d[row_idx_[p] * n_ + j] = values_[p];
  }
  return d;
}

std::uint64_t SparseMatrix::pattern_fingerprint() const noexcept {
  // FNV-1a over the index arrays.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xffU;
      h *= 1099511628211ULL;
    }
  };
  mix(n_);
  for (auto v : col_ptr_) mix(v);
  for (auto v : row_idx_) mix(v);
  return h;
}

std::vector<std::size_t> fill_reducing_order(const SparseMatrix& a) {
  using EigenPattern = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  const auto n = static_cast<int>(a.n());
  EigenPattern pattern(n, n);
  pattern.reserve(static_cast<Eigen::Index>(a.nnz()));
  std::vector<Eigen::Triplet<double, int>> trips;
  trips.reserve(a.nnz());
  for (std::size_t j = 0; j < a.n(); ++j) {
    for (std::size_t p = a.col_ptr()[j]; p < a.col_ptr()[j + 1]; ++p) {
      trips.emplace_back(static_cast<int>(a.row_idx()[p]), static_cast<int>(j), 1.0);
    }
  }
  pattern.setFromTriplets(trips.begin(), trips.end());
  Eigen::AMDOrdering<int>::PermutationType perm;
  Eigen::AMDOrdering<int> amd;
  amd(pattern, perm);
  std::vector<std::size_t> order(a.n());
  for (int k = 0; k < n; ++k) order[static_cast<std::size_t>(k)] = static_cast<std::size_t>(perm.indices()(k));
  return order;
}

// ---------------------------------------------------------------------------

std::size_t Factorization::factor_nnz() const noexcept {
  if (dense_) return n_ * n_;
  return (li_.size() - n_) + ui_.size();
}

std::vector<double> Factorization::solve(std::span<const double> b) const {
  if (b.size() != n_) {
    throw DimensionMismatch("right-hand side has length " + std::to_string(b.size()) + ", expected " +
                            std::to_string(n_));
  }
  std::vector<double> x(b.begin(), b.end());
  std::vector<double> work(n_);
  solve_in_place(x, work);
  return x;
}

void Factorization::solve_in_place(std::span<double> x, std::span<double> work) const {
  if (x.size() != n_ || work.size() < n_) throw DimensionMismatch("solve with mismatched vector lengths");
  const std::size_t n = n_;
  if (dense_) {
    for (std::size_t i = 0; i < n; ++i) work[i] = x[q_[i]];  // q_ holds the row permutation here
    for (std::size_t i = 0; i < n; ++i) {
      double s = work[i];
      for (std::size_t j = 0; j < i; ++j) s -= lu_[i * n + j] * work[j];
      work[i] = s;
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = work[ii];
      for (std::size_t j = ii + 1; j < n; ++j) s -= lu_[ii * n + j] * work[j];
      work[ii] = s / lu_[ii * n + ii];
    }
    std::copy(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(n), x.begin());
    return;
  }
  for (std::size_t i = 0; i < n; ++i) work[pinv_[i]] = x[i];
  for (std::size_t k = 0; k < n; ++k) {
    const double wk = work[k];
    if (wk == 0.0) continue;
    for (std::size_t p = lp_[k] + 1; p < lp_[k + 1]; ++p) work[li_[p]] -= lx_[p] * wk;
  }
  for (std::size_t k = n; k-- > 0;) {
    const std::size_t diag = up_[k + 1] - 1;
    work[k] /= ux_[diag];
    const double wk = work[k];
    if (wk == 0.0) continue;
    for (std::size_t p = up_[k]; p < diag; ++p) work[ui_[p]] -= ux_[p] * wk;
  }
  for (std::size_t k = 0; k < n; ++k) x[q_[k]] = work[k];
}

namespace {

std::vector<double> column_max(const SparseMatrix& a) {
  std::vector<double> m(a.n(), 0.0);
  for (std::size_t j = 0; j < a.n(); ++j) {
    for (std::size_t p = a.col_ptr()[j]; p < a.col_ptr()[j + 1]; ++p) m[j] = std::max(m[j], std::abs(a.values()[p]));
  }
  return m;
}

}  // namespace

Factorization factorize(const SparseMatrix& a, std::span<const std::size_t> column_order) {
  g_factorizations.fetch_add(1, std::memory_order_relaxed);
  const std::size_t n = a.n();
  Factorization f;
  f.n_ = n;
  f.fingerprint_ = a.pattern_fingerprint();
  const auto cmax = column_max(a);

  if (n <= kDenseLimit) {
    f.dense_ = true;
    f.lu_ = a.to_dense();
    f.q_.resize(n);
    std::iota(f.q_.begin(), f.q_.end(), std::size_t{0});
    auto& m = f.lu_;
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t piv = k;
      double best = std::abs(m[k * n + k]);
      for (std::size_t i = k + 1; i < n; ++i) {
        if (std::abs(m[i * n + k]) > best) {
          best = std::abs(m[i * n + k]);
          piv = i;
        }
      }
      if (best == 0.0 || best < kSingularPivotRatio * cmax[k]) throw SingularMatrix(k);
      if (piv != k) {
        std::swap_ranges(m.begin() + static_cast<std::ptrdiff_t>(k * n),
                         m.begin() + static_cast<std::ptrdiff_t>((k + 1) * n),
                         m.begin() + static_cast<std::ptrdiff_t>(piv * n));
        std::swap(f.q_[k], f.q_[piv]);
      }
      const double d = m[k * n + k];
      for (std::size_t i = k + 1; i < n; ++i) {
        const double l = m[i * n + k] / d;
        m[i * n + k] = l;
        if (l == 0.0) continue;
        for (std::size_t j = k + 1; j < n; ++j) m[i * n + j] -= l * m[k * n + j];
      }
    }
    return f;
  }

  // Left-looking sparse LU (Gilbert-Peierls): column k of L and U comes from a
  // sparse triangular solve with the columns of L computed so far.
  std::vector<std::size_t> order;
  if (column_order.empty()) {
    order = fill_reducing_order(a);
  } else {
    if (column_order.size() != n) throw DimensionMismatch("column order length does not match matrix");
    order.assign(column_order.begin(), column_order.end());
  }
  const auto& ap = a.col_ptr();
  const auto& ai = a.row_idx();
  const auto& ax = a.values();

  auto& lp = f.lp_;
  auto& li = f.li_;
  auto& lx = f.lx_;
  auto& up = f.up_;
  auto& ui = f.ui_;
  auto& ux = f.ux_;
  lp.assign(n + 1, 0);
  up.assign(n + 1, 0);
  li.reserve(4 * a.nnz() + n);
  lx.reserve(4 * a.nnz() + n);
  ui.reserve(4 * a.nnz() + n);
  ux.reserve(4 * a.nnz() + n);
  f.pinv_.assign(n, kNone);
  auto& pinv = f.pinv_;

  std::vector<double> x(n, 0.0);
  std::vector<std::size_t> xi(n);      // reach, stored in xi[top..n)
  std::vector<std::size_t> stack(n);   // DFS node stack
  std::vector<std::size_t> pstack(n);  // DFS resume positions
  std::vector<std::size_t> mark(n, kNone);

  for (std::size_t k = 0; k < n; ++k) {
    lp[k] = li.size();
    up[k] = ui.size();
    const std::size_t col = order[k];

    // Nonzero pattern of L \ A(:,col) by depth-first search through L.
    std::size_t top = n;
    for (std::size_t p = ap[col]; p < ap[col + 1]; ++p) {
      const std::size_t start = ai[p];
      if (mark[start] == k) continue;
      std::size_t head = 0;
      stack[0] = start;
      while (true) {
        const std::size_t j = stack[head];
        const std::size_t jcol = pinv[j];
        if (mark[j] != k) {
          mark[j] = k;
          pstack[head] = jcol == kNone ? 0 : lp[jcol];
        }
        bool done = true;
        const std::size_t pend = jcol == kNone ? 0 : lp[jcol + 1];
        for (std::size_t q = pstack[head]; q < pend; ++q) {
          const std::size_t i = li[q];
          if (mark[i] == k) continue;
          pstack[head] = q + 1;
          stack[++head] = i;
          done = false;
          break;
        }
        if (done) {
          xi[--top] = j;
          if (head == 0) break;
          --head;
        }
      }
    }

    for (std::size_t p = ap[col]; p < ap[col + 1]; ++p) x[ai[p]] = ax[p];
    for (std::size_t px = top; px < n; ++px) {
      const std::size_t j = xi[px];
      const std::size_t jcol = pinv[j];
      if (jcol == kNone) continue;
      const double xj = x[j];
      if (xj == 0.0) continue;
      for (std::size_t q = lp[jcol] + 1; q < lp[jcol + 1]; ++q) x[li[q]] -= lx[q] * xj;
    }

    std::size_t ipiv = kNone;
    double best = -1.0;
    for (std::size_t px = top; px < n; ++px) {
      const std::size_t i = xi[px];
      if (pinv[i] == kNone) {
        const double t = std::abs(x[i]);
        if (t > best) {
          best = t;
          ipiv = i;
        }
      } else {
        ui.push_back(pinv[i]);
        ux.push_back(x[i]);
      }
    }
    if (ipiv == kNone || best == 0.0 || best < kSingularPivotRatio * cmax[col]) throw SingularMatrix(col);
    // Ties go to the diagonal entry.
    if (pinv[col] == kNone && std::abs(x[col]) >= best) ipiv = col;

    const double pivot = x[ipiv];
    ui.push_back(k);
    ux.push_back(pivot);
    pinv[ipiv] = k;
    li.push_back(ipiv);
    lx.push_back(1.0);
    for (std::size_t px = top; px < n; ++px) {
      const std::size_t i = xi[px];
      if (pinv[i] == kNone) {
        li.push_back(i);
        lx.push_back(x[i] / pivot);
      }
      x[i] = 0.0;
    }
  }
  lp[n] = li.size();
  up[n] = ui.size();
  for (auto& r : li) r = pinv[r];
  f.q_ = std::move(order);
  return f;
}

std::uint64_t factorization_count() noexcept { return g_factorizations.load(std::memory_order_relaxed); }

// ---------------------------------------------------------------------------

void write_matrix_market(std::ostream& os, const SparseMatrix& a, bool pattern_only) {
  os << "%%MatrixMarket matrix coordinate " << (pattern_only ? "pattern" : "real") << " general\n";
  os << a.n() << ' ' << a.n() << ' ' << a.nnz() << '\n';
  const auto old_precision = os.precision(17);
  for (std::size_t j = 0; j < a.n(); ++j) {
    for (std::size_t p = a.col_ptr()[j]; p < a.col_ptr()[j + 1]; ++p) {
      os << a.row_idx()[p] + 1 << ' ' << j + 1;
      if (!pattern_only) os << ' ' << a.values()[p];
      os << '\n';
    }
  }
  os.precision(old_precision);
}

SparseMatrix read_matrix_market(std::istream& is) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw ParseError("empty Matrix Market stream");
  ++line_no;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || object != "matrix" || format != "coordinate") {
    throw ParseError("expected a coordinate Matrix Market header", line_no);
  }
  const bool pattern = field == "pattern";
  if (!pattern && field != "real" && field != "integer") throw ParseError("unsupported field '" + field + "'", line_no);
  const bool symmetric = symmetry == "symmetric";
  if (!symmetric && symmetry != "general") throw ParseError("unsupported symmetry '" + symmetry + "'", line_no);

  std::size_t rows = 0, cols = 0, entries = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    if (!(ss >> rows >> cols >> entries)) throw ParseError("malformed size line", line_no);
    break;
  }
  if (rows != cols) throw ParseError("matrix must be square", line_no);
  std::vector<SparseMatrix::Triplet> t;
  t.reserve(symmetric ? 2 * entries : entries);
  while (t.size() < entries * (symmetric ? 2 : 1) && std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '%') continue;
    std::istringstream ss(line);
    std::size_t i = 0, j = 0;
    double v = 1.0;
    if (!(ss >> i >> j) || (!pattern && !(ss >> v))) throw ParseError("malformed entry", line_no);
    if (i == 0 || j == 0 || i > rows || j > cols) throw ParseError("entry index out of range", line_no);
    t.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) t.push_back({j - 1, i - 1, v});
    if (!symmetric) continue;
  }
  return SparseMatrix::from_triplets(rows, t);
}

}  // namespace sparsedae
