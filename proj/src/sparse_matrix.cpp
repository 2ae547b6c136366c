#include "tmsk/sparse_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tmsk/errors.hpp"

namespace tmsk {

SparseSymMatrix::SparseSymMatrix(std::size_t n) : n_(n), ptr_(n + 1, 0) {}

SparseSymMatrix SparseSymMatrix::from_upper(std::size_t n, std::vector<Triplet> upper) {
  std::erase_if(upper, [](const Triplet& t) { return t.value == 0.0; });
  for (const auto& t : upper) {
    if (t.row > t.col || t.col >= n) throw InputError("from_upper: entry outside the upper triangle");
    if (!std::isfinite(t.value)) throw NumericalError("from_upper: non-finite entry");
  }
  std::sort(upper.begin(), upper.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  for (std::size_t k = 1; k < upper.size(); ++k) {
    if (upper[k].row == upper[k - 1].row && upper[k].col == upper[k - 1].col)
      throw InputError("from_upper: duplicate entry");
  }

  SparseSymMatrix m(n);
  m.stored_ = upper.size();
  std::vector<std::size_t> count(n, 0);
  for (const auto& t : upper) {
    ++count[t.row];
    if (t.row != t.col) ++count[t.col];
  }
  for (std::size_t i = 0; i < n; ++i) m.ptr_[i + 1] = m.ptr_[i] + count[i];
  m.cols_.resize(m.ptr_[n]);
  m.vals_.resize(m.ptr_[n]);
  std::vector<std::size_t> next(m.ptr_.begin(), m.ptr_.end() - 1);
  // Lower part of row i comes from columns i of earlier rows; visiting the
  // upper list in row order fills every row with ascending columns.
  for (const auto& t : upper) {
    if (t.row != t.col) {
      m.cols_[next[t.col]] = t.row;
      m.vals_[next[t.col]++] = t.value;
    }
  }
  for (const auto& t : upper) {
    m.cols_[next[t.row]] = t.col;
    m.vals_[next[t.row]++] = t.value;
  }
  return m;
}

double SparseSymMatrix::at(std::size_t i, std::size_t j) const {
  auto cols = row_cols(i);
  auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return row_vals(i)[static_cast<std::size_t>(it - cols.begin())];
}

bool SparseSymMatrix::contains(std::size_t i, std::size_t j) const {
  auto cols = row_cols(i);
  return std::binary_search(cols.begin(), cols.end(), j);
}

std::vector<Triplet> SparseSymMatrix::upper_entries() const {
  std::vector<Triplet> out;
  out.reserve(stored_);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t p = ptr_[i]; p < ptr_[i + 1]; ++p) {
      if (cols_[p] >= i) out.push_back({i, cols_[p], vals_[p]});
    }
  }
  return out;
}

std::vector<double> SparseSymMatrix::multiply(std::span<const double> x) const {
  if (x.size() != n_) throw InputError("multiply: size mismatch");
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t p = ptr_[i]; p < ptr_[i + 1]; ++p) s += vals_[p] * x[cols_[p]];
    y[i] = s;
  }
  return y;
}

SparseSymMatrix SparseSymMatrix::plus_diagonal(std::span<const double> diag) const {
  if (diag.size() != n_) throw InputError("plus_diagonal: size mismatch");
  auto upper = upper_entries();
  std::vector<bool> has(n_, false);
  for (auto& t : upper) {
    if (t.row == t.col) {
      t.value += diag[t.row];
      has[t.row] = true;
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    if (!has[i] && diag[i] != 0.0) upper.push_back({i, i, diag[i]});
  }
  return from_upper(n_, std::move(upper));
}

SymmetricBuilder::SymmetricBuilder(std::size_t n) : n_(n) {
  if (n > (std::size_t{1} << 32)) throw ResourceError("SymmetricBuilder: order too large");
}

void SymmetricBuilder::add(std::size_t i, std::size_t j, double v) {
  if (i > j) std::swap(i, j);
  if (j >= n_) throw InputError("SymmetricBuilder: index out of range");
  auto& e = acc_[static_cast<std::uint64_t>(i) * n_ + j];
  e.first += v;
  e.second += std::abs(v);
}

SparseSymMatrix SymmetricBuilder::finalize(double drop_relative) const {
  std::vector<Triplet> upper;
  upper.reserve(acc_.size());
  for (const auto& [key, e] : acc_) {
    if (std::abs(e.first) <= drop_relative * e.second) continue;
    upper.push_back({static_cast<std::size_t>(key / n_), static_cast<std::size_t>(key % n_), e.first});
  }
  return SparseSymMatrix::from_upper(n_, std::move(upper));
}

double SparseVector::dot(std::span<const double> dense) const {
  if (dense.size() != n) throw InputError("SparseVector::dot: size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) s += val[k] * dense[idx[k]];
  return s;
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> out(n, 0.0);
  for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = val[k];
  return out;
}

void VectorAccumulator::add(std::size_t i, double v) {
  if (i >= n_) throw InputError("VectorAccumulator: index out of range");
  auto& e = acc_[i];
  e.first += v;
  e.second += std::abs(v);
}

SparseVector VectorAccumulator::finalize(double drop_relative) const {
  std::vector<std::pair<std::size_t, double>> kept;
  kept.reserve(acc_.size());
  for (const auto& [i, e] : acc_) {
    if (std::abs(e.first) <= drop_relative * e.second) continue;
    kept.emplace_back(i, e.first);
  }
  std::sort(kept.begin(), kept.end());
  SparseVector v;
  v.n = n_;
  v.idx.reserve(kept.size());
  v.val.reserve(kept.size());
  for (const auto& [i, x] : kept) {
    v.idx.push_back(i);
    v.val.push_back(x);
  }
  return v;
}

LowerTriangularFactor::LowerTriangularFactor(std::size_t n, std::vector<std::size_t> colptr,
                                             std::vector<std::size_t> rows, std::vector<double> vals)
    : n_(n), colptr_(std::move(colptr)), rows_(std::move(rows)), vals_(std::move(vals)) {
  if (colptr_.size() != n_ + 1 || rows_.size() != vals_.size() || colptr_.back() != rows_.size())
    throw InputError("LowerTriangularFactor: inconsistent arrays");
  for (std::size_t j = 0; j < n_; ++j) {
    if (colptr_[j] >= colptr_[j + 1] || rows_[colptr_[j]] != j)
      throw InputError("LowerTriangularFactor: column " + std::to_string(j) + " lacks a leading diagonal");
  }
}

LowerTriangularFactor LowerTriangularFactor::from_dense(std::size_t n, std::span<const double> a) {
  if (a.size() != n * n) throw InputError("from_dense: size mismatch");
  std::vector<std::size_t> colptr{0};
  std::vector<std::size_t> rows;
  std::vector<double> vals;
  for (std::size_t j = 0; j < n; ++j) {
    rows.push_back(j);
    vals.push_back(a[j * n + j]);
    for (std::size_t i = j + 1; i < n; ++i) {
      if (a[i * n + j] != 0.0) {
        rows.push_back(i);
        vals.push_back(a[i * n + j]);
      }
    }
    colptr.push_back(rows.size());
  }
  return LowerTriangularFactor(n, std::move(colptr), std::move(rows), std::move(vals));
}

double LowerTriangularFactor::at(std::size_t i, std::size_t j) const {
  if (i < j) return 0.0;
  for (std::size_t p = colptr_[j]; p < colptr_[j + 1]; ++p) {
    if (rows_[p] == i) return vals_[p];
  }
  return 0.0;
}

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

std::vector<std::size_t> elimination_tree(const SparseSymMatrix& m) {
  const std::size_t n = m.order();
  std::vector<std::size_t> parent(n, kNone), ancestor(n, kNone);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i : m.row_cols(k)) {
      if (i >= k) break;
      while (i != kNone && i < k) {
        const std::size_t next = ancestor[i];
        ancestor[i] = k;
        if (next == kNone) parent[i] = k;
        i = next;
      }
    }
  }
  return parent;
}

// Nonzero pattern of row k of L (columns < k), in topological order at
// stack[top..n).
std::size_t row_pattern(const SparseSymMatrix& m, std::size_t k, const std::vector<std::size_t>& parent,
                        std::vector<std::size_t>& mark, std::vector<std::size_t>& stack) {
  const std::size_t n = m.order();
  std::size_t top = n;
  mark[k] = k;
  for (std::size_t i : m.row_cols(k)) {
    if (i >= k) break;
    std::size_t len = 0;
    while (mark[i] != k) {
      stack[len++] = i;
      mark[i] = k;
      i = parent[i];
    }
    while (len > 0) stack[--top] = stack[--len];
  }
  return top;
}

}  // namespace

LowerTriangularFactor sparse_cholesky(const SparseSymMatrix& m) {
  const std::size_t n = m.order();
  const auto parent = elimination_tree(m);
  std::vector<std::size_t> mark(n, kNone), stack(n);

  std::vector<std::size_t> count(n, 1);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t t = row_pattern(m, k, parent, mark, stack); t < n; ++t) ++count[stack[t]];
  }
  std::vector<std::size_t> colptr(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) colptr[j + 1] = colptr[j] + count[j];
  std::vector<std::size_t> rows(colptr[n]);
  std::vector<double> vals(colptr[n]);
  std::vector<std::size_t> fill(colptr.begin(), colptr.end() - 1);

  std::fill(mark.begin(), mark.end(), kNone);
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t top = row_pattern(m, k, parent, mark, stack);
    auto cols = m.row_cols(k);
    auto vs = m.row_vals(k);
    for (std::size_t p = 0; p < cols.size() && cols[p] <= k; ++p) x[cols[p]] = vs[p];
    double d = x[k];
    x[k] = 0.0;
    for (std::size_t t = top; t < n; ++t) {
      const std::size_t i = stack[t];
      const double lki = x[i] / vals[colptr[i]];
      x[i] = 0.0;
      for (std::size_t p = colptr[i] + 1; p < fill[i]; ++p) x[rows[p]] -= vals[p] * lki;
      d -= lki * lki;
      rows[fill[i]] = k;
      vals[fill[i]++] = lki;
    }
    if (!(d > 0.0) || !std::isfinite(d))
      throw NotPositiveDefiniteError("sparse_cholesky: nonpositive pivot " + std::to_string(d) + " at row " +
                                     std::to_string(k) + " of " + std::to_string(n));
    rows[fill[k]] = k;
    vals[fill[k]++] = std::sqrt(d);
  }
  return LowerTriangularFactor(n, std::move(colptr), std::move(rows), std::move(vals));
}

std::vector<double> solve_lower(const LowerTriangularFactor& l, std::span<const double> rhs) {
  const std::size_t n = l.order();
  if (rhs.size() != n) throw InputError("solve_lower: size mismatch");
  const auto& cp = l.colptr();
  const auto& r = l.rows();
  const auto& v = l.values();
  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t j = 0; j < n; ++j) {
    if (v[cp[j]] == 0.0) throw NumericalError("solve_lower: zero diagonal at " + std::to_string(j));
    x[j] /= v[cp[j]];
    const double xj = x[j];
    if (xj == 0.0) continue;
    for (std::size_t p = cp[j] + 1; p < cp[j + 1]; ++p) x[r[p]] -= v[p] * xj;
  }
  return x;
}

std::vector<double> solve_upper(const LowerTriangularFactor& l, std::span<const double> rhs) {
  const std::size_t n = l.order();
  if (rhs.size() != n) throw InputError("solve_upper: size mismatch");
  const auto& cp = l.colptr();
  const auto& r = l.rows();
  const auto& v = l.values();
  std::vector<double> x(rhs.begin(), rhs.end());
  for (std::size_t j = n; j-- > 0;) {
    double s = x[j];
    for (std::size_t p = cp[j] + 1; p < cp[j + 1]; ++p) s -= v[p] * x[r[p]];
    if (v[cp[j]] == 0.0) throw NumericalError("solve_upper: zero diagonal at " + std::to_string(j));
    x[j] = s / v[cp[j]];
  }
  return x;
}

SparsityReport sparsity_report(const SparseSymMatrix& m) {
  SparsityReport r;
  r.n = m.order();
  r.nnz = m.nnz();
  r.density = r.n == 0 ? 0.0 : static_cast<double>(r.nnz) / (static_cast<double>(r.n) * static_cast<double>(r.n));
  return r;
}

}  // namespace tmsk
