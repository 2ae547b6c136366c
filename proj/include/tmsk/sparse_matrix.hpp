#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

namespace tmsk {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Symmetric sparse matrix. Only the upper triangle is logically owned;
/// both triangles are kept in compressed-row form so that rows can be
/// scanned without a transpose.
class SparseSymMatrix {
 public:
  SparseSymMatrix() = default;
  explicit SparseSymMatrix(std::size_t n);

  // Entries with row <= col, no duplicates. Exact zeros are skipped.
  static SparseSymMatrix from_upper(std::size_t n, std::vector<Triplet> upper);

  std::size_t order() const { return n_; }
  // Number of stored entries with row <= col.
  std::size_t stored() const { return stored_; }
  // Number of nonzeros of the full symmetric matrix.
  std::size_t nnz() const { return cols_.size(); }

  double at(std::size_t i, std::size_t j) const;
  bool contains(std::size_t i, std::size_t j) const;

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {cols_.data() + ptr_[i], ptr_[i + 1] - ptr_[i]};
  }
  std::span<const double> row_vals(std::size_t i) const {
    return {vals_.data() + ptr_[i], ptr_[i + 1] - ptr_[i]};
  }

  std::vector<Triplet> upper_entries() const;
  std::vector<double> multiply(std::span<const double> x) const;
  SparseSymMatrix plus_diagonal(std::span<const double> diag) const;

 private:
  std::size_t n_ = 0;
  std::size_t stored_ = 0;
  std::vector<std::size_t> ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> vals_;
};

/// Accumulates symmetric contributions (i, j, v). Each entry keeps the sum
/// and the total absolute mass of its terms; on finalize an entry is dropped
/// when |sum| <= drop_relative * mass, i.e. when the terms cancelled to
/// roundoff.
class SymmetricBuilder {
 public:
  explicit SymmetricBuilder(std::size_t n);
  void add(std::size_t i, std::size_t j, double v);
  std::size_t order() const { return n_; }
  SparseSymMatrix finalize(double drop_relative) const;

 private:
  std::size_t n_;
  std::unordered_map<std::uint64_t, std::pair<double, double>> acc_;
};

struct SparseVector {
  std::size_t n = 0;
  std::vector<std::size_t> idx;  // strictly increasing
  std::vector<double> val;

  std::size_t nnz() const { return idx.size(); }
  double dot(std::span<const double> dense) const;
  std::vector<double> to_dense() const;
};

// Same cancellation rule as SymmetricBuilder, for vectors.
class VectorAccumulator {
 public:
  explicit VectorAccumulator(std::size_t n) : n_(n) {}
  void add(std::size_t i, double v);
  SparseVector finalize(double drop_relative) const;

 private:
  std::size_t n_;
  std::unordered_map<std::size_t, std::pair<double, double>> acc_;
};

/// Lower-triangular factor in compressed-column form, diagonal stored first
/// in each column.
class LowerTriangularFactor {
 public:
  LowerTriangularFactor() = default;
  LowerTriangularFactor(std::size_t n, std::vector<std::size_t> colptr, std::vector<std::size_t> rows,
                        std::vector<double> vals);
  // Row-major n x n input; entries above the diagonal are ignored.
  static LowerTriangularFactor from_dense(std::size_t n, std::span<const double> a);

  std::size_t order() const { return n_; }
  std::size_t nnz() const { return rows_.size(); }
  double at(std::size_t i, std::size_t j) const;

  const std::vector<std::size_t>& colptr() const { return colptr_; }
  const std::vector<std::size_t>& rows() const { return rows_; }
  const std::vector<double>& values() const { return vals_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> colptr_{0};
  std::vector<std::size_t> rows_;
  std::vector<double> vals_;
};

/// Up-looking sparse Cholesky in the given (natural) ordering.
/// Throws NotPositiveDefiniteError on a nonpositive pivot.
LowerTriangularFactor sparse_cholesky(const SparseSymMatrix& m);

// L y = rhs.
std::vector<double> solve_lower(const LowerTriangularFactor& l, std::span<const double> rhs);
// L^T y = rhs.
std::vector<double> solve_upper(const LowerTriangularFactor& l, std::span<const double> rhs);

struct SparsityReport {
  std::size_t n = 0;
  std::size_t nnz = 0;
  double density = 0.0;
};

SparsityReport sparsity_report(const SparseSymMatrix& m);

}  // namespace tmsk
