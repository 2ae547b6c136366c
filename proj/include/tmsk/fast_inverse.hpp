#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "tmsk/gm_kernels.hpp"
#include "tmsk/numeric_policy.hpp"
#include "tmsk/sparse_designs.hpp"
#include "tmsk/sparse_matrix.hpp"

namespace tmsk {

/// Tridiagonal inverse of the Gram matrix of a Gauss-Markov kernel on
/// strictly increasing points. Off-diagonal -1/cross(x_i, x_{i+1}); diagonal
/// cross(x_{i-1}, x_{i+1}) / (cross(x_{i-1}, x_i) cross(x_i, x_{i+1})) with
/// phantom end nodes in place of x_0 and x_{n+1}.
SparseSymMatrix inv_1d(const GaussMarkov1D& kern, std::span<const double> points);

/// K^{-1} k(x) on a one-dimensional design: at most two nonzeros, at the
/// nodes bracketing x.
SparseVector kinvk_1d(const GaussMarkov1D& kern, std::span<const double> points, double x);

/// Kronecker product of the component inverses; last dimension varies fastest.
SparseSymMatrix inv_lattice(const TMKernel& tm, const std::vector<std::vector<double>>& designs);
SparseVector kinvk_lattice(const TMKernel& tm, const std::vector<std::vector<double>>& designs,
                           std::span<const double> x);

/// Exact A^{-1} and A^{-1} k(x) on a classical sparse grid by the
/// combination technique over full-grid lattices. Rows follow the canonical
/// ordering of the grid's base block.
class SparseGridSolver {
 public:
  SparseGridSolver(const TMKernel& tm, const TruncatedSparseGrid& grid, NumericPolicy policy = {});

  std::size_t size() const { return n_; }
  std::size_t lattice_count() const { return plans_.size(); }

  SparseSymMatrix inverse() const;
  SparseVector solve_kernel_vector(std::span<const double> x) const;

 private:
  struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> off;
  };
  struct Lattice {
    std::vector<int> level;
    double coefficient;
    std::vector<std::size_t> extent;
    std::vector<std::size_t> row;  // lattice linear index -> grid row
  };

  TMKernel tm_;
  NumericPolicy policy_;
  int d_;
  int tau_;
  std::size_t n_;
  std::vector<Lattice> plans_;
  // [j][level] for level in 1..tau
  std::vector<std::vector<std::vector<double>>> designs_;
  std::vector<std::vector<Tridiagonal>> tri_;
};

/// K^{-1} on a truncated sparse grid in the block form
///   [[A^{-1} + B D B^T, -B D], [-D B^T, D]]
/// with B = A^{-1} k(base, extra) and D the reciprocal conditional variances
/// of the extra points given the base.
class TsgInverse {
 public:
  TsgInverse(const TMKernel& tm, const TruncatedSparseGrid& grid, NumericPolicy policy = {});

  const SparseSymMatrix& matrix() const { return matrix_; }
  const std::vector<double>& d_diagonal() const { return d_; }
  const std::vector<SparseVector>& b_columns() const { return b_; }
  const TruncatedSparseGrid& grid() const { return *grid_; }

  /// K^{-1} k(x) with x in unit coordinates.
  SparseVector solve_kernel_vector(std::span<const double> x) const;

 private:
  TMKernel tm_;
  NumericPolicy policy_;
  std::shared_ptr<const TruncatedSparseGrid> grid_;
  std::shared_ptr<const SparseGridSolver> solver_;
  std::vector<SparseVector> b_;
  std::vector<double> d_;
  SparseSymMatrix matrix_;
};

SparseSymMatrix inv_sg(const TMKernel& tm, int d, int tau, NumericPolicy policy = {});
SparseVector kinvk_sg(const TMKernel& tm, int d, int tau, std::span<const double> x, NumericPolicy policy = {});
SparseSymMatrix inv_tsg(const TMKernel& tm, const TruncatedSparseGrid& grid, NumericPolicy policy = {});
SparseVector kinvk_tsg(const TMKernel& tm, const TruncatedSparseGrid& grid, std::span<const double> x,
                       NumericPolicy policy = {});

// Whether x lies in the open box prod_j (c_{l_j, i_j - 1}, c_{l_j, i_j + 1}).
bool in_support_box(const LevelIndex& li, std::span<const double> x);

}  // namespace tmsk
