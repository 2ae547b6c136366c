#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tmsk/gm_kernels.hpp"
#include "tmsk/sparse_designs.hpp"

namespace tmsk {

/// Hierarchical basis function of a Gauss-Markov RKHS at node c_{l,i}.
///
/// Neighbours c_{l,0} and c_{l,2^l} are the phantom end nodes, so for i = 1
/// the left branch is p(x) / p(c) and for i = 2^l - 1 the right branch is
/// q(x) / q(c).
class HatFunction1D {
 public:
  HatFunction1D(const GaussMarkov1D& kern, int level, std::int64_t index);

  int level() const { return level_; }
  std::int64_t index() const { return index_; }
  double center() const { return center_.x; }
  Node left() const { return left_; }
  Node right() const { return right_; }

  double operator()(double x) const;
  bool in_support(double x) const;
  double norm_sq() const { return norm_sq_; }

 private:
  GaussMarkov1D kern_;
  int level_;
  std::int64_t index_;
  Node left_, center_, right_;
  double left_den_;
  double right_den_;
  double norm_sq_;
};

class TensorHat {
 public:
  TensorHat(const TMKernel& tm, const LevelIndex& li);

  const LevelIndex& level_index() const { return li_; }
  double operator()(std::span<const double> x) const;
  double rkhs_norm_sq() const { return norm_sq_; }

 private:
  LevelIndex li_;
  std::vector<HatFunction1D> comps_;
  double norm_sq_;
};

double phi_eval(const TensorHat& h, std::span<const double> x);

/// Squared RKHS norm of phi_{l,i}: product over j of
/// cross(c_{i-1}, c_{i+1}) / (cross(c_{i-1}, c_i) cross(c_i, c_{i+1})).
/// Equals the reciprocal conditional variance used in the truncated-grid
/// inverse. Throws KernelValidityError on a nonpositive denominator.
double rkhs_norm_sq(const TMKernel& tm, const LevelIndex& li);
double rkhs_norm_sq_1d(const GaussMarkov1D& kern, int level, std::int64_t index);

/// sum over |l| <= max_total_level, i in rho(l) of phi(x) phi(y) / ||phi||^2.
double kernel_expansion_partial(const TMKernel& tm, std::span<const double> x, std::span<const double> y,
                                int max_total_level);

/// The same sum restricted to indices absent from the grid and evaluated at
/// x = y: a lower bound on the noiseless posterior variance at x.
double posterior_variance_oracle(const TMKernel& tm, const TruncatedSparseGrid& grid, std::span<const double> x,
                                 int max_total_level);

}  // namespace tmsk
