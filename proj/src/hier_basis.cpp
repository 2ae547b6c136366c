#include "tmsk/hier_basis.hpp"

#include <cmath>
#include <string>

#include "tmsk/errors.hpp"

namespace tmsk {

namespace {

Node dyadic_node(int level, std::int64_t k) {
  if (k <= 0) return Node::left();
  if (k >= (std::int64_t{1} << level)) return Node::right();
  return Node::at(std::ldexp(static_cast<double>(k), -level));
}

void check_level_index(int level, std::int64_t index) {
  if (level < 1 || level > kMaxLevel) throw InputError("basis level out of range: " + std::to_string(level));
  if (index < 1 || index >= (std::int64_t{1} << level) || index % 2 == 0)
    throw InputError("basis index must be odd in [1, 2^l - 1], got " + std::to_string(index));
}

// Odd index i of the level-l basis function whose support contains x.
std::int64_t containing_index(double x, int level) {
  auto k = static_cast<std::int64_t>(std::floor(std::ldexp(x, level)));
  const std::int64_t top = (std::int64_t{1} << level) - 1;
  if (k < 0) k = 0;
  if (k > top) k = top;
  return k % 2 == 1 ? k : k + 1;
}

}  // namespace

HatFunction1D::HatFunction1D(const GaussMarkov1D& kern, int level, std::int64_t index)
    : kern_(kern), level_(level), index_(index) {
  check_level_index(level, index);
  left_ = dyadic_node(level, index - 1);
  center_ = dyadic_node(level, index);
  right_ = dyadic_node(level, index + 1);
  left_den_ = kern_.cross(left_, center_);
  right_den_ = kern_.cross(center_, right_);
  const double span = kern_.cross(left_, right_);
  if (!(left_den_ > 0.0) || !(right_den_ > 0.0) || !(span > 0.0))
    throw KernelValidityError("nonpositive cross term for basis (l=" + std::to_string(level) +
                              ", i=" + std::to_string(index) + ") of kernel " + kern_.to_string());
  norm_sq_ = span / (left_den_ * right_den_);
}

bool HatFunction1D::in_support(double x) const {
  const bool above = left_.kind == Node::Kind::Left || x > left_.x;
  const bool below = right_.kind == Node::Kind::Right || x < right_.x;
  return above && below;
}

double HatFunction1D::operator()(double x) const {
  if (!in_support(x)) return 0.0;
  if (x <= center_.x) return kern_.cross(left_, Node::at(x)) / left_den_;
  return kern_.cross(Node::at(x), right_) / right_den_;
}

TensorHat::TensorHat(const TMKernel& tm, const LevelIndex& li) : li_(li), norm_sq_(1.0) {
  if (li.dim() != tm.dim() || li.index.size() != li.level.size())
    throw InputError("TensorHat: level-index dimension does not match kernel");
  comps_.reserve(li.dim());
  for (std::size_t j = 0; j < li.dim(); ++j) {
    comps_.emplace_back(tm.component(j), li.level[j], li.index[j]);
    norm_sq_ *= comps_.back().norm_sq();
  }
}

double TensorHat::operator()(std::span<const double> x) const {
  if (x.size() != comps_.size()) throw InputError("TensorHat: dimension mismatch");
  double v = 1.0;
  for (std::size_t j = 0; j < comps_.size() && v != 0.0; ++j) v *= comps_[j](x[j]);
  return v;
}

double phi_eval(const TensorHat& h, std::span<const double> x) { return h(x); }

double rkhs_norm_sq_1d(const GaussMarkov1D& kern, int level, std::int64_t index) {
  return HatFunction1D(kern, level, index).norm_sq();
}

double rkhs_norm_sq(const TMKernel& tm, const LevelIndex& li) {
  if (li.dim() != tm.dim()) throw InputError("rkhs_norm_sq: dimension mismatch");
  double v = 1.0;
  for (std::size_t j = 0; j < li.dim(); ++j) v *= rkhs_norm_sq_1d(tm.component(j), li.level[j], li.index[j]);
  return v;
}

double kernel_expansion_partial(const TMKernel& tm, std::span<const double> x, std::span<const double> y,
                                int max_total_level) {
  const int d = static_cast<int>(tm.dim());
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
    throw InputError("kernel_expansion_partial: dimension mismatch");
  if (max_total_level < d) throw InputError("kernel_expansion_partial: cap must be >= d");
  const int top = max_total_level - d + 1;
  if (top > kMaxLevel) throw ResourceError("kernel_expansion_partial: cap exceeds the level limit");

  // term[j][L]: contribution of dimension j at level L (zero unless x_j and
  // y_j fall in the support of the same basis function).
  std::vector<std::vector<double>> term(static_cast<std::size_t>(d), std::vector<double>(top + 1, 0.0));
  for (int j = 0; j < d; ++j) {
    for (int L = 1; L <= top; ++L) {
      const auto ix = containing_index(x[j], L);
      if (ix != containing_index(y[j], L)) continue;
      HatFunction1D h(tm.component(j), L, ix);
      term[j][L] = h(x[j]) * h(y[j]) / h.norm_sq();
    }
  }
  // acc[s]: sum over level prefixes with total s.
  std::vector<double> acc(static_cast<std::size_t>(max_total_level) + 1, 0.0);
  for (int L = 1; L <= top; ++L) acc[L] = term[0][L];
  for (int j = 1; j < d; ++j) {
    std::vector<double> next(acc.size(), 0.0);
    for (int s = j; s <= max_total_level; ++s) {
      if (acc[s] == 0.0) continue;
      for (int L = 1; s + L <= max_total_level && L <= top; ++L) next[s + L] += acc[s] * term[j][L];
    }
    acc = std::move(next);
  }
  double sum = 0.0;
  for (int s = d; s <= max_total_level; ++s) sum += acc[s];
  return sum;
}

double posterior_variance_oracle(const TMKernel& tm, const TruncatedSparseGrid& grid, std::span<const double> x,
                                 int max_total_level) {
  const int d = static_cast<int>(tm.dim());
  if (grid.dim() != d || static_cast<int>(x.size()) != d)
    throw InputError("posterior_variance_oracle: dimension mismatch");
  if (max_total_level < grid.tau() + d) throw InputError("posterior_variance_oracle: cap must be >= tau + d");
  if (max_total_level - d + 1 > kMaxLevel) throw ResourceError("posterior_variance_oracle: cap exceeds the level limit");
  double count = 1.0;
  for (int k = 1; k <= d; ++k) count = count * (max_total_level - d + k) / k;
  if (count > 1e7) throw ResourceError("posterior_variance_oracle: too many level vectors");

  double sum = 0.0;
  LevelIndex li{std::vector<int>(d), std::vector<std::int64_t>(d)};
  for (int s = d; s <= max_total_level; ++s) {
    for (const auto& l : level_vectors(d, s)) {
      double phi = 1.0;
      double norm = 1.0;
      for (int j = 0; j < d && phi != 0.0; ++j) {
        li.level[j] = l[j];
        li.index[j] = containing_index(x[j], l[j]);
        HatFunction1D h(tm.component(j), l[j], li.index[j]);
        phi *= h(x[j]);
        norm *= h.norm_sq();
      }
      if (phi == 0.0 || grid.index_of(li)) continue;
      sum += phi * phi / norm;
    }
  }
  return sum;
}

}  // namespace tmsk
