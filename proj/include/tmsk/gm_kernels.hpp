#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tmsk {

enum class KernelFamily { BrownianMotion, BrownianBridge, Laplace, AffineBrownian };

// A point of the extended real line as seen by the (p, q) algebra.
//
// The two phantom endpoints stand for the limits where p/q -> 0 (left) and
// p/q -> infinity (right). There the factor pair is taken as (p, q) = (0, 1)
// and (1, 0). Only ratios of cross terms are ever formed, so the missing
// scale does not matter.
struct Node {
  enum class Kind : unsigned char { Left, Finite, Right };
  Kind kind = Kind::Finite;
  double x = 0.0;

  static constexpr Node left() { return {Kind::Left, 0.0}; }
  static constexpr Node right() { return {Kind::Right, 0.0}; }
  static constexpr Node at(double v) { return {Kind::Finite, v}; }
};

/// One-dimensional Gauss-Markov kernel k(x, y) = p(min(x, y)) q(max(x, y)).
///
/// The kernel is kept in factor form; every fast algorithm reads p and q
/// (through cross()) rather than the kernel value. Instances are immutable.
class GaussMarkov1D {
 public:
  static GaussMarkov1D brownian_motion();
  static GaussMarkov1D brownian_bridge(double horizon);
  static GaussMarkov1D laplace(double theta);
  static GaussMarkov1D affine_brownian(double theta0, double theta1);

  KernelFamily family() const { return family_; }
  double param0() const { return a_; }
  double param1() const { return b_; }

  double p(double x) const;
  double q(double x) const;
  double p(Node n) const;
  double q(Node n) const;

  // Kernel value; throws InputError outside the open positivity domain.
  double operator()(double x, double y) const;
  double eval_unchecked(double x, double y) const;

  /// p(b) q(a) - p(a) q(b), the determinant that appears in every entry of
  /// the tridiagonal inverse. Positive for a < b. Evaluated in closed form
  /// (b - a, 2 sinh(theta (b - a)), ...) so that close nodes lose no digits.
  double cross(double a, double b) const;
  double cross(Node a, Node b) const;

  // Open interval on which p > 0 and q > 0.
  double lower_bound() const;
  double upper_bound() const;
  bool in_domain(double x) const { return x > lower_bound() && x < upper_bound(); }

  std::string to_string() const;

 private:
  GaussMarkov1D(KernelFamily f, double a, double b) : family_(f), a_(a), b_(b) {}

  KernelFamily family_;
  double a_;
  double b_;
};

/// Tensor Markov kernel: product of d one-dimensional Gauss-Markov kernels.
class TMKernel {
 public:
  explicit TMKernel(std::vector<GaussMarkov1D> components);
  static TMKernel broadcast(const GaussMarkov1D& k, std::size_t dim);

  std::size_t dim() const { return components_.size(); }
  const GaussMarkov1D& component(std::size_t j) const { return components_[j]; }
  const std::vector<GaussMarkov1D>& components() const { return components_; }

  double operator()(std::span<const double> x, std::span<const double> y) const;
  double eval_unchecked(const double* x, const double* y) const;
  double diagonal(std::span<const double> x) const;

  std::string to_string() const;

 private:
  std::vector<GaussMarkov1D> components_;
};

/// Per-dimension affine map between a user box (lo_j, hi_j) and (0,1)^d.
class DomainMap {
 public:
  DomainMap() = default;
  DomainMap(std::vector<double> lo, std::vector<double> hi);
  static DomainMap unit(std::size_t dim);
  static DomainMap cube(std::size_t dim, double lo, double hi);

  std::size_t dim() const { return lo_.size(); }
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

  std::vector<double> to_unit(std::span<const double> x) const;
  std::vector<double> from_unit(std::span<const double> u) const;

 private:
  std::vector<double> lo_;
  std::vector<double> hi_;
};

struct MarkovReport {
  bool pass = true;
  // First offending probe pair (x, x'), or a single point repeated when
  // positivity fails.
  std::optional<std::pair<double, double>> first_violation;
  std::string message;
};

// Numerically checks positivity of p, q and strict increase of p/q on an
// equispaced probe of (0, 1).
MarkovReport validate_markov(const GaussMarkov1D& kern, std::size_t probe_count);
MarkovReport validate_markov(const std::function<double(double)>& p,
                             const std::function<double(double)>& q,
                             std::size_t probe_count);

// "laplace:2", "bm", "bb:1", "affinebm:0.5,2"; several specs separated by ';'
// give one kernel per dimension, a single spec is broadcast to all d.
GaussMarkov1D parse_component_spec(const std::string& spec);
TMKernel parse_kernel_spec(const std::string& spec, std::size_t dim);

}  // namespace tmsk
