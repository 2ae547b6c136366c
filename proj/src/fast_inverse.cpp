#include "tmsk/fast_inverse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <stdexcept>
#include <thread>

#include "tmsk/errors.hpp"
#include "tmsk/hier_basis.hpp"

namespace tmsk {

namespace {

struct Weights1D {
  std::array<std::size_t, 2> idx{};
  std::array<double, 2> val{};
  std::size_t count = 0;
};

void check_points(const GaussMarkov1D& kern, std::span<const double> pts) {
  if (pts.empty()) throw InputError("empty one-dimensional design");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!kern.in_domain(pts[i]))
      throw InputError("design point " + std::to_string(pts[i]) + " outside the domain of " + kern.to_string());
    if (i > 0 && pts[i] == pts[i - 1]) throw InputError("duplicate design point " + std::to_string(pts[i]));
    if (i > 0 && pts[i] < pts[i - 1]) throw InputError("design points must be strictly increasing");
  }
}

Node node_at(std::span<const double> pts, std::size_t k) {
  if (k == 0) return Node::left();
  if (k == pts.size() + 1) return Node::right();
  return Node::at(pts[k - 1]);
}

double checked_cross(const GaussMarkov1D& kern, Node a, Node b) {
  const double c = kern.cross(a, b);
  if (!(c > 0.0) || !std::isfinite(c))
    throw KernelValidityError("nonpositive cross term p(b)q(a) - p(a)q(b) for kernel " + kern.to_string());
  return c;
}

// diag[i], off[i] = entry (i, i+1).
void tridiagonal(const GaussMarkov1D& kern, std::span<const double> pts, std::vector<double>& diag,
                 std::vector<double>& off) {
  check_points(kern, pts);
  const std::size_t n = pts.size();
  diag.assign(n, 0.0);
  off.assign(n > 0 ? n - 1 : 0, 0.0);
  if (n == 1) {
    const double pv = kern.p(pts[0]), qv = kern.q(pts[0]);
    if (!(pv > 0.0) || !(qv > 0.0)) throw KernelValidityError("nonpositive p or q for " + kern.to_string());
    diag[0] = 1.0 / (pv * qv);
    return;
  }
  if (n == 2) {
    // det = p1 q2 cross(x1, x2); adjugate entries divided through.
    const double c = checked_cross(kern, Node::at(pts[0]), Node::at(pts[1]));
    const double p1 = kern.p(pts[0]), p2 = kern.p(pts[1]), q1 = kern.q(pts[0]), q2 = kern.q(pts[1]);
    if (!(p1 > 0.0) || !(q2 > 0.0)) throw KernelValidityError("nonpositive p or q for " + kern.to_string());
    diag[0] = p2 / (p1 * c);
    diag[1] = q1 / (q2 * c);
    off[0] = -1.0 / c;
    return;
  }
  std::vector<double> gap(n + 1);
  for (std::size_t k = 0; k <= n; ++k) gap[k] = checked_cross(kern, node_at(pts, k), node_at(pts, k + 1));
  for (std::size_t i = 1; i <= n; ++i) {
    const double span = checked_cross(kern, node_at(pts, i - 1), node_at(pts, i + 1));
    diag[i - 1] = span / (gap[i - 1] * gap[i]);
    if (i < n) off[i - 1] = -1.0 / gap[i];
  }
}

// Interpolation weights K^{-1}k(x) on a sorted design without validation.
Weights1D weights_1d(const GaussMarkov1D& kern, std::span<const double> pts, double x) {
  Weights1D w;
  const std::size_t n = pts.size();
  const std::size_t s = locate_interval(pts, x);
  const Node lo = s == 0 ? Node::left() : Node::at(pts[s - 1]);
  const Node hi = s == n ? Node::right() : Node::at(pts[s]);
  const double den = checked_cross(kern, lo, hi);
  if (s >= 1) {
    const double v = kern.cross(Node::at(x), hi) / den;
    if (v != 0.0) {
      w.idx[w.count] = s - 1;
      w.val[w.count++] = v;
    }
  }
  if (s < n) {
    const double v = kern.cross(lo, Node::at(x)) / den;
    if (v != 0.0) {
      w.idx[w.count] = s;
      w.val[w.count++] = v;
    }
  }
  return w;
}

struct Entry {
  std::size_t row;
  std::size_t col;
  double value;
};

// Full (both triangles) Kronecker product of tridiagonals; last factor fastest.
std::vector<Entry> kron_tridiagonals(const std::vector<const std::vector<double>*>& diags,
                                     const std::vector<const std::vector<double>*>& offs, double scale) {
  std::vector<Entry> cur{{0, 0, scale}};
  for (std::size_t j = 0; j < diags.size(); ++j) {
    const auto& dg = *diags[j];
    const auto& of = *offs[j];
    const std::size_t m = dg.size();
    std::vector<Entry> next;
    next.reserve(cur.size() * (3 * m - 2));
    for (const auto& e : cur) {
      for (std::size_t a = 0; a < m; ++a) {
        const std::size_t r = e.row * m + a;
        const std::size_t c = e.col * m;
        if (a > 0) next.push_back({r, c + a - 1, e.value * of[a - 1]});
        next.push_back({r, c + a, e.value * dg[a]});
        if (a + 1 < m) next.push_back({r, c + a + 1, e.value * of[a]});
      }
    }
    cur = std::move(next);
  }
  return cur;
}

std::vector<std::pair<std::size_t, double>> kron_weights(const std::vector<const Weights1D*>& ws,
                                                          const std::vector<std::size_t>& extent, double scale) {
  std::vector<std::pair<std::size_t, double>> cur{{0, scale}};
  for (std::size_t j = 0; j < ws.size(); ++j) {
    std::vector<std::pair<std::size_t, double>> next;
    next.reserve(cur.size() * 2);
    for (const auto& [i, v] : cur) {
      for (std::size_t k = 0; k < ws[j]->count; ++k) next.emplace_back(i * extent[j] + ws[j]->idx[k], v * ws[j]->val[k]);
    }
    cur = std::move(next);
  }
  return cur;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
  return std::round(r);
}

void check_tm(const TMKernel& tm, int d) {
  if (static_cast<int>(tm.dim()) != d)
    throw InputError("kernel has d=" + std::to_string(tm.dim()) + " but the design has d=" + std::to_string(d));
}

}  // namespace

SparseSymMatrix inv_1d(const GaussMarkov1D& kern, std::span<const double> points) {
  std::vector<double> diag, off;
  tridiagonal(kern, points, diag, off);
  std::vector<Triplet> upper;
  upper.reserve(2 * diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    upper.push_back({i, i, diag[i]});
    if (i + 1 < diag.size()) upper.push_back({i, i + 1, off[i]});
  }
  return SparseSymMatrix::from_upper(diag.size(), std::move(upper));
}

SparseVector kinvk_1d(const GaussMarkov1D& kern, std::span<const double> points, double x) {
  check_points(kern, points);
  const auto w = weights_1d(kern, points, x);
  SparseVector v;
  v.n = points.size();
  for (std::size_t k = 0; k < w.count; ++k) {
    v.idx.push_back(w.idx[k]);
    v.val.push_back(w.val[k]);
  }
  return v;
}

SparseSymMatrix inv_lattice(const TMKernel& tm, const std::vector<std::vector<double>>& designs) {
  check_tm(tm, static_cast<int>(designs.size()));
  std::vector<std::vector<double>> diags(designs.size()), offs(designs.size());
  std::vector<const std::vector<double>*> dp, op;
  std::size_t n = 1;
  for (std::size_t j = 0; j < designs.size(); ++j) {
    tridiagonal(tm.component(j), designs[j], diags[j], offs[j]);
    dp.push_back(&diags[j]);
    op.push_back(&offs[j]);
    n *= designs[j].size();
  }
  std::vector<Triplet> upper;
  for (const auto& e : kron_tridiagonals(dp, op, 1.0)) {
    if (e.row <= e.col) upper.push_back({e.row, e.col, e.value});
  }
  return SparseSymMatrix::from_upper(n, std::move(upper));
}

SparseVector kinvk_lattice(const TMKernel& tm, const std::vector<std::vector<double>>& designs,
                           std::span<const double> x) {
  check_tm(tm, static_cast<int>(designs.size()));
  if (x.size() != designs.size()) throw InputError("kinvk_lattice: point dimension mismatch");
  std::vector<Weights1D> ws(designs.size());
  std::vector<const Weights1D*> wp;
  std::vector<std::size_t> extent;
  std::size_t n = 1;
  for (std::size_t j = 0; j < designs.size(); ++j) {
    check_points(tm.component(j), designs[j]);
    ws[j] = weights_1d(tm.component(j), designs[j], x[j]);
    wp.push_back(&ws[j]);
    extent.push_back(designs[j].size());
    n *= designs[j].size();
  }
  auto entries = kron_weights(wp, extent, 1.0);
  std::sort(entries.begin(), entries.end());
  SparseVector v;
  v.n = n;
  for (const auto& [i, val] : entries) {
    v.idx.push_back(i);
    v.val.push_back(val);
  }
  return v;
}

SparseGridSolver::SparseGridSolver(const TMKernel& tm, const TruncatedSparseGrid& grid, NumericPolicy policy)
    : tm_(tm), policy_(policy), d_(grid.dim()), tau_(grid.tau()), n_(grid.base_size()) {
  check_tm(tm, d_);
  designs_.assign(d_, std::vector<std::vector<double>>(tau_ + 1));
  tri_.assign(d_, std::vector<Tridiagonal>(tau_ + 1));
  for (int j = 0; j < d_; ++j) {
    for (int L = 1; L <= tau_; ++L) {
      designs_[j][L] = component_design(L);
      tridiagonal(tm_.component(j), designs_[j][L], tri_[j][L].diag, tri_[j][L].off);
    }
  }

  const int top = tau_ + d_ - 1;
  LevelIndex key{std::vector<int>(d_), std::vector<std::int64_t>(d_)};
  for (int s = std::max(tau_, d_); s <= top; ++s) {
    const double sign = (top - s) % 2 == 0 ? 1.0 : -1.0;
    const double coef = sign * binomial(d_ - 1, top - s);
    for (auto& l : level_vectors(d_, s)) {
      Lattice lat;
      lat.level = l;
      lat.coefficient = coef;
      std::size_t total = 1;
      for (int j = 0; j < d_; ++j) {
        lat.extent.push_back((std::size_t{1} << l[j]) - 1);
        total *= lat.extent.back();
      }
      lat.row.resize(total);
      std::vector<std::int64_t> idx(d_, 1);
      for (std::size_t r = 0; r < total; ++r) {
        for (int j = 0; j < d_; ++j) {
          key.level[j] = l[j];
          key.index[j] = idx[j];
          canonicalize_1d(key.level[j], key.index[j]);
        }
        const auto row = grid.index_of(key);
        if (!row || *row >= n_) throw std::logic_error("lattice node missing from the sparse grid");
        lat.row[r] = *row;
        for (int j = d_ - 1; j >= 0; --j) {
          if (++idx[j] <= static_cast<std::int64_t>(lat.extent[j])) break;
          idx[j] = 1;
        }
      }
      plans_.push_back(std::move(lat));
    }
  }
}

SparseSymMatrix SparseGridSolver::inverse() const {
  SymmetricBuilder builder(n_);
  std::vector<const std::vector<double>*> dp(d_), op(d_);
  for (const auto& lat : plans_) {
    for (int j = 0; j < d_; ++j) {
      dp[j] = &tri_[j][lat.level[j]].diag;
      op[j] = &tri_[j][lat.level[j]].off;
    }
    for (const auto& e : kron_tridiagonals(dp, op, lat.coefficient)) {
      if (e.row <= e.col) builder.add(lat.row[e.row], lat.row[e.col], e.value);
    }
  }
  return builder.finalize(policy_.drop_relative);
}

SparseVector SparseGridSolver::solve_kernel_vector(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != d_) throw InputError("solve_kernel_vector: dimension mismatch");
  std::vector<std::vector<Weights1D>> w(d_, std::vector<Weights1D>(tau_ + 1));
  for (int j = 0; j < d_; ++j) {
    for (int L = 1; L <= tau_; ++L) w[j][L] = weights_1d(tm_.component(j), designs_[j][L], x[j]);
  }
  VectorAccumulator acc(n_);
  std::vector<const Weights1D*> wp(d_);
  for (const auto& lat : plans_) {
    for (int j = 0; j < d_; ++j) wp[j] = &w[j][lat.level[j]];
    for (const auto& [i, v] : kron_weights(wp, lat.extent, lat.coefficient)) acc.add(lat.row[i], v);
  }
  return acc.finalize(policy_.drop_relative);
}

bool in_support_box(const LevelIndex& li, std::span<const double> x) {
  for (std::size_t j = 0; j < li.dim(); ++j) {
    const double lo = std::ldexp(static_cast<double>(li.index[j] - 1), -li.level[j]);
    const double hi = std::ldexp(static_cast<double>(li.index[j] + 1), -li.level[j]);
    if (!(x[j] > lo && x[j] < hi)) return false;
  }
  return true;
}

TsgInverse::TsgInverse(const TMKernel& tm, const TruncatedSparseGrid& grid, NumericPolicy policy)
    : tm_(tm), policy_(policy), grid_(std::make_shared<const TruncatedSparseGrid>(grid)) {
  check_tm(tm, grid.dim());
  solver_ = std::make_shared<const SparseGridSolver>(tm_, *grid_, policy_);
  const std::size_t nb = grid_->base_size();
  const std::size_t ne = grid_->extra_size();
  const int d = grid_->dim();
  for (const auto& e : grid_->extra()) {
    if (e.total_level() != grid_->tau() + d) throw std::logic_error("extra point outside the next increment");
  }

  b_.resize(ne);
  d_.resize(ne);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t e = first; e < ne; e += stride) {
      b_[e] = solver_->solve_kernel_vector(grid_->point(nb + e));
      d_[e] = rkhs_norm_sq(tm_, grid_->row(nb + e));
    }
  };
  const std::size_t threads = std::min<std::size_t>(std::max(1u, policy_.build_threads), std::max<std::size_t>(ne, 1));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          work(t, threads);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  const SparseSymMatrix ainv = solver_->inverse();
  if (ne == 0) {
    matrix_ = ainv;
    return;
  }
  SymmetricBuilder builder(nb + ne);
  for (const auto& t : ainv.upper_entries()) builder.add(t.row, t.col, t.value);
  for (std::size_t e = 0; e < ne; ++e) {
    const auto& b = b_[e];
    const double de = d_[e];
    for (std::size_t u = 0; u < b.nnz(); ++u) {
      const double bu = b.val[u] * de;
      for (std::size_t v = u; v < b.nnz(); ++v) builder.add(b.idx[u], b.idx[v], bu * b.val[v]);
      builder.add(b.idx[u], nb + e, -bu);
    }
    builder.add(nb + e, nb + e, de);
  }
  matrix_ = builder.finalize(policy_.drop_relative);
}

SparseVector TsgInverse::solve_kernel_vector(std::span<const double> x) const {
  const std::size_t nb = grid_->base_size();
  const std::size_t n = grid_->size();
  const SparseVector a = solver_->solve_kernel_vector(x);
  if (grid_->extra_size() == 0) return a;

  VectorAccumulator acc(n);
  for (std::size_t k = 0; k < a.nnz(); ++k) acc.add(a.idx[k], a.val[k]);
  for (std::size_t e = 0; e < b_.size(); ++e) {
    // Conditional covariance of the extra point with x given the base;
    // zero unless x lies in the extra point's support box.
    if (!in_support_box(grid_->row(nb + e), x)) continue;
    const auto& b = b_[e];
    double r = tm_.eval_unchecked(grid_->point(nb + e).data(), x.data());
    for (std::size_t k = 0; k < b.nnz(); ++k) r -= b.val[k] * tm_.eval_unchecked(grid_->point(b.idx[k]).data(), x.data());
    const double dr = d_[e] * r;
    if (dr == 0.0) continue;
    for (std::size_t k = 0; k < b.nnz(); ++k) acc.add(b.idx[k], -b.val[k] * dr);
    acc.add(nb + e, dr);
  }
  return acc.finalize(policy_.drop_relative);
}

SparseSymMatrix inv_sg(const TMKernel& tm, int d, int tau, NumericPolicy policy) {
  const auto grid = truncated_sg(d, static_cast<std::size_t>(sg_size(d, tau)));
  return SparseGridSolver(tm, grid, policy).inverse();
}

SparseVector kinvk_sg(const TMKernel& tm, int d, int tau, std::span<const double> x, NumericPolicy policy) {
  const auto grid = truncated_sg(d, static_cast<std::size_t>(sg_size(d, tau)));
  return SparseGridSolver(tm, grid, policy).solve_kernel_vector(x);
}

SparseSymMatrix inv_tsg(const TMKernel& tm, const TruncatedSparseGrid& grid, NumericPolicy policy) {
  return TsgInverse(tm, grid, policy).matrix();
}

SparseVector kinvk_tsg(const TMKernel& tm, const TruncatedSparseGrid& grid, std::span<const double> x,
                       NumericPolicy policy) {
  return TsgInverse(tm, grid, policy).solve_kernel_vector(x);
}

}  // namespace tmsk
