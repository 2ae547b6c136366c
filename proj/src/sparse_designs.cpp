#include "tmsk/sparse_designs.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "tmsk/errors.hpp"

namespace tmsk {

namespace {

// Largest grid we are willing to enumerate explicitly.
constexpr std::uint64_t kEnumerationCap = 50'000'000;

void check_dim_level(int d, int tau) {
  if (d < 1) throw InputError("dimension must be >= 1, got " + std::to_string(d));
  if (tau < 1) throw InputError("sparse grid level must be >= 1, got " + std::to_string(tau));
  if (tau > kMaxLevel) throw OverflowError("sparse grid level " + std::to_string(tau) + " exceeds cap " +
                                           std::to_string(kMaxLevel));
}

void append_rho(const std::vector<int>& level, std::vector<LevelIndex>& out) {
  const std::size_t d = level.size();
  std::vector<std::int64_t> idx(d, 1);
  while (true) {
    out.push_back(LevelIndex{level, idx});
    std::size_t j = d;
    while (j > 0) {
      --j;
      idx[j] += 2;
      if (idx[j] <= (std::int64_t{1} << level[j]) - 1) break;
      idx[j] = 1;
      if (j == 0) return;
    }
  }
}

void compositions(int d, int total, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  const int pos = static_cast<int>(cur.size());
  if (pos == d - 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  const int remaining = d - pos - 1;
  for (int v = 1; v <= total - remaining; ++v) {
    cur.push_back(v);
    compositions(d, total - v, cur, out);
    cur.pop_back();
  }
}

}  // namespace

int LevelIndex::total_level() const {
  int s = 0;
  for (int l : level) s += l;
  return s;
}

bool LevelIndex::is_canonical() const {
  if (level.size() != index.size() || level.empty()) return false;
  for (std::size_t j = 0; j < level.size(); ++j) {
    if (level[j] < 1 || level[j] > kMaxLevel) return false;
    if (index[j] < 1 || index[j] > (std::int64_t{1} << level[j]) - 1) return false;
    if (index[j] % 2 == 0) return false;
  }
  return true;
}

std::vector<double> LevelIndex::point() const {
  std::vector<double> x(level.size());
  for (std::size_t j = 0; j < level.size(); ++j) x[j] = std::ldexp(static_cast<double>(index[j]), -level[j]);
  return x;
}

std::strong_ordering operator<=>(const LevelIndex& a, const LevelIndex& b) {
  if (auto c = a.level <=> b.level; c != 0) return c;
  return a.index <=> b.index;
}

std::size_t LevelIndexHash::operator()(const LevelIndex& li) const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (std::size_t j = 0; j < li.level.size(); ++j) {
    mix(static_cast<std::uint64_t>(li.level[j]));
    mix(static_cast<std::uint64_t>(li.index[j]));
  }
  return static_cast<std::size_t>(h);
}

void canonicalize_1d(int& level, std::int64_t& index) {
  while (level > 1 && index % 2 == 0) {
    index /= 2;
    --level;
  }
}

std::vector<double> component_design(int level) {
  if (level < 1) throw InputError("component design level must be >= 1");
  if (level > kMaxLevel) throw OverflowError("component design level exceeds " + std::to_string(kMaxLevel));
  if (level > 26) throw ResourceError("component design of level " + std::to_string(level) + " is too large to list");
  const std::int64_t count = (std::int64_t{1} << level) - 1;
  std::vector<double> pts(static_cast<std::size_t>(count));
  for (std::int64_t i = 1; i <= count; ++i) pts[static_cast<std::size_t>(i - 1)] = std::ldexp(static_cast<double>(i), -level);
  return pts;
}

unsigned __int128 sg_size_wide(int d, int tau) {
  if (d < 1) throw InputError("dimension must be >= 1");
  if (tau < 1) throw InputError("sparse grid level must be >= 1");
  if (d > 64 || tau > 30) throw OverflowError("sg_size is exact only for d <= 64 and tau <= 30");
  using u128 = unsigned __int128;
  u128 total = 0;
  u128 binom = 1;  // C(k + d - 1, d - 1) at k = 0
  for (int k = 0; k < tau; ++k) {
    if (k > 0) binom = binom * static_cast<u128>(k + d - 1) / static_cast<u128>(k);
    total += (u128{1} << k) * binom;
  }
  return total;
}

std::uint64_t sg_size(int d, int tau) {
  const auto v = sg_size_wide(d, tau);
  if (v > static_cast<unsigned __int128>(UINT64_MAX))
    throw OverflowError("sparse grid size for d=" + std::to_string(d) + ", tau=" + std::to_string(tau) +
                        " does not fit in 64 bits");
  return static_cast<std::uint64_t>(v);
}

std::vector<std::vector<int>> level_vectors(int d, int total) {
  std::vector<std::vector<int>> out;
  if (total < d) return out;
  std::vector<int> cur;
  compositions(d, total, cur, out);
  return out;
}

std::vector<LevelIndex> classical_sg(int d, int tau) {
  check_dim_level(d, tau);
  const auto n = sg_size(d, tau);
  if (n > kEnumerationCap) throw ResourceError("sparse grid of size " + std::to_string(n) + " exceeds enumeration cap");
  std::vector<LevelIndex> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int s = d; s <= tau + d - 1; ++s) {
    for (const auto& l : level_vectors(d, s)) append_rho(l, out);
  }
  return out;
}

std::vector<LevelIndex> sg_increment(int d, int tau) {
  check_dim_level(d, tau + 1);
  const auto n = sg_size(d, tau + 1) - sg_size(d, tau);
  if (n > kEnumerationCap) throw ResourceError("sparse grid increment exceeds enumeration cap");
  std::vector<LevelIndex> out;
  out.reserve(static_cast<std::size_t>(n));
  for (const auto& l : level_vectors(d, tau + d)) append_rho(l, out);
  return out;
}

TruncatedSparseGrid::TruncatedSparseGrid(int d, int tau, std::vector<LevelIndex> base,
                                         std::vector<LevelIndex> extra) {
  check_dim_level(d, tau);
  d_ = d;
  tau_ = tau;
  if (base != classical_sg(d, tau))
    throw InputError("base block is not the level-" + std::to_string(tau) + " sparse grid in canonical order");
  if (extra.size() > sg_size(d, tau + 1) - sg_size(d, tau))
    throw InputError("too many extra points for a truncated sparse grid of level " + std::to_string(tau));
  for (const auto& e : extra) {
    if (static_cast<int>(e.dim()) != d || !e.is_canonical() || e.total_level() != tau + d)
      throw InputError("extra point is not a level-" + std::to_string(tau + 1) + " increment point");
  }
  base_size_ = base.size();
  rows_ = std::move(base);
  rows_.insert(rows_.end(), std::make_move_iterator(extra.begin()), std::make_move_iterator(extra.end()));
  finish();
}

void TruncatedSparseGrid::finish() {
  coords_.resize(rows_.size() * static_cast<std::size_t>(d_));
  index_map_.reserve(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    auto [it, inserted] = index_map_.emplace(rows_[r], r);
    if (!inserted) throw InputError("duplicate point in truncated sparse grid at row " + std::to_string(r));
    const auto x = rows_[r].point();
    std::copy(x.begin(), x.end(), coords_.begin() + static_cast<std::ptrdiff_t>(r * d_));
  }
}

TruncatedSparseGrid TruncatedSparseGrid::from_rows(int d, std::vector<LevelIndex> rows) {
  if (rows.empty()) throw InputError("empty design");
  const int tau = tsg_level_for_size(d, rows.size());
  const auto nb = static_cast<std::size_t>(sg_size(d, tau));
  std::vector<LevelIndex> base(std::make_move_iterator(rows.begin()),
                               std::make_move_iterator(rows.begin() + static_cast<std::ptrdiff_t>(nb)));
  std::vector<LevelIndex> extra(std::make_move_iterator(rows.begin() + static_cast<std::ptrdiff_t>(nb)),
                                std::make_move_iterator(rows.end()));
  return TruncatedSparseGrid(d, tau, std::move(base), std::move(extra));
}

std::optional<std::size_t> TruncatedSparseGrid::index_of(const LevelIndex& li) const {
  auto it = index_map_.find(li);
  if (it == index_map_.end()) return std::nullopt;
  return it->second;
}

int tsg_level_for_size(int d, std::size_t n) {
  if (d < 1) throw InputError("dimension must be >= 1");
  if (n < 1) throw InputError("design size must be >= 1");
  int tau = 1;
  while (true) {
    if (tau + 1 > 30) throw OverflowError("design size too large");
    if (sg_size_wide(d, tau + 1) > static_cast<unsigned __int128>(n)) return tau;
    ++tau;
  }
}

TruncatedSparseGrid truncated_sg(int d, std::size_t n, std::optional<std::uint64_t> seed) {
  const int tau = tsg_level_for_size(d, n);
  auto base = classical_sg(d, tau);
  const std::size_t extra_count = n - base.size();
  std::vector<LevelIndex> extra;
  if (extra_count > 0) {
    auto pool = sg_increment(d, tau);
    if (seed) {
      std::mt19937_64 rng(*seed);
      for (std::size_t k = 0; k < extra_count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
        std::swap(pool[k], pool[pick(rng)]);
      }
    }
    pool.resize(extra_count);
    extra = std::move(pool);
  }
  return TruncatedSparseGrid(d, tau, std::move(base), std::move(extra));
}

std::size_t locate_interval(std::span<const double> points, double x) {
  return static_cast<std::size_t>(std::upper_bound(points.begin(), points.end(), x) - points.begin());
}

}  // namespace tmsk
