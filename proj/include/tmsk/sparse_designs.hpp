#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace tmsk {

// Levels are capped so that every dyadic node i * 2^-l is an exact double.
inline constexpr int kMaxLevel = 50;

/// Multi-index (l, i) of the dyadic node c_{l,i} = (i_1 2^-l_1, ..., i_d 2^-l_d).
///
/// A canonical index has every i_j odd with 1 <= i_j <= 2^l_j - 1. Ordering is
/// lexicographic in l, then in i.
struct LevelIndex {
  std::vector<int> level;
  std::vector<std::int64_t> index;

  std::size_t dim() const { return level.size(); }
  int total_level() const;
  bool is_canonical() const;
  std::vector<double> point() const;

  friend bool operator==(const LevelIndex&, const LevelIndex&) = default;
  friend std::strong_ordering operator<=>(const LevelIndex& a, const LevelIndex& b);
};

struct LevelIndexHash {
  std::size_t operator()(const LevelIndex& li) const noexcept;
};

// Reduce (level, index) with possibly even index to its canonical odd form.
void canonicalize_1d(int& level, std::int64_t& index);

/// {i 2^-l : 1 <= i <= 2^l - 1}, ascending.
std::vector<double> component_design(int level);

/// Size of the classical sparse grid of level tau in d dimensions:
/// sum_{k=0}^{tau-1} 2^k C(k+d-1, d-1). Exact for d <= 64, tau <= 30.
unsigned __int128 sg_size_wide(int d, int tau);
/// As sg_size_wide; throws OverflowError if the value does not fit 64 bits.
std::uint64_t sg_size(int d, int tau);

/// All level vectors l (l_j >= 1) with |l| = total, lexicographic.
std::vector<std::vector<int>> level_vectors(int d, int total);

/// Classical sparse grid in canonical order: ascending |l|, then (l, i) lexicographic.
std::vector<LevelIndex> classical_sg(int d, int tau);

/// Points of level tau+1 that are not in the level-tau grid (|l| = tau + d), canonical order.
std::vector<LevelIndex> sg_increment(int d, int tau);

/// Classical sparse grid of level tau plus extra points drawn from the next increment.
///
/// Rows: all base points in canonical order, then the extra points in
/// selection order. Immutable after construction.
class TruncatedSparseGrid {
 public:
  // Validates: base must equal classical_sg(d, tau) in canonical order; every
  // extra index must have |l| = tau + d and be distinct. The whole increment
  // is accepted, which views the level-(tau+1) grid in block form over level tau.
  TruncatedSparseGrid(int d, int tau, std::vector<LevelIndex> base, std::vector<LevelIndex> extra);

  // Rebuild from rows in file order (base first, canonical; extras after).
  static TruncatedSparseGrid from_rows(int d, std::vector<LevelIndex> rows);

  int dim() const { return d_; }
  int tau() const { return tau_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t base_size() const { return base_size_; }
  std::size_t extra_size() const { return rows_.size() - base_size_; }

  std::span<const LevelIndex> rows() const { return rows_; }
  std::span<const LevelIndex> base() const { return {rows_.data(), base_size_}; }
  std::span<const LevelIndex> extra() const { return {rows_.data() + base_size_, extra_size()}; }
  const LevelIndex& row(std::size_t r) const { return rows_[r]; }

  std::optional<std::size_t> index_of(const LevelIndex& li) const;
  std::span<const double> point(std::size_t r) const { return {coords_.data() + r * d_, static_cast<std::size_t>(d_)}; }
  const std::vector<double>& coordinates() const { return coords_; }

 private:
  TruncatedSparseGrid() = default;
  void finish();

  int d_ = 0;
  int tau_ = 0;
  std::size_t base_size_ = 0;
  std::vector<LevelIndex> rows_;
  std::vector<double> coords_;
  std::unordered_map<LevelIndex, std::size_t, LevelIndexHash> index_map_;
};

/// Level tau with sg_size(d, tau) <= n < sg_size(d, tau + 1).
int tsg_level_for_size(int d, std::size_t n);

/// Truncated sparse grid of size n. With a seed the extra points are drawn
/// uniformly without replacement (partial Fisher-Yates over the canonical
/// increment, so prefixes are nested for a fixed seed); without a seed the
/// first n - |base| increment points in canonical order are taken.
TruncatedSparseGrid truncated_sg(int d, std::size_t n, std::optional<std::uint64_t> seed = std::nullopt);

/// i* in {0, ..., n} with points[i*-1] <= x < points[i*] (1-based reading:
/// x in [x_{i*}, x_{i*+1}) with x_0 = -inf, x_{n+1} = +inf).
std::size_t locate_interval(std::span<const double> points, double x);

}  // namespace tmsk
