#include <doctest.h>

#include <algorithm>
#include <set>

#include "tmsk/errors.hpp"
#include "tmsk/sparse_designs.hpp"

using namespace tmsk;

namespace {

std::set<std::vector<double>> point_set(const std::vector<LevelIndex>& v) {
  std::set<std::vector<double>> s;
  for (const auto& li : v) s.insert(li.point());
  return s;
}

}  // namespace

TEST_CASE("component designs are dyadic and nested") {
  CHECK(component_design(1) == std::vector<double>{0.5});
  CHECK(component_design(2) == std::vector<double>{0.25, 0.5, 0.75});
  const auto l3 = component_design(3);
  REQUIRE(l3.size() == 7);
  for (int i = 1; i <= 7; ++i) CHECK(l3[i - 1] == i / 8.0);
  for (int l = 1; l < 8; ++l) {
    const auto a = component_design(l), b = component_design(l + 1);
    CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
  }
  CHECK_THROWS_AS(component_design(51), OverflowError);
  CHECK_THROWS_AS(component_design(0), InputError);
}

TEST_CASE("sparse grid sizes") {
  CHECK(sg_size(2, 2) == 5);
  CHECK(sg_size(10, 4) == 2001);
  CHECK(sg_size(50, 5) == 4867201);
  CHECK(sg_size(1, 5) == 31);
  CHECK_THROWS_AS(sg_size(64, 31), OverflowError);
  CHECK_THROWS_AS(sg_size(0, 2), InputError);
  // Wide value beyond 64 bits.
  CHECK(sg_size_wide(64, 30) > static_cast<unsigned __int128>(UINT64_MAX));
  CHECK_THROWS_AS(sg_size(64, 30), OverflowError);
}

TEST_CASE("classical grid examples") {
  const auto g = classical_sg(2, 2);
  const std::set<std::vector<double>> want{{0.5, 0.25}, {0.5, 0.5}, {0.5, 0.75}, {0.25, 0.5}, {0.75, 0.5}};
  CHECK(point_set(g) == want);
  CHECK(g.front().point() == std::vector<double>{0.5, 0.5});

  const auto one = classical_sg(1, 3);
  CHECK(one.size() == 7);
  auto pts = point_set(one);
  CHECK(*pts.begin() == std::vector<double>{0.125});

  const auto c = classical_sg(3, 1);
  REQUIRE(c.size() == 1);
  CHECK(c[0].point() == std::vector<double>{0.5, 0.5, 0.5});
}

TEST_CASE("cardinality, nesting, odd indices and projection") {
  for (int d = 1; d <= 6; ++d) {
    for (int tau = 1; tau <= 5; ++tau) {
      const auto g = classical_sg(d, tau);
      CHECK(g.size() == sg_size(d, tau));
      const auto ps = point_set(g);
      CHECK(ps.size() == g.size());
      for (const auto& li : g) CHECK(li.is_canonical());
      CHECK(std::is_sorted(g.begin(), g.end(), [](const LevelIndex& a, const LevelIndex& b) {
        return a.total_level() != b.total_level() ? a.total_level() < b.total_level() : a < b;
      }));
      if (tau < 5) {
        const auto next = point_set(classical_sg(d, tau + 1));
        CHECK(std::includes(next.begin(), next.end(), ps.begin(), ps.end()));
      }
      const auto comp = component_design(tau);
      for (const auto& p : ps)
        for (double v : p) CHECK(std::binary_search(comp.begin(), comp.end(), v));
    }
  }
  CHECK(classical_sg(10, 4).size() == 2001);
}

TEST_CASE("increment has the size difference") {
  for (int d = 1; d <= 4; ++d) {
    for (int tau = 1; tau <= 4; ++tau) {
      const auto inc = sg_increment(d, tau);
      CHECK(inc.size() == sg_size(d, tau + 1) - sg_size(d, tau));
      for (const auto& li : inc) CHECK(li.total_level() == tau + d);
    }
  }
}

TEST_CASE("truncated grids") {
  const auto g5 = truncated_sg(2, 5);
  CHECK(g5.tau() == 2);
  CHECK(g5.extra_size() == 0);

  const auto g7 = truncated_sg(2, 7, 0);
  CHECK(g7.size() == 7);
  CHECK(g7.base_size() == 5);
  const auto inc = sg_increment(2, 2);
  CHECK(inc.size() == 12);
  for (const auto& e : g7.extra()) {
    CHECK(e.total_level() == 4);
    CHECK(std::find(inc.begin(), inc.end(), e) != inc.end());
  }
  CHECK_FALSE(g7.extra()[0] == g7.extra()[1]);

  const auto g1 = truncated_sg(1, 6);
  CHECK(g1.tau() == 2);
  CHECK(g1.extra_size() == 3);
  for (const auto& e : g1.extra()) CHECK(e.level[0] == 3);

  for (std::size_t r = 0; r < g7.size(); ++r) CHECK(g7.index_of(g7.row(r)) == r);
}

TEST_CASE("seeded selection is reproducible and nested") {
  const auto a = truncated_sg(2, 10, 42), b = truncated_sg(2, 10, 42);
  CHECK(std::equal(a.rows().begin(), a.rows().end(), b.rows().begin(), b.rows().end()));
  std::set<std::vector<LevelIndex>> distinct;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto g = truncated_sg(2, 10, s);
    distinct.insert(std::vector<LevelIndex>(g.extra().begin(), g.extra().end()));
  }
  CHECK(distinct.size() > 1);
  const auto big = truncated_sg(2, 15, 7);
  const auto small = truncated_sg(2, 9, 7);
  CHECK(std::equal(small.rows().begin(), small.rows().end(), big.rows().begin()));
}

TEST_CASE("grid validation") {
  auto base = classical_sg(2, 2);
  auto inc = sg_increment(2, 2);
  CHECK_NOTHROW(TruncatedSparseGrid(2, 2, base, {inc[0]}));
  CHECK_THROWS_AS(TruncatedSparseGrid(2, 2, base, {inc[0], inc[0]}), InputError);
  CHECK_THROWS_AS(TruncatedSparseGrid(2, 2, base, {base[1]}), InputError);
  auto shuffled = base;
  std::swap(shuffled[0], shuffled[1]);
  CHECK_THROWS_AS(TruncatedSparseGrid(2, 2, shuffled, {}), InputError);
  const TruncatedSparseGrid whole(2, 2, base, inc);
  CHECK(whole.size() == sg_size(2, 3));
  CHECK(whole.tau() == 2);
  auto too_many = inc;
  too_many.push_back(inc[0]);
  CHECK_THROWS_AS(TruncatedSparseGrid(2, 2, base, too_many), InputError);

  std::vector<LevelIndex> rows = base;
  rows.push_back(inc[3]);
  const auto g = TruncatedSparseGrid::from_rows(2, rows);
  CHECK(g.size() == 6);
  CHECK(g.extra()[0] == inc[3]);
}

TEST_CASE("locate_interval") {
  const std::vector<double> pts{0.25, 0.5, 0.75};
  CHECK(locate_interval(pts, 0.375) == 1);
  CHECK(locate_interval(pts, 0.25) == 1);
  CHECK(locate_interval(pts, 0.1) == 0);
  CHECK(locate_interval(pts, 0.75) == 3);
  CHECK(locate_interval(pts, 0.9) == 3);
}

TEST_CASE("tsg level for size") {
  CHECK(tsg_level_for_size(2, 5) == 2);
  CHECK(tsg_level_for_size(2, 16) == 2);
  CHECK(tsg_level_for_size(2, 17) == 3);
  CHECK(tsg_level_for_size(1, 1) == 1);
  CHECK_THROWS_AS(tsg_level_for_size(2, 0), InputError);
}
