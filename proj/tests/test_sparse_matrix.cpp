#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tmsk/errors.hpp"
#include "tmsk/sparse_matrix.hpp"

using namespace tmsk;

namespace {

SparseSymMatrix from_dense(const Eigen::MatrixXd& a) {
  std::vector<Triplet> t;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i; j < a.cols(); ++j)
      if (a(i, j) != 0.0) t.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), a(i, j)});
  return SparseSymMatrix::from_upper(static_cast<std::size_t>(a.rows()), t);
}

Eigen::MatrixXd dense_factor(const LowerTriangularFactor& l) {
  const auto n = static_cast<Eigen::Index>(l.order());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t j = 0; j < l.order(); ++j)
    for (std::size_t k = l.colptr()[j]; k < l.colptr()[j + 1]; ++k)
      L(static_cast<Eigen::Index>(l.rows()[k]), static_cast<Eigen::Index>(j)) = l.values()[k];
  return L;
}

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double fill) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), coin(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng) < fill) a(i, j) = a(j, i) = u(rng);
  for (int i = 0; i < n; ++i) a(i, i) = a.row(i).cwiseAbs().sum() + 1.0;
  return a;
}

}  // namespace

TEST_CASE("symmetric storage") {
  const auto m = SparseSymMatrix::from_upper(3, {{0, 0, 2.0}, {0, 2, -1.0}, {1, 1, 0.0}, {2, 2, 5.0}});
  CHECK(m.stored() == 3);
  CHECK(m.nnz() == 4);
  CHECK(m.at(2, 0) == -1.0);
  CHECK(m.at(1, 1) == 0.0);
  CHECK_FALSE(m.contains(1, 1));
  CHECK(m.contains(2, 0));
  const auto y = m.multiply(std::vector<double>{1.0, 1.0, 1.0});
  CHECK(y == std::vector<double>{1.0, 0.0, 4.0});
  for (const auto& t : m.upper_entries()) CHECK(t.row <= t.col);
  CHECK_THROWS_AS(SparseSymMatrix::from_upper(2, {{1, 0, 1.0}}), InputError);
  CHECK_THROWS_AS(SparseSymMatrix::from_upper(2, {{0, 1, 1.0}, {0, 1, 2.0}}), InputError);
  CHECK_THROWS_AS(SparseSymMatrix::from_upper(2, {{0, 0, std::nan("")}}), NumericalError);
}

TEST_CASE("builder drops cancelled entries") {
  SymmetricBuilder b(3);
  b.add(0, 1, 1.0);
  b.add(1, 0, -1.0);
  b.add(2, 2, 0.5);
  b.add(0, 0, 1.0);
  b.add(0, 0, -1.0 + 1e-16);
  b.add(1, 2, 0.3);
  const auto m = b.finalize(1e-13);
  CHECK_FALSE(m.contains(0, 1));
  CHECK_FALSE(m.contains(0, 0));
  CHECK(m.at(2, 2) == 0.5);
  CHECK(m.at(2, 1) == 0.3);

  VectorAccumulator v(4);
  v.add(3, 1.0);
  v.add(1, 2.0);
  v.add(3, -1.0);
  const auto s = v.finalize(1e-13);
  CHECK(s.idx == std::vector<std::size_t>{1});
  CHECK(s.dot(std::vector<double>{1, 1, 1, 1}) == 2.0);
}

TEST_CASE("sparsity report") {
  SymmetricBuilder b(100);
  for (std::size_t i = 0; i < 100; ++i) {
    b.add(i, i, 2.0);
    if (i + 1 < 100) b.add(i, i + 1, -1.0);
  }
  const auto r = sparsity_report(b.finalize(0.0));
  CHECK(r.nnz == 298);
  CHECK(r.density == doctest::Approx(0.0298));

  Eigen::MatrixXd g(3, 3);
  g << 2, 1, 0.5, 1, 3, 0.2, 0.5, 0.2, 4;
  CHECK(sparsity_report(from_dense(Eigen::MatrixXd(g.inverse()))).density == 1.0);
}

TEST_CASE("cholesky small cases") {
  const auto id = sparse_cholesky(SparseSymMatrix::from_upper(3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}}));
  CHECK(id.nnz() == 3);
  CHECK(id.at(1, 1) == 1.0);
  const auto d = sparse_cholesky(SparseSymMatrix::from_upper(2, {{0, 0, 4.0}, {1, 1, 9.0}}));
  CHECK(d.at(0, 0) == 2.0);
  CHECK(d.at(1, 1) == 3.0);
  CHECK(d.at(1, 0) == 0.0);
  CHECK_THROWS_AS(sparse_cholesky(SparseSymMatrix::from_upper(2, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 1, 1.0}})),
                  NotPositiveDefiniteError);
}

TEST_CASE("triangular solves") {
  const auto l = LowerTriangularFactor::from_dense(2, std::vector<double>{2, 0, 1, 3});
  const auto y = solve_lower(l, std::vector<double>{4, 7});
  CHECK(y[0] == 2.0);
  CHECK(y[1] == doctest::Approx(5.0 / 3.0));
  const auto id = LowerTriangularFactor::from_dense(2, std::vector<double>{1, 0, 0, 1});
  CHECK(solve_lower(id, std::vector<double>{3, 4}) == std::vector<double>{3, 4});
  CHECK(solve_upper(id, std::vector<double>{3, 4}) == std::vector<double>{3, 4});
}

TEST_CASE("cholesky reconstructs random SPD matrices") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 10; ++t) {
    const int n = 20 + 5 * t;
    const Eigen::MatrixXd a = random_spd(n, rng, t % 2 ? 0.1 : 0.4);
    const auto s = from_dense(a);
    const auto l = sparse_cholesky(s);
    const Eigen::MatrixXd L = dense_factor(l);
    CHECK((L * L.transpose() - a).norm() <= 1e-10 * a.norm());
    for (std::size_t j = 0; j < l.order(); ++j) CHECK(l.rows()[l.colptr()[j]] == j);

    Eigen::VectorXd rhs = Eigen::VectorXd::Random(n);
    std::vector<double> r(rhs.data(), rhs.data() + n);
    const auto z = solve_upper(l, solve_lower(l, r));
    const Eigen::VectorXd want = a.ldlt().solve(rhs);
    for (int i = 0; i < n; ++i) CHECK(z[i] == doctest::Approx(want(i)).epsilon(1e-10).scale(1.0));
  }
}
