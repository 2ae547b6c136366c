#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tmsk/errors.hpp"
#include "tmsk/hier_basis.hpp"
#include "tmsk/kriging.hpp"

using namespace tmsk;

namespace {

Dataset noisy_dataset(const TruncatedSparseGrid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi), y(-1.0, 1.0);
  std::vector<double> means(g.size());
  for (auto& m : means) m = y(rng);
  Dataset data = make_dataset(g, means);
  for (std::size_t i = 0; i < g.size(); ++i) {
    data.reps[i] = 4;
    data.variances[i] = 4.0 * u(rng);
  }
  return data;
}

}  // namespace

TEST_CASE("sample statistics") {
  const auto s = sample_stats({{2, 2, 2}, {1, 3}, {7}});
  CHECK(s.means == std::vector<double>{2, 2, 7});
  CHECK(s.variances[0] == 0.0);
  CHECK(s.variances[1] == 2.0);
  CHECK(s.variances[2] == 0.0);
  CHECK(s.single_replication);
  CHECK_THROWS_AS(sample_stats({{1.0}, {}}), InputError);

  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(5.0, 2.0);
  std::vector<double> draws(10000);
  for (auto& v : draws) v = nd(rng);
  const auto big = sample_stats({draws});
  CHECK(std::abs(big.means[0] - 5.0) < 0.1);
  CHECK(std::abs(big.variances[0] - 4.0) < 0.2);
}

TEST_CASE("noise model") {
  auto data = make_dataset(truncated_sg(1, 3), {1, 2, 3});
  data.variances = {0.2, 0.4, 0.6};
  data.reps = {2, 4, 6};
  const auto nm = NoiseModel::from_dataset(data, NoiseMode::Estimated);
  CHECK(nm.sigma[1] == doctest::Approx(0.1));
  data.reps[0] = 1;
  CHECK_THROWS_AS(NoiseModel::from_dataset(data, NoiseMode::Estimated), InputError);
  CHECK_NOTHROW(NoiseModel::from_dataset(data, NoiseMode::Known));

  const auto tm = TMKernel::broadcast(GaussMarkov1D::brownian_motion(), 1);
  CHECK_THROWS_AS(fit(tm, data, NoiseModel::diagonal({0.1, 0.0, 0.1})), InputError);
  const auto auto_noiseless = fit(tm, data, NoiseModel::diagonal({0.0, 0.0, 0.0}));
  CHECK(auto_noiseless.noise().mode == NoiseMode::Noiseless);
  CHECK(auto_noiseless.factor() == nullptr);
}

TEST_CASE("one-point closed form") {
  const auto tm = TMKernel::broadcast(GaussMarkov1D::brownian_motion(), 1);
  const auto model = fit(tm, make_dataset(truncated_sg(1, 1), {1.0}), NoiseModel::noiseless(1));
  const auto p = model.predict(std::vector<double>{0.25});
  CHECK(p.mean == doctest::Approx(0.5));
  CHECK(p.mse == doctest::Approx(0.125));
  const auto node = model.predict(std::vector<double>{0.5});
  CHECK(node.mean == doctest::Approx(1.0));
  CHECK(node.mse == 0.0);

  const auto ref = dense_reference(tm, make_dataset(truncated_sg(1, 1), {1.0}), NoiseModel::noiseless(1),
                                   {{0.25}});
  CHECK(ref[0].mean == doctest::Approx(0.5));
  CHECK(ref[0].mse == doctest::Approx(0.125));
}

TEST_CASE("noiseless interpolation") {
  std::mt19937_64 rng(12);
  for (const auto& k : oracle::kernel_zoo()) {
    for (int d = 1; d <= 3; ++d) {
      const auto g = truncated_sg(d, 40, 3);
      std::vector<double> y(g.size());
      std::normal_distribution<double> nd;
      for (auto& v : y) v = nd(rng);
      const auto model = fit(TMKernel::broadcast(k, static_cast<std::size_t>(d)), make_dataset(g, y),
                             NoiseModel::noiseless(g.size()));
      for (std::size_t r = 0; r < g.size(); ++r) {
        const auto p = model.predict(g.point(r));
        CHECK(std::abs(p.mean - y[r]) <= 1e-9);
        CHECK(p.mse <= 1e-10);
        CHECK(p.mse >= 0.0);
      }
    }
  }
}

TEST_CASE("fast predictor equals the dense reference") {
  std::mt19937_64 rng(99);
  const auto tm = TMKernel::broadcast(GaussMarkov1D::laplace(1.0), 2);
  const auto g = truncated_sg(2, 17);
  auto data = noisy_dataset(g, rng, 0.1, 0.1);
  for (auto& r : data.reps) r = 1;
  for (auto& v : data.variances) v = 0.1;
  const auto noise = NoiseModel::from_dataset(data, NoiseMode::Known);
  const auto model = fit(tm, data, noise);
  std::vector<std::vector<double>> xs;
  for (int t = 0; t < 50; ++t) xs.push_back(oracle::random_point(2, rng));
  const auto fast = model.predict_batch(xs);
  const auto ref = dense_reference(tm, data, noise, xs);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    CHECK(std::abs(fast[t].mean - ref[t].mean) <= 1e-8);
    CHECK(std::abs(fast[t].mse - ref[t].mse) <= 1e-8);
    CHECK(fast[t].mse >= 0.0);
  }

  // Cholesky factor reproduces K^{-1} + Sigma^{-1}.
  const auto* L = model.factor();
  REQUIRE(L != nullptr);
  std::vector<double> sinv(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) sinv[i] = 1.0 / noise.sigma[i];
  const Eigen::MatrixXd M = oracle::dense(model.kinv().plus_diagonal(sinv));
  Eigen::MatrixXd Ld = Eigen::MatrixXd::Zero(M.rows(), M.cols());
  for (std::size_t j = 0; j < L->order(); ++j)
    for (std::size_t k = L->colptr()[j]; k < L->colptr()[j + 1]; ++k)
      Ld(static_cast<Eigen::Index>(L->rows()[k]), static_cast<Eigen::Index>(j)) = L->values()[k];
  CHECK((Ld * Ld.transpose() - M).norm() <= 1e-10 * M.norm());
}

TEST_CASE("heteroscedastic d=3 oracle") {
  std::mt19937_64 rng(5);
  const TMKernel tm({GaussMarkov1D::laplace(0.5), GaussMarkov1D::brownian_motion(), GaussMarkov1D::laplace(2.0)});
  const auto g = truncated_sg(3, 200, 1);
  const auto data = noisy_dataset(g, rng, 0.01, 0.1);
  const auto noise = NoiseModel::from_dataset(data, NoiseMode::Estimated);
  const auto model = fit(tm, data, noise);
  std::vector<std::vector<double>> xs;
  for (int t = 0; t < 30; ++t) xs.push_back(oracle::random_point(3, rng));
  const auto fast = model.predict_batch(xs);
  const auto ref = dense_reference(tm, data, noise, xs);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    CHECK(std::abs(fast[t].mean - ref[t].mean) <= 1e-8);
    CHECK(std::abs(fast[t].mse - ref[t].mse) <= 1e-8);
  }
}

TEST_CASE("huge noise returns the prior mean") {
  std::mt19937_64 rng(6);
  const auto tm = TMKernel::broadcast(GaussMarkov1D::laplace(1.0), 2);
  const auto g = truncated_sg(2, 17);
  auto data = noisy_dataset(g, rng, 0.1, 0.1);
  const auto model = fit(tm, data, NoiseModel::diagonal(std::vector<double>(g.size(), 1e9)));
  for (int t = 0; t < 20; ++t) CHECK(std::abs(model.predict(oracle::random_point(2, rng)).mean) <= 1e-3);
}

TEST_CASE("batch prediction") {
  std::mt19937_64 rng(7);
  const auto tm = TMKernel::broadcast(GaussMarkov1D::laplace(1.0), 2);
  const auto g = truncated_sg(2, 49);
  const auto data = noisy_dataset(g, rng, 0.01, 0.1);
  const auto model = fit(tm, data, NoiseModel::from_dataset(data, NoiseMode::Known));
  std::vector<std::vector<double>> xs;
  for (int t = 0; t < 1000; ++t) xs.push_back(oracle::random_point(2, rng));
  const auto serial = model.predict_batch(xs, 1);
  const auto parallel = model.predict_batch(xs, 4);
  for (std::size_t t = 0; t < xs.size(); ++t) {
    CHECK(serial[t].mean == parallel[t].mean);
    CHECK(serial[t].mse == parallel[t].mse);
  }
  const auto one = model.predict_batch({xs[0]});
  CHECK(one[0].mean == model.predict(xs[0]).mean);
  CHECK(model.predict_batch({}).empty());
}

TEST_CASE("domain clamp") {
  const auto tm = TMKernel::broadcast(GaussMarkov1D::brownian_motion(), 1);
  auto data = make_dataset(truncated_sg(1, 3), {1, 2, 3});
  data.domain = DomainMap::cube(1, -1.0, 1.0);
  const auto model = fit(tm, data, NoiseModel::noiseless(3));
  const auto p = model.predict(std::vector<double>{-1.0});
  CHECK(p.clamped);
  CHECK(std::isfinite(p.mean));
  CHECK(p.mse >= 0.0);
  CHECK_FALSE(model.predict(std::vector<double>{0.0}).clamped);
  CHECK(model.predict(std::vector<double>{0.0}).mean == doctest::Approx(1.0));  // row 0 is the level-1 node
}

TEST_CASE("mse bounded below by the truncated expansion") {
  std::mt19937_64 rng(31);
  const auto tm = TMKernel::broadcast(GaussMarkov1D::laplace(1.0), 2);
  const auto g = truncated_sg(2, 24, 2);
  const auto model = fit(tm, make_dataset(g, std::vector<double>(g.size(), 0.0)), NoiseModel::noiseless(g.size()));
  for (int t = 0; t < 20; ++t) {
    const auto x = oracle::random_point(2, rng);
    const double mse = model.predict(x).mse;
    for (int cap = 5; cap <= 14; cap += 3) CHECK(mse >= posterior_variance_oracle(tm, g, x, cap) - 1e-9);
  }
}

TEST_CASE("budget allocation") {
  CHECK(allocate_budget(1000).n == 10);
  CHECK(allocate_budget(1000).m == 100);
  CHECK(allocate_budget(8).n == 2);
  CHECK(allocate_budget(8).m == 4);
  CHECK(allocate_budget(100000, true).n == 10);
  CHECK(allocate_budget(100000, true).m == 10000);
  for (std::size_t b = 2; b < 500; ++b) {
    const auto s = allocate_budget(b);
    CHECK(s.n * s.m <= b);
    CHECK(s.n >= 1);
    CHECK(s.m >= 1);
  }
}

TEST_CASE("dense reference cap") {
  const auto tm = TMKernel::broadcast(GaussMarkov1D::laplace(1.0), 2);
  const auto g = truncated_sg(2, 20);
  NumericPolicy policy;
  policy.dense_cap = 10;
  CHECK_THROWS_AS(dense_reference(tm, make_dataset(g, std::vector<double>(20, 0.0)), NoiseModel::noiseless(20),
                                  {{0.5, 0.5}}, policy),
                  ResourceError);
}
