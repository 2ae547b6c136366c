#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tmsk/errors.hpp"
#include "tmsk/gm_kernels.hpp"

using namespace tmsk;

TEST_CASE("one-dimensional kernel values") {
  CHECK(GaussMarkov1D::brownian_motion()(0.25, 0.75) == doctest::Approx(0.25));
  CHECK(GaussMarkov1D::laplace(1.0)(0.3, 0.3) == 1.0);
  CHECK(GaussMarkov1D::brownian_bridge(1.0)(0.25, 0.5) == doctest::Approx(0.125));
  const auto ab = GaussMarkov1D::affine_brownian(0.5, 2.0);
  CHECK(ab(0.2, 0.7) == doctest::Approx(0.5 + 2.0 * 0.2));
}

TEST_CASE("kernel domain is enforced") {
  CHECK_THROWS_AS(GaussMarkov1D::brownian_motion()(0.0, 0.5), InputError);
  CHECK_THROWS_AS(GaussMarkov1D::brownian_bridge(1.0)(0.5, 1.0), InputError);
  CHECK_NOTHROW(GaussMarkov1D::laplace(2.0)(-3.0, 4.0));
  CHECK_THROWS_AS(GaussMarkov1D::laplace(0.0), InputError);
  CHECK_THROWS_AS(GaussMarkov1D::brownian_bridge(-1.0), InputError);
  CHECK_THROWS_AS(GaussMarkov1D::affine_brownian(-0.1, 1.0), InputError);
}

TEST_CASE("tensor kernel values") {
  const auto lap = TMKernel::broadcast(GaussMarkov1D::laplace(1.0), 2);
  std::vector<double> x{0.2, 0.4}, y{0.5, 0.4};
  CHECK(lap(x, y) == doctest::Approx(std::exp(-0.3)).epsilon(1e-15));

  const auto bm = TMKernel::broadcast(GaussMarkov1D::brownian_motion(), 2);
  std::vector<double> a{0.25, 0.5}, b{0.5, 0.25};
  CHECK(bm(a, b) == doctest::Approx(0.0625));

  const TMKernel mixed({GaussMarkov1D::brownian_motion(), GaussMarkov1D::brownian_bridge(1.0)});
  std::vector<double> z{0.3, 0.6};
  CHECK(mixed.diagonal(z) == doctest::Approx(0.3 * 0.6 * 0.4));

  std::vector<double> bad{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(lap(x, bad), InputError);
}

TEST_CASE("cross term matches the factor-pair determinant") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.01, 0.99);
  for (const auto& k : oracle::kernel_zoo()) {
    for (int t = 0; t < 200; ++t) {
      double a = u(rng), b = u(rng);
      if (a > b) std::swap(a, b);
      const double det = k.p(b) * k.q(a) - k.p(a) * k.q(b);
      CHECK(k.cross(a, b) == doctest::Approx(det).epsilon(1e-9).scale(1e-12));
      CHECK(k.cross(a, b) >= 0.0);
    }
    CHECK(k.cross(Node::left(), Node::right()) == 1.0);
    CHECK(k.cross(Node::left(), Node::at(0.3)) == doctest::Approx(k.p(0.3)));
    CHECK(k.cross(Node::at(0.3), Node::right()) == doctest::Approx(k.q(0.3)));
  }
}

TEST_CASE("symmetry over random pairs") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  const TMKernel tm({GaussMarkov1D::laplace(1.3), GaussMarkov1D::brownian_motion(), GaussMarkov1D::brownian_bridge(1.0)});
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> x{u(rng), u(rng), u(rng)}, y{u(rng), u(rng), u(rng)};
    const double a = tm(x, y), b = tm(y, x);
    CHECK(std::abs(a - b) <= 1e-15 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("Laplace product identity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TMKernel tm({GaussMarkov1D::laplace(0.5), GaussMarkov1D::laplace(2.0), GaussMarkov1D::laplace(1.0)});
  const double th[3] = {0.5, 2.0, 1.0};
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x{u(rng), u(rng), u(rng)}, y{u(rng), u(rng), u(rng)};
    double s = 0.0;
    for (int j = 0; j < 3; ++j) s += th[j] * std::abs(x[j] - y[j]);
    CHECK(tm(x, y) == doctest::Approx(std::exp(-s)).epsilon(1e-14));
  }
}

TEST_CASE("Gram matrices are positive semidefinite") {
  std::mt19937_64 rng(21);
  for (const auto& k : oracle::kernel_zoo()) {
    const auto tm = TMKernel::broadcast(k, 2);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 20; ++i) pts.push_back(oracle::random_point(2, rng));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(oracle::gram(tm, pts));
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("validate_markov") {
  CHECK(validate_markov(GaussMarkov1D::laplace(2.0), 100).pass);
  CHECK(validate_markov(GaussMarkov1D::brownian_motion(), 100).pass);
  CHECK(validate_markov(GaussMarkov1D::brownian_bridge(1.0), 100).pass);
  const auto bad = validate_markov([](double x) { return 2.0 * x; }, [](double x) { return x; }, 50);
  CHECK_FALSE(bad.pass);
  REQUIRE(bad.first_violation.has_value());
  CHECK(bad.first_violation->first == doctest::Approx(1.0 / 51.0));
  CHECK(bad.first_violation->second == doctest::Approx(2.0 / 51.0));
  const auto neg = validate_markov([](double x) { return x - 0.5; }, [](double) { return 1.0; }, 10);
  CHECK_FALSE(neg.pass);
  CHECK_THROWS_AS(validate_markov(GaussMarkov1D::brownian_motion(), 1), InputError);
}

TEST_CASE("domain map round trip") {
  const DomainMap m({-4.0, 0.0}, {4.0, 2.0});
  std::vector<double> x{1.5, 0.3};
  const auto u = m.to_unit(x);
  CHECK(u[0] == doctest::Approx(5.5 / 8.0));
  const auto back = m.from_unit(u);
  CHECK(back[0] == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(back[1] == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(DomainMap({1.0}, {1.0}), InputError);
}

TEST_CASE("kernel spec parsing") {
  const auto tm = parse_kernel_spec("laplace:2", 3);
  CHECK(tm.dim() == 3);
  CHECK(tm.component(2).family() == KernelFamily::Laplace);
  CHECK(tm.component(2).param0() == 2.0);
  const auto mixed = parse_kernel_spec("bm; bb:1 ;affinebm:0.5,2", 3);
  CHECK(mixed.component(0).family() == KernelFamily::BrownianMotion);
  CHECK(mixed.component(1).family() == KernelFamily::BrownianBridge);
  CHECK(mixed.component(2).param1() == 2.0);
  CHECK_THROWS_AS(parse_kernel_spec("bm;bm", 3), InputError);
  CHECK_THROWS_AS(parse_kernel_spec("matern:1", 1), InputError);
  CHECK_THROWS_AS(parse_kernel_spec("laplace", 1), InputError);
  CHECK_THROWS_AS(parse_kernel_spec("laplace:x", 1), InputError);
  CHECK(parse_component_spec(tm.component(0).to_string()).param0() == 2.0);
}
