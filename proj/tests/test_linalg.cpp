#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sgdlab/matrix.hpp"
#include "sgdlab/rng.hpp"

using namespace sgdlab;

TEST_CASE("svd of identity") {
  const auto sv = svd_singular_values(Matrix::identity(3));
  REQUIRE(sv.size() == 3);
  for (double s : sv) CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd of rank-1 outer product") {
  Matrix m(2, 2, {1, 2, 2, 4});
  const auto sv = svd_singular_values(m);
  CHECK(sv[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(sv[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
}

TEST_CASE("svd values match symmetric eigensolver oracle on random 8x5") {
  RngStream rng(42);
  const Matrix m = Matrix::gaussian(8, 5, rng);
  const auto sv = svd_singular_values(m);
  REQUIRE(sv.size() == 5);
  for (double s : sv) CHECK(s > 0.0);
  // Oracle: eigenvalues of m^T m.
  Matrix mtm(5, 5);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) mtm(i, j) = dot(m.column(i), m.column(j));
  const auto ev = oracles::symmetric_eigenvalues(mtm);
  for (std::size_t k = 0; k < 5; ++k)
    CHECK(sv[k] == doctest::Approx(std::sqrt(std::max(0.0, ev[k]))).epsilon(1e-10));
}

TEST_CASE("svd reconstruction error small") {
  RngStream rng(7);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{6, 9}, {9, 6}, {12, 12}}) {
    const Matrix m = Matrix::gaussian(r, c, rng);
    const SvdResult res = svd(m);
    double max_err = 0.0;
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        double v = 0.0;
        for (std::size_t k = 0; k < res.sigma.size(); ++k)
          v += res.u(i, k) * res.sigma[k] * res.v(j, k);
        max_err = std::max(max_err, std::abs(v - m(i, j)));
      }
    CHECK(max_err <= 1e-10 * res.sigma[0]);
  }
}

TEST_CASE("svd rejects non-finite input") {
  Matrix m(2, 2, {1, 2, 3, std::nan("")});
  CHECK_THROWS_AS(svd_singular_values(m), std::invalid_argument);
}

TEST_CASE("svd of transpose has the same values") {
  RngStream rng(3);
  const Matrix m = Matrix::gaussian(7, 4, rng);
  const auto a = svd_singular_values(m);
  const auto b = svd_singular_values(m.transposed());
  REQUIRE(a.size() == b.size());
  for (std::size_t k = 0; k < a.size(); ++k)
    CHECK(a[k] == doctest::Approx(b[k]).epsilon(1e-12));
}

TEST_CASE("largest singular value matches power iteration on random 20x20") {
  for (std::uint64_t seed : {11u, 12u, 13u, 14u, 15u}) {
    RngStream rng(seed);
    const Matrix m = Matrix::gaussian(20, 20, rng);
    const double sigma1 = svd_singular_values(m)[0];
    const double pi = oracles::operator_norm_power_iteration(m);
    CHECK(std::abs(sigma1 - pi) <= 1e-8 * sigma1);
  }
}

TEST_CASE("pearson basics") {
  std::vector<double> a{1, 2, 3};
  CHECK(*pearson(a, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0));
  CHECK(*pearson(a, std::vector<double>{3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(!pearson(std::vector<double>{1, 1, 1}, a).has_value());
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST_CASE("pearson symmetry and affine property") {
  RngStream rng(99);
  for (int rep = 0; rep < 50; ++rep) {
    const auto a = rng.gaussian(10);
    const auto b = rng.gaussian(10);
    const auto pab = pearson(a, b);
    const auto pba = pearson(b, a);
    CHECK(*pab == doctest::Approx(*pba).epsilon(1e-14));
    const double alpha = rng.uniform(-2.0, 2.0);
    if (std::abs(alpha) < 1e-3) continue;
    const double beta = rng.uniform(-1.0, 1.0);
    std::vector<double> affine(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) affine[i] = alpha * a[i] + beta;
    CHECK(*pearson(a, affine) ==
          doctest::Approx(alpha > 0 ? 1.0 : -1.0).epsilon(1e-10));
  }
}

TEST_CASE("gaussian stream determinism and counter advance") {
  RngStream a(123), b(123);
  const auto xs = a.gaussian(100);
  const auto ys = b.gaussian(100);
  CHECK(xs == ys);
  CHECK(a.counter() == 100);
  // Replay from an offset counter reproduces the tail.
  RngStream c(123, 40);
  const auto tail = c.gaussian(60);
  for (std::size_t i = 0; i < 60; ++i) CHECK(tail[i] == xs[40 + i]);
}

TEST_CASE("gaussian stream moments across 10 seeds") {
  const std::size_t n = 1000000;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RngStream rng(seed * 7919);
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double z = rng.gaussian();
      sum += z;
      sum_sq += z * z;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum_sq / static_cast<double>(n) - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 0.01);
  }
}
