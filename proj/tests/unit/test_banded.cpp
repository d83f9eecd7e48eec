#include <cmath>
#include <vector>

#include "doctest.h"
#include "xdiff/banded.hpp"
#include "xdiff/random.hpp"

using namespace xdiff;

namespace {

struct Bands {
  std::vector<double> lower, diag, upper;
};

Bands random_bands(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Bands b{std::vector<double>(n), std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    b.lower[k] = rng.uniform(-1, 1);
    b.upper[k] = rng.uniform(-1, 1);
    b.diag[k] = 2.5 + rng.uniform(0, 1);
  }
  return b;
}

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1, 1);
  return v;
}

double residual(const Bands& b, const std::vector<double>& x, const std::vector<double>& rhs,
                bool periodic) {
  const std::size_t n = x.size();
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double r = b.diag[k] * x[k] - rhs[k];
    if (k > 0) r += b.lower[k] * x[k - 1];
    else if (periodic) r += b.lower[k] * x[n - 1];
    if (k + 1 < n) r += b.upper[k] * x[k + 1];
    else if (periodic) r += b.upper[k] * x[0];
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

}  // namespace

TEST_SUITE("banded") {
  TEST_CASE("open tridiagonal solve") {
    for (std::size_t n : {1u, 2u, 7u, 200u}) {
      const Bands b = random_bands(n, n);
      const auto rhs = random_vec(n, n + 1);
      CHECK(residual(b, solve_tridiagonal(b.lower, b.diag, b.upper, rhs), rhs, false) <= 1e-13);
    }
  }

  TEST_CASE("periodic tridiagonal solve") {
    for (std::size_t n : {3u, 4u, 31u, 256u}) {
      const Bands b = random_bands(n, 10 * n);
      const auto rhs = random_vec(n, n + 3);
      CHECK(residual(b, solve_periodic_tridiagonal(b.lower, b.diag, b.upper, rhs), rhs, true) <= 1e-13);
    }
  }

  TEST_CASE("factor classes match the one-shot solvers") {
    const std::size_t n = 64, batch = 5;
    const Bands b = random_bands(n, 77);
    const TridiagonalFactor tf(b.lower, b.diag, b.upper);
    const PeriodicTridiagonalFactor pf(b.lower, b.diag, b.upper);
    std::vector<double> data(n * batch);
    std::vector<std::vector<double>> cols;
    for (std::size_t c = 0; c < batch; ++c) {
      cols.push_back(random_vec(n, 500 + c));
      for (std::size_t k = 0; k < n; ++k) data[k * batch + c] = cols[c][k];
    }
    tf.solve_batch(data, batch);
    for (std::size_t c = 0; c < batch; ++c) {
      const auto ref = solve_tridiagonal(b.lower, b.diag, b.upper, cols[c]);
      auto single = cols[c];
      tf.solve_inplace(single);
      auto periodic = cols[c];
      pf.solve_inplace(periodic);
      const auto pref = solve_periodic_tridiagonal(b.lower, b.diag, b.upper, cols[c]);
      for (std::size_t k = 0; k < n; ++k) {
        CHECK(data[k * batch + c] == doctest::Approx(ref[k]).epsilon(1e-14));
        CHECK(single[k] == doctest::Approx(ref[k]).epsilon(1e-14));
        CHECK(periodic[k] == doctest::Approx(pref[k]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("bad input") {
    const std::vector<double> one{1.0}, two{1.0, 1.0};
    CHECK_THROWS(solve_tridiagonal(one, two, two, two));
    CHECK_THROWS(solve_periodic_tridiagonal(two, two, two, two));
    const std::vector<double> zero{0.0, 0.0};
    CHECK_THROWS(solve_tridiagonal(zero, zero, zero, two));
  }
}
