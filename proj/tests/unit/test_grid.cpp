#include <cmath>
#include <numbers>

#include "doctest.h"
#include "xdiff/grid.hpp"
#include "xdiff/random.hpp"

using namespace xdiff;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Field random_field(const PeriodicGrid& g, std::uint64_t seed) {
  Rng rng(seed);
  Field f(g.size());
  for (double& v : f) v = rng.uniform(-1, 1);
  return f;
}

Field cosine(const PeriodicGrid& g) {
  Field f(g.size());
  for (int i = 0; i < g.n(); ++i) f[i] = std::cos(kTwoPi * g.coord(i));
  return f;
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("laplacian of a constant vanishes") {
    for (int d : {1, 2}) {
      const PeriodicGrid g(d, 16);
      for (double v : laplacian(Field(g.size(), 3.5), g)) CHECK(v == 0.0);
    }
  }

  TEST_CASE("laplacian of a Fourier mode") {
    double prev = 0.0;
    for (int n : {64, 128, 256}) {
      const PeriodicGrid g(1, n);
      const Field f = cosine(g);
      const Field lap = laplacian(f, g);
      const double dx = g.dx();
      const double discrete = -(2.0 / (dx * dx)) * (1.0 - std::cos(kTwoPi * dx));
      CHECK(first_eigenvalue(g) == doctest::Approx(-discrete).epsilon(1e-14));
      double err = 0.0;
      for (int i = 0; i < n; ++i) {
        CHECK(lap[i] == doctest::Approx(discrete * f[i]).epsilon(1e-9).scale(1.0));
        err = std::max(err, std::abs(lap[i] + kTwoPi * kTwoPi * f[i]));
      }
      CHECK(err <= std::pow(kTwoPi * dx, 2) * kTwoPi * kTwoPi / 12.0 * 1.01);
      if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.01));
      prev = err;
    }
  }

  TEST_CASE("laplacian sums to zero") {
    for (int d : {1, 2}) {
      const PeriodicGrid g(d, 32);
      const Field f = random_field(g, 3 + d);
      double s = 0.0;
      for (double v : laplacian(f, g)) s += v;
      CHECK(std::abs(s) * g.cell_volume() <= 1e-12 * norm_l2(f, g) / (g.dx() * g.dx()));
    }
  }

  TEST_CASE("parallel and serial laplacian agree") {
    for (int d : {1, 2}) {
      const PeriodicGrid g(d, d == 1 ? 4096 : 96);
      const Field f = random_field(g, 17);
      const Field a = laplacian(f, g);
      const Field b = serial::laplacian(f, g);
      for (std::size_t k = 0; k < a.size(); ++k) REQUIRE(a[k] == doctest::Approx(b[k]).epsilon(1e-13));
    }
  }

  TEST_CASE("summation by parts") {
    for (int d : {1, 2}) {
      const PeriodicGrid g(d, 24);
      const Field f = random_field(g, 1), h = random_field(g, 2);
      const Field lap = laplacian(f, g);
      double lhs = 0.0, rhs = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        lhs += h[k] * lap[k];
        for (int axis = 0; axis < d; ++axis) {
          const std::size_t kp = g.neighbor(k, axis, +1);
          rhs += (f[kp] - f[k]) * (h[kp] - h[k]) / (g.dx() * g.dx());
        }
      }
      CHECK(lhs == doctest::Approx(-rhs).epsilon(1e-12));
    }
  }

  TEST_CASE("Poisson solve") {
    const PeriodicGrid g(1, 128);
    const Field rhs = cosine(g);
    const auto sol = poisson_solve(rhs, g);
    const double l1 = first_eigenvalue(g);
    for (int i = 0; i < g.n(); ++i) CHECK(sol.phi[i] == doctest::Approx(rhs[i] / l1).scale(1.0).epsilon(1e-12));

    for (double v : poisson_solve(Field(g.size(), 0.0), g).phi) CHECK(v == 0.0);

    for (int d : {1, 2}) {
      const PeriodicGrid gd(d, 32);
      const Field r = random_field(gd, 40 + d);
      const auto s = poisson_solve(r, gd);
      const Field back = laplacian(s.phi, gd);
      const double m = mean(r);
      CHECK(s.removed_mean == doctest::Approx(m).scale(1.0).epsilon(1e-14));
      for (std::size_t k = 0; k < r.size(); ++k) REQUIRE(std::abs(-back[k] - (r[k] - m)) <= 1e-12);
    }
  }

  TEST_CASE("norms of simple fields") {
    for (int d : {1, 2}) {
      const PeriodicGrid g(d, 16);
      const Field c(g.size(), -2.5);
      CHECK(norm_l2(c, g) == doctest::Approx(2.5));
      CHECK(seminorm_h1(c, g) == 0.0);
      CHECK(norm_hminus1(c, g) == doctest::Approx(2.5));
    }
    const PeriodicGrid g(1, 64);
    CHECK(norm_l2(cosine(g), g) == doctest::Approx(1.0 / std::sqrt(2.0)));
  }

  TEST_CASE("norm properties") {
    const PeriodicGrid g(2, 24);
    const double bound = std::max(1.0, 1.0 / std::sqrt(first_eigenvalue(g)));
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Field f = random_field(g, s), h = random_field(g, s + 100);
      Field sum(g.size()), scaled(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) {
        sum[k] = f[k] + h[k];
        scaled[k] = -3.0 * f[k];
      }
      CHECK(norm_hminus1(f, g) <= bound * norm_l2(f, g) * (1 + 1e-12));
      for (auto norm : {&norm_l2, &seminorm_h1, &norm_hminus1}) {
        CHECK(norm(scaled, g) == doctest::Approx(3.0 * norm(f, g)));
        CHECK(norm(sum, g) <= (norm(f, g) + norm(h, g)) * (1 + 1e-12));
      }
    }
  }

  TEST_CASE("shape mismatch is rejected") {
    const PeriodicGrid g(1, 8);
    CHECK_THROWS(laplacian(Field(7, 0.0), g));
    CHECK_THROWS(PeriodicGrid(1, 2));
  }
}
