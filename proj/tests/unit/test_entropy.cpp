#include <cmath>

#include "doctest.h"
#include "xdiff/entropy.hpp"
#include "xdiff/random.hpp"
#include "xdiff/system.hpp"

using namespace xdiff;

namespace {
const double kH21 = 64.0 + 1.0 / 16.0 + (2.0 - std::log(2.0)) + 1.0;
}

TEST_SUITE("entropy") {
  TEST_CASE("density at sample points") {
    const auto c = CoefficientSpec::constant();
    for (double alpha : {4.0, 6.5, 9.0}) {
      CHECK(entropy_density({1, 1}, make_entropy_params(alpha, c)) == doctest::Approx(4.0));
    }
    const auto p4 = make_entropy_params(4.0, c);
    CHECK(entropy_density({2, 1}, p4) == doctest::Approx(kH21).epsilon(1e-14));
    CHECK(entropy_density({1, 2}, p4) == doctest::Approx(kH21).epsilon(1e-14));
  }

  TEST_CASE("gradient at the identity point") {
    for (double alpha : {4.0, 5.0, 7.25}) {
      const Vec2 g = entropy_gradient({1, 1}, make_entropy_params(alpha, CoefficientSpec::constant()));
      CHECK(g[0] == doctest::Approx(2.0));
      CHECK(g[1] == doctest::Approx(2.0));
    }
  }

  TEST_CASE("gradient matches central differences at (2,1)") {
    const auto p = make_entropy_params(4.0, CoefficientSpec::constant());
    const Vec2 u{2, 1};
    const Vec2 g = entropy_gradient(u, p);
    for (int i = 0; i < 2; ++i) {
      Vec2 up = u, dn = u;
      const double h = 1e-6;
      up[i] += h;
      dn[i] -= h;
      const double fd = (entropy_density(up, p) - entropy_density(dn, p)) / (2 * h);
      CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6));
    }
  }

  TEST_CASE("Hessian at the identity point") {
    const Mat2 H = entropy_hessian({1, 1}, make_entropy_params(4.0, CoefficientSpec::constant()));
    CHECK(H.a11 == doctest::Approx(51.0));
    CHECK(H.a22 == doctest::Approx(51.0));
    CHECK(H.a12 == doctest::Approx(-48.0));
    CHECK(H.a21 == doctest::Approx(-48.0));
    const Vec2 ev = symmetric_eigenvalues(H);
    CHECK(std::min(ev[0], ev[1]) == doctest::Approx(3.0));
    CHECK(std::max(ev[0], ev[1]) == doctest::Approx(99.0));
  }

  TEST_CASE("finite-difference derivative check") {
    const auto rep = derivative_check(make_entropy_params(5.0, CoefficientSpec::constant()), 1000, 3);
    CHECK(rep.gradient_rel_error <= 1e-6);
    CHECK(rep.hessian_rel_error <= 1e-6);
    CHECK(rep.min_hessian_eigen_ratio > 0.0);
    CHECK(rep.roundtrip_rel_error <= 1e-8);
  }

  TEST_CASE("convexity on random states") {
    Rng rng(11);
    const auto p = make_entropy_params(4.5, CoefficientSpec::power(0.5));
    for (int k = 0; k < 10000; ++k) {
      const Vec2 u{rng.log_uniform(1e-3, 1e3), rng.log_uniform(1e-3, 1e3)};
      const Mat2 H = entropy_hessian(u, p);
      REQUIRE(H.det() > 0.0);
      REQUIRE(H.trace() > 0.0);
    }
  }

  TEST_CASE("gradient inversion") {
    const auto p = make_entropy_params(4.0, CoefficientSpec::constant());
    const Vec2 one = invert_gradient({2, 2}, p);
    CHECK(one[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(one[1] == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(5);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const Vec2 u{rng.log_uniform(1e-3, 1e3), rng.log_uniform(1e-3, 1e3)};
      const Vec2 back = invert_gradient(entropy_gradient(u, p), p);
      worst = std::max({worst, std::abs(back[0] / u[0] - 1), std::abs(back[1] / u[1] - 1)});
    }
    CHECK(worst <= 1e-8);

    const auto p5 = make_entropy_params(5.0, CoefficientSpec::constant());
    const Vec2 minimizer = invert_gradient({0, 0}, p5);
    CHECK(norm_inf(entropy_gradient(minimizer, p5)) <= 1e-12);
  }

  TEST_CASE("entropy functional") {
    const PeriodicGrid grid(1, 16);
    const auto p = make_entropy_params(4.0, CoefficientSpec::constant());
    CHECK(entropy_functional(StateField::uniform(grid, {1, 1}), p) == doctest::Approx(4.0));
    CHECK(entropy_functional(StateField::uniform(grid, {2, 1}), p) == doctest::Approx(kH21));

    Rng rng(9);
    Field u1(grid.size()), u2(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      u1[k] = rng.log_uniform(1e-2, 1e2);
      u2[k] = rng.log_uniform(1e-2, 1e2);
    }
    const StateField s(grid, u1, u2);
    const double l1 = norm_l2(u1, grid), l2 = norm_l2(u2, grid);
    CHECK(entropy_functional(s, p) >= 0.5 * (l1 * l1 + l2 * l2));
    CHECK(entropy_functional(s, p) == serial::entropy_functional(s, p));
  }

  TEST_CASE("structure constant") {
    const auto pw = CoefficientSpec::power(0.5);
    CHECK(structure_kappa(pw, make_entropy_params(4.5, pw)) ==
          doctest::Approx(28.25 / 42.25 / 4.0).epsilon(1e-12));
    const auto c2 = CoefficientSpec::constant().with_constants(2.0, 0.0);
    CHECK(structure_kappa(c2, make_entropy_params(4.0, c2)) == doctest::Approx(23.0 / 72.0));
    CHECK(k_alpha(4.0) == doctest::Approx(23.0 / 36.0));
    CHECK(source_constant(make_entropy_params(4.0, c2), {1.0, -0.5}) == doctest::Approx(18.0));
  }

  TEST_CASE("structure inequality") {
    const auto pw = CoefficientSpec::power(0.5);
    const auto p = make_entropy_params(4.5, pw);
    CHECK(structure_quotient({1.3, 0.4}, {0, 0}, pw, p) == 0.0);
    CHECK(structure_lower_bound({1.3, 0.4}, {0, 0}, pw, p) == 0.0);
    for (const auto& spec : {pw, CoefficientSpec::constant().with_constants(2.0, 0.0)}) {
      const auto rep = structure_bound_check(spec, make_entropy_params(spec.p() + 4.0, spec), 10000, 1);
      CHECK(rep.min_relative_margin >= -1e-12);
    }
  }

  TEST_CASE("alpha below p + 4 is rejected") {
    CHECK_THROWS(make_entropy_params(4.0, CoefficientSpec::power(0.5)));
    CHECK_NOTHROW(make_entropy_params(4.5, CoefficientSpec::power(0.5)));
  }
}
