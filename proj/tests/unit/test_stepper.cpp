#include <cmath>
#include <numbers>

#include "doctest.h"
#include "xdiff/entropy.hpp"
#include "xdiff/errors.hpp"
#include "xdiff/random.hpp"
#include "xdiff/stepper.hpp"

using namespace xdiff;

namespace {

StateField wavy(int n, Vec2 mu = {0, 0}) {
  const PeriodicGrid g(1, n);
  Field u1(n), u2(n);
  for (int i = 0; i < n; ++i) {
    const double x = 2 * std::numbers::pi * g.coord(i);
    u1[i] = 1.0 + 0.5 * std::cos(x);
    u2[i] = 0.8 + 0.3 * std::sin(2 * x);
  }
  return {g, u1, u2, mu};
}

double max_diff(const StateField& a, const StateField& b) {
  double d = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (std::size_t k = 0; k < a.size(); ++k) {
      d = std::max(d, std::abs(a.component(c)[k] - b.component(c)[k]));
    }
  }
  return d;
}

}  // namespace

TEST_SUITE("stepper") {
  TEST_CASE("constant states are steady") {
    const auto spec = CoefficientSpec::power(0.5);
    const auto p = make_entropy_params(4.5, spec);
    SchemeConfig cfg;
    cfg.tau = 1e-2;
    cfg.regularization_weight = 0.0;
    const StateField c = StateField::uniform(PeriodicGrid(1, 16), {1.7, 0.6});
    CHECK(max_diff(step_entropy_implicit(c, spec, p, cfg).state, c) <= 1e-14);
    CHECK(max_diff(step_lagged_linear(c, spec, cfg).state, c) <= 1e-14);
    CHECK(entropy_dissipation(c, spec, p) == 0.0);
  }

  TEST_CASE("constant state with decay") {
    SchemeConfig cfg;
    cfg.tau = 0.05;
    const auto spec = CoefficientSpec::constant();
    const StateField c = StateField::uniform(PeriodicGrid(1, 8), {2.0, 3.0}, {-1, -1});
    const StateField next = step_lagged_linear(c, spec, cfg).state;
    CHECK(next.u1()[3] == doctest::Approx(2.0 / 1.05).epsilon(1e-14));
    CHECK(next.u2()[3] == doctest::Approx(3.0 / 1.05).epsilon(1e-14));
  }

  TEST_CASE("schemes agree for the constant coefficient") {
    // The entropy scheme averages A h''^-1 on faces, so it matches the heat stencil to O(dx^2).
    const auto spec = CoefficientSpec::constant();
    const auto p = make_entropy_params(4.0, spec);
    SchemeConfig cfg;
    cfg.tau = 1e-3;
    cfg.regularization_weight = 0.0;
    cfg.newton_tol = 1e-11;
    double prev = 0.0;
    for (int n : {128, 256, 512}) {
      const StateField s = wavy(n);
      const double d =
          max_diff(step_entropy_implicit(s, spec, p, cfg).state, step_lagged_linear(s, spec, cfg).state);
      if (prev > 0.0) CHECK(prev / d == doctest::Approx(4.0).epsilon(0.1));
      prev = d;
    }
    const StateField flat = StateField::uniform(PeriodicGrid(1, 32), {1.0, 2.0});
    CHECK(max_diff(step_entropy_implicit(flat, spec, p, cfg).state, step_lagged_linear(flat, spec, cfg).state) <=
          1e-8);
  }

  TEST_CASE("mass is conserved without regularization") {
    const auto spec = CoefficientSpec::power(0.5);
    const auto p = make_entropy_params(4.5, spec);
    SchemeConfig cfg;
    cfg.tau = 1e-3;
    cfg.t_end = 0.05;
    cfg.regularization_weight = 0.0;
    cfg.newton_tol = 1e-13;
    const RunArtifact run = simulate(wavy(64), spec, p, cfg);
    for (const auto& r : run.records) {
      CHECK(r.mass1 == doctest::Approx(run.records.front().mass1).epsilon(1e-10));
      CHECK(r.mass2 == doctest::Approx(run.records.front().mass2).epsilon(1e-10));
    }
  }

  TEST_CASE("entropy is nonincreasing and the inequality holds") {
    for (const auto& spec : {CoefficientSpec::power(0.5), CoefficientSpec::reciprocal()}) {
      const auto p = make_entropy_params(spec.p() + 4.0, spec);
      SchemeConfig cfg;
      cfg.tau = 2e-3;
      cfg.t_end = 0.1;
      const RunArtifact run = simulate(wavy(48), spec, p, cfg);
      for (std::size_t k = 1; k < run.records.size(); ++k) {
        CHECK(run.records[k].H <= run.records[k - 1].H * (1 + 1e-12));
      }
      for (const auto& s : run.steps) CHECK(s.dissipation >= 0.0);
      CHECK(entropy_inequality_report(run).passed);
      CHECK(run.final_state.is_positive());
    }
  }

  TEST_CASE("two-dimensional step") {
    const auto spec = CoefficientSpec::saturating(0.5);
    const auto p = make_entropy_params(spec.p() + 4.0, spec);
    const PeriodicGrid g(2, 12);
    Field u1(g.size()), u2(g.size());
    Rng rng(3);
    for (std::size_t k = 0; k < g.size(); ++k) {
      u1[k] = rng.uniform(0.5, 1.5);
      u2[k] = rng.uniform(0.5, 1.5);
    }
    SchemeConfig cfg;
    cfg.tau = 1e-3;
    cfg.m = default_regularization_order(2);
    const auto res = step_entropy_implicit({g, u1, u2}, spec, p, cfg);
    CHECK(res.state.is_positive());
    CHECK(res.report.entropy_after <= res.report.entropy_before);
  }

  TEST_CASE("configuration checks") {
    const auto spec = CoefficientSpec::constant();
    const auto p = make_entropy_params(4.0, spec);
    SchemeConfig cfg;
    CHECK_NOTHROW(validate(cfg, p, {0, 0}, 1));
    cfg.tau = -1.0;
    CHECK_THROWS_AS(validate(cfg, p, {0, 0}, 1), DomainError);
    cfg.tau = 1e-3;
    cfg.m = 1;
    CHECK_THROWS_AS(validate(cfg, p, {0, 0}, 2), DomainError);
    cfg.m = 2;
    cfg.tau = 0.5;
    CHECK_THROWS_AS(validate(cfg, p, {1, 1}, 1), DomainError);
  }
}
