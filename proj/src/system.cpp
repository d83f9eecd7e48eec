#include "xdiff/system.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "xdiff/errors.hpp"
#include "xdiff/random.hpp"

namespace xdiff {
namespace {

void require_positive_pair(const Vec2& u) {
  if (!(u[0] > 0.0) || !(u[1] > 0.0) || !std::isfinite(u[0]) || !std::isfinite(u[1])) {
    throw DomainError("state must be positive and finite");
  }
}

Vec2 random_state(Rng& rng) { return {rng.log_uniform(1e-4, 1e4), rng.log_uniform(1e-4, 1e4)}; }

}  // namespace

StateField::StateField(PeriodicGrid grid, Field u1, Field u2, Vec2 mu)
    : grid_(grid), u1_(std::move(u1)), u2_(std::move(u2)), mu_(mu) {
  if (u1_.size() != grid_.size() || u2_.size() != grid_.size()) {
    throw DomainError("StateField: component shapes do not match the grid");
  }
}

StateField StateField::uniform(PeriodicGrid grid, Vec2 value, Vec2 mu) {
  return {grid, Field(grid.size(), value[0]), Field(grid.size(), value[1]), mu};
}

bool StateField::is_positive() const {
  for (std::size_t k = 0; k < size(); ++k) {
    if (!(u1_[k] > 0.0) || !(u2_[k] > 0.0) || !std::isfinite(u1_[k]) || !std::isfinite(u2_[k])) {
      return false;
    }
  }
  return true;
}

void StateField::require_positive() const {
  if (!is_positive()) throw DomainError("StateField: non-positive or non-finite cell");
}

Vec2 StateField::minima() const {
  return {*std::min_element(u1_.begin(), u1_.end()), *std::min_element(u2_.begin(), u2_.end())};
}

double coefficient_at(const Vec2& u, const CoefficientSpec& spec) {
  require_positive_pair(u);
  return spec.a_log(std::log(u[0]) - std::log(u[1]));
}

Mat2 diffusion_matrix(const Vec2& u, const CoefficientSpec& spec) {
  require_positive_pair(u);
  const double log_r = std::log(u[0]) - std::log(u[1]);
  const double a = spec.a_log(log_r);
  const double ra = spec.r_a_prime_log(log_r);  // r a'(r)
  const double r = std::exp(log_r);
  // a' = (r a') / r and r^2 a' = r (r a'), each formed with a single power of r.
  return {a + ra, -r * ra, ra / r, a - ra};
}

Mat2 mobility_matrix(const Vec2& u, const CoefficientSpec& spec, const EntropyParams& params) {
  const Mat2 hess = entropy_hessian(u, params);
  const double det = hess.det();
  if (!(det >= 1e-300) || !std::isfinite(det)) {
    throw NumericError("mobility_matrix: entropy Hessian is near-singular at (" +
                       std::to_string(u[0]) + ", " + std::to_string(u[1]) + "), det = " +
                       std::to_string(det));
  }
  return diffusion_matrix(u, spec) * inverse(hess);
}

std::pair<Field, Field> flux_density(const StateField& field, const CoefficientSpec& spec) {
  field.require_positive();
  const std::size_t n = field.size();
  Field f1(n), f2(n);
  const auto& u1 = field.u1();
  const auto& u2 = field.u2();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    const double a = spec.a_log(std::log(u1[k]) - std::log(u2[k]));
    f1[k] = a * u1[k];
    f2[k] = a * u2[k];
  }
  return {std::move(f1), std::move(f2)};
}

std::pair<Field, Field> source_term(const StateField& field) {
  const Vec2 mu = field.mu();
  Field s1(field.u1()), s2(field.u2());
  for (double& v : s1) v *= mu[0];
  for (double& v : s2) v *= mu[1];
  return {std::move(s1), std::move(s2)};
}

std::pair<Field, Field> energy_transport_transform(const StateField& field) {
  field.require_positive();
  Field n(field.u1()), theta(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) theta[k] = field.u2()[k] / field.u1()[k];
  return {std::move(n), std::move(theta)};
}

PetrovskiReport petrovski_check(const CoefficientSpec& spec, std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("petrovski_check: need samples >= 1");
  Rng rng(seed);
  PetrovskiReport report;
  report.samples = samples;
  report.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec2 u = random_state(rng);
    report.min_eigenvalue = std::min(report.min_eigenvalue, coefficient_at(u, spec));
  }
  report.passed = report.min_eigenvalue >= 0.0;
  return report;
}

MatrixBoundReport matrix_bound_check(const CoefficientSpec& spec, std::size_t samples,
                                     std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("matrix_bound_check: need samples >= 1");
  Rng rng(seed);
  MatrixBoundReport report;
  report.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec2 u = random_state(rng);
    const double r = u[0] / u[1];
    const double ratio = diffusion_matrix(u, spec).abs_sum() / (1.0 + r * r + 1.0 / (r * r));
    report.c_a = std::max(report.c_a, ratio);
  }
  report.finite = std::isfinite(report.c_a);
  return report;
}

QuadraticGrowthReport quadratic_growth_check(const CoefficientSpec& spec, std::size_t samples,
                                             std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("quadratic_growth_check: need samples >= 1");
  Rng rng(seed);
  QuadraticGrowthReport report;
  report.samples = samples;
  const double a1 = eval_a(spec, 1.0);
  report.c_a = a1 * a1;
  report.min_relative_margin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < samples; ++s) {
    const Vec2 u = random_state(rng);
    const double a = coefficient_at(u, spec);
    const double s2 = u[0] * u[0] + u[1] * u[1];
    const double lhs = a * a * s2;
    const double rhs = report.c_a * (s2 + std::pow(u[0], 4) / (u[1] * u[1]) +
                                     std::pow(u[1], 4) / (u[0] * u[0]));
    report.min_relative_margin = std::min(report.min_relative_margin, (rhs - lhs) / rhs);
  }
  report.passed = report.min_relative_margin >= -kCertificationSlack;
  return report;
}

}  // namespace xdiff
