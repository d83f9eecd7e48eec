#include "xdiff/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "xdiff/errors.hpp"

namespace xdiff {
namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_positive_finite(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw DomainError("coefficient argument r must be positive and finite, got " +
                      std::to_string(r));
  }
}

// a(r) (r^p + r^-p) at r = exp(L).
double lower_bound_product(const CoefficientSpec& spec, double p, double log_r) {
  return spec.a_log(log_r) * 2.0 * std::cosh(p * log_r);
}

// Certified a0 for the saturating family: minimum of a(r)(r^p + r^-p), refined by a
// golden-section search around the best grid point and shaved by a relative 1e-6.
double saturating_a0(const CoefficientSpec& spec, double p) {
  const auto grid = default_r_grid();
  std::size_t best = 0;
  double best_val = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = lower_bound_product(spec, p, std::log(grid[k]));
    if (v < best_val) {
      best_val = v;
      best = k;
    }
  }
  double lo = std::log(grid[best == 0 ? 0 : best - 1]);
  double hi = std::log(grid[std::min(best + 1, grid.size() - 1)]);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = lower_bound_product(spec, p, x1);
  double f2 = lower_bound_product(spec, p, x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = lower_bound_product(spec, p, x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = lower_bound_product(spec, p, x2);
    }
  }
  best_val = std::min({best_val, f1, f2});
  return best_val * (1.0 - 1e-6);
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::Constant: return "constant";
    case Family::Power: return "power";
    case Family::Saturating: return "saturating";
    case Family::Reciprocal: return "reciprocal";
    case Family::Custom: return "custom";
  }
  return "unknown";
}

CoefficientSpec::CoefficientSpec(Family family, double param, double a0, double p,
                                 std::string label)
    : family_(family), param_(param), a0_(a0), p_(p), label_(std::move(label)) {}

CoefficientSpec CoefficientSpec::constant() { return {Family::Constant, 0.0, 2.0, 0.0, "constant"}; }

CoefficientSpec CoefficientSpec::power(double alpha_c) {
  if (!(alpha_c > 0.0) || !std::isfinite(alpha_c)) {
    throw DomainError("power family needs alpha_c > 0");
  }
  return {Family::Power, alpha_c, 1.0, alpha_c, "power"};
}

CoefficientSpec CoefficientSpec::saturating(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("saturating family needs beta > 0");
  }
  // Near r -> 0 the coefficient behaves like min(r, r^beta), so p = beta alone only
  // works for beta >= 1; p = max(1, beta) covers both ends.
  const double p = std::max(1.0, beta);
  CoefficientSpec spec{Family::Saturating, beta, 1.0, p, "saturating"};
  spec.a0_ = saturating_a0(spec, p);
  return spec;
}

CoefficientSpec CoefficientSpec::reciprocal() {
  return {Family::Reciprocal, 0.0, 1.0, 1.0, "reciprocal"};
}

CoefficientSpec CoefficientSpec::custom(Function a, double a0, double p, std::string label) {
  if (!a) throw std::invalid_argument("custom coefficient needs a callable");
  if (!(a0 > 0.0) || !(p >= 0.0)) {
    throw DomainError("custom coefficient needs explicit a0 > 0 and p >= 0");
  }
  CoefficientSpec spec{Family::Custom, 0.0, a0, p, std::move(label)};
  spec.custom_ = std::make_shared<const Function>(std::move(a));
  return spec;
}

CoefficientSpec CoefficientSpec::with_constants(double a0, double p) const {
  if (!(a0 > 0.0) || !(p >= 0.0)) throw DomainError("certified constants need a0 > 0, p >= 0");
  CoefficientSpec copy = *this;
  copy.a0_ = a0;
  copy.p_ = p;
  return copy;
}

double CoefficientSpec::a_log(double log_r) const {
  switch (family_) {
    case Family::Constant: return 1.0;
    case Family::Power: return std::exp(param_ * log_r);
    case Family::Saturating: return std::exp(param_ * log_r - softplus((param_ - 1.0) * log_r));
    case Family::Reciprocal: return std::exp(-log_r);
    case Family::Custom: return (*custom_)(std::exp(log_r));
  }
  return 0.0;
}

double CoefficientSpec::r_a_prime_log(double log_r) const {
  switch (family_) {
    case Family::Constant: return 0.0;
    case Family::Power: return param_ * std::exp(param_ * log_r);
    case Family::Saturating: {
      // r a' = a (beta + s)/(1 + s) with s = r^(beta-1)
      const double t = (param_ - 1.0) * log_r;
      return a_log(log_r) * (param_ * logistic(-t) + logistic(t));
    }
    case Family::Reciprocal: return -std::exp(-log_r);
    case Family::Custom: {
      const double r = std::exp(log_r);
      return r * eval_a_prime(*this, r);
    }
  }
  return 0.0;
}

double eval_a(const CoefficientSpec& spec, double r) {
  require_positive_finite(r);
  switch (spec.family()) {
    case Family::Constant: return 1.0;
    case Family::Power: return std::pow(r, spec.parameter());
    case Family::Reciprocal: return 1.0 / r;
    case Family::Saturating: return spec.a_log(std::log(r));
    case Family::Custom: return spec.a_log(std::log(r));
  }
  return 0.0;
}

double eval_a_prime(const CoefficientSpec& spec, double r) {
  require_positive_finite(r);
  switch (spec.family()) {
    case Family::Constant: return 0.0;
    case Family::Power: return spec.parameter() * std::pow(r, spec.parameter() - 1.0);
    case Family::Reciprocal: return -1.0 / (r * r);
    case Family::Saturating: {
      const double log_r = std::log(r);
      return spec.r_a_prime_log(log_r) / r;
    }
    case Family::Custom: {
      const double h = 1e-6 * r;
      return (spec.a_log(std::log(r + h)) - spec.a_log(std::log(r - h))) / (2.0 * h);
    }
  }
  return 0.0;
}

std::vector<double> default_r_grid(std::size_t count, double lo, double hi) {
  if (count < 2 || !(lo > 0.0) || !(hi > lo)) {
    throw std::invalid_argument("r grid needs count >= 2 and 0 < lo < hi");
  }
  std::vector<double> grid(count);
  const double llo = std::log(lo);
  const double step = (std::log(hi) - llo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) grid[k] = std::exp(llo + step * static_cast<double>(k));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

AssumptionReport verify_assumptions(const CoefficientSpec& spec, std::span<const double> r_grid) {
  if (r_grid.empty()) throw std::invalid_argument("verify_assumptions: empty r grid");
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    require_positive_finite(r_grid[k]);
    if (k > 0 && !(r_grid[k] > r_grid[k - 1])) {
      throw std::invalid_argument("verify_assumptions: r grid must be strictly increasing");
    }
  }

  AssumptionReport report;
  report.growth_margin = std::numeric_limits<double>::infinity();
  report.lower_bound_margin = std::numeric_limits<double>::infinity();
  report.a_over_r_violation = -std::numeric_limits<double>::infinity();
  report.a_times_r_violation = -std::numeric_limits<double>::infinity();

  double prev_over = 0.0, prev_times = 0.0;
  for (std::size_t k = 0; k < r_grid.size(); ++k) {
    const double r = r_grid[k];
    const double a = eval_a(spec, r);
    const double ra = r * std::abs(eval_a_prime(spec, r));
    const double growth = (a - ra) / std::abs(a);
    if (growth < report.growth_margin || std::isnan(growth)) {
      report.growth_margin = growth;
      report.worst_growth_r = r;
    }
    const double lower = (a * (std::pow(r, spec.p()) + std::pow(r, -spec.p())) - spec.a0()) / spec.a0();
    report.lower_bound_margin = std::min(report.lower_bound_margin, lower);

    const double over = a / r;
    const double times = a * r;
    if (k > 0) {
      report.a_over_r_violation =
          std::max(report.a_over_r_violation, (over - prev_over) / std::abs(prev_over));
      report.a_times_r_violation =
          std::max(report.a_times_r_violation, (prev_times - times) / std::abs(prev_times));
    }
    prev_over = over;
    prev_times = times;
  }
  if (r_grid.size() == 1) {
    report.a_over_r_violation = 0.0;
    report.a_times_r_violation = 0.0;
  }

  report.growth_ok = report.growth_margin >= -kCertificationSlack;
  report.lower_bound_ok = report.lower_bound_margin >= -kCertificationSlack;
  report.monotonicity_ok = report.a_over_r_violation <= kCertificationSlack &&
                           report.a_times_r_violation <= kCertificationSlack;
  return report;
}

}  // namespace xdiff
