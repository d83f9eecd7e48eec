#pragma once

// Diffusion-coefficient families a(r), r = u1/u2, and numerical certification of
// the structural assumptions
//
//   a(r) >= r |a'(r)|,     a(r) >= a0 / (r^p + r^-p)     for all r > 0.

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace xdiff {

enum class Family { Constant, Power, Saturating, Reciprocal, Custom };

std::string to_string(Family f);

/// Immutable description of a(r) together with its certified constants (a0, p).
///
/// Evaluation goes through log r so that quotients of tiny or huge densities never
/// overflow before a is applied; callers pass log(u1) - log(u2) where they can.
class CoefficientSpec {
 public:
  using Function = std::function<double(double)>;

  static CoefficientSpec constant();
  /// a(r) = r^alpha_c, 0 < alpha_c <= 1 for the assumptions to hold.
  static CoefficientSpec power(double alpha_c);
  /// a(r) = r^beta / (1 + r^(beta-1)).
  static CoefficientSpec saturating(double beta);
  /// a(r) = 1/r; turns the system into an energy-transport model.
  static CoefficientSpec reciprocal();
  /// User-supplied a(r). a' is a centered finite difference (flagged approximate).
  static CoefficientSpec custom(Function a, double a0, double p, std::string label = "custom");

  /// Replace the certified constants (for overrides from config files).
  CoefficientSpec with_constants(double a0, double p) const;

  Family family() const { return family_; }
  double parameter() const { return param_; }
  double a0() const { return a0_; }
  double p() const { return p_; }
  const std::string& label() const { return label_; }
  bool derivative_is_approximate() const { return family_ == Family::Custom; }

  /// a(r) for r = exp(log_r).
  double a_log(double log_r) const;
  /// r a'(r) for r = exp(log_r).
  double r_a_prime_log(double log_r) const;

 private:
  CoefficientSpec(Family family, double param, double a0, double p, std::string label);

  Family family_;
  double param_ = 0.0;
  double a0_ = 0.0;
  double p_ = 0.0;
  std::string label_;
  std::shared_ptr<const Function> custom_;
};

/// a(r). Throws DomainError unless r is positive and finite.
double eval_a(const CoefficientSpec& spec, double r);
/// a'(r); see CoefficientSpec::derivative_is_approximate.
double eval_a_prime(const CoefficientSpec& spec, double r);

/// 400 log-spaced points over [1e-6, 1e6].
std::vector<double> default_r_grid(std::size_t count = 400, double lo = 1e-6, double hi = 1e6);

struct AssumptionReport {
  /// min over the grid of (a - r|a'|)/a.
  double growth_margin = 0.0;
  /// min over the grid of (a (r^p + r^-p) - a0)/a0.
  double lower_bound_margin = 0.0;
  /// worst relative increase of a(r)/r between neighbouring grid points (<= 0 is fine).
  double a_over_r_violation = 0.0;
  /// worst relative decrease of a(r) r between neighbouring grid points (<= 0 is fine).
  double a_times_r_violation = 0.0;
  double worst_growth_r = 0.0;

  bool growth_ok = false;
  bool lower_bound_ok = false;
  bool monotonicity_ok = false;

  bool passed() const { return growth_ok && lower_bound_ok && monotonicity_ok; }
};

/// Relative slack used by the certification checks.
inline constexpr double kCertificationSlack = 1e-12;

AssumptionReport verify_assumptions(const CoefficientSpec& spec, std::span<const double> r_grid);

}  // namespace xdiff
