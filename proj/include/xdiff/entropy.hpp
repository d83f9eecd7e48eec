#pragma once

// Entropy density
//
//   h(u) = (u1/u2)^alpha u1^2 + (u1/u2)^-alpha u2^2 + u1 - log u1 + u2 - log u2
//
// with its gradient (the entropy variables w = h'(u)), Hessian, the inverse of h',
// and the quantified lower bound for the symmetric part of h''(u) A(u).

#include <cstdint>
#include <optional>

#include "xdiff/coeffs.hpp"
#include "xdiff/linalg2.hpp"

namespace xdiff {

class StateField;

struct EntropyParams {
  double alpha = 4.0;
};

/// Validates alpha >= p + 4 for the coefficient's certified p.
EntropyParams make_entropy_params(double alpha, const CoefficientSpec& spec);

/// Exponents are clamped to +-700 before exp(); see exponent_clamped.
inline constexpr double kExponentClamp = 700.0;

/// True when evaluating h, h' or h'' at u would hit the exponent clamp.
bool exponent_clamped(const Vec2& u, const EntropyParams& params);

double entropy_density(const Vec2& u, const EntropyParams& params);
Vec2 entropy_gradient(const Vec2& u, const EntropyParams& params);
/// h''(u) as the sum of the three positive definite pieces.
Mat2 entropy_hessian(const Vec2& u, const EntropyParams& params);

struct InvertOptions {
  double tol = 1e-12;
  int max_iter = 100;
  /// Starting point; (1,1) when absent.
  std::optional<Vec2> initial_guess;
};

/// Solves h'(u) = w for u in (0,inf)^2 by damped Newton in log coordinates.
/// Converged when |h'(u) - w|_inf <= tol (1 + |w|_inf). Throws NonConvergence.
Vec2 invert_gradient(const Vec2& w, const EntropyParams& params, const InvertOptions& opts = {});

/// Midpoint quadrature of h over the grid. Parallel over cells.
double entropy_functional(const StateField& field, const EntropyParams& params);

/// k(alpha) = (alpha(alpha+2) - 1)/(alpha+2)^2.
double k_alpha(double alpha);
/// kappa = a0 k(alpha) / 4.
double structure_kappa(const CoefficientSpec& spec, const EntropyParams& params);
/// C_h = 2(alpha+2)(|mu1| + |mu2|).
double source_constant(const EntropyParams& params, const Vec2& mu);

/// z^T h''(u) A(u) z.
double structure_quotient(const Vec2& u, const Vec2& z, const CoefficientSpec& spec,
                          const EntropyParams& params);
/// kappa (r^(alpha-p) + r^(p-alpha)) |z|^2.
double structure_lower_bound(const Vec2& u, const Vec2& z, const CoefficientSpec& spec,
                             const EntropyParams& params);

struct StructureBoundReport {
  double kappa = 0.0;
  /// min over samples of quotient - bound.
  double min_margin = 0.0;
  /// min over samples of (quotient - bound) / max(|quotient|, bound).
  double min_relative_margin = 0.0;
  std::size_t samples = 0;
};

/// Samples u log-uniformly in [1e-4, 1e4]^2 and z uniformly on the unit circle.
StructureBoundReport structure_bound_check(const CoefficientSpec& spec, const EntropyParams& params,
                                           std::size_t n_samples, std::uint64_t rng_seed);

struct DerivativeCheckReport {
  /// max over samples of |h'_fd - h'|_inf / |h'|_inf.
  double gradient_rel_error = 0.0;
  /// max over samples of |h''_fd - h''|_max / |h''|_max.
  double hessian_rel_error = 0.0;
  /// min over samples of lambda_min(h'') / lambda_max(h'').
  double min_hessian_eigen_ratio = 0.0;
  /// max over samples and components of |u_i - (h')^{-1}(h'(u))_i| / u_i.
  double roundtrip_rel_error = 0.0;
  std::size_t samples = 0;
};

/// Central finite differences of h and h' (relative step 1e-5) against the closed
/// forms, and the h' -> (h')^{-1} roundtrip, at u log-uniform in [lo, hi]^2.
DerivativeCheckReport derivative_check(const EntropyParams& params, std::size_t n_samples,
                                       std::uint64_t rng_seed, double lo = 1e-2, double hi = 1e2);

namespace serial {
double entropy_functional(const StateField& field, const EntropyParams& params);
}

}  // namespace xdiff
