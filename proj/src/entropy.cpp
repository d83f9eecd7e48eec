#include "xdiff/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "xdiff/errors.hpp"
#include "xdiff/random.hpp"
#include "xdiff/system.hpp"

namespace xdiff {
namespace {

double cexp(double x) { return std::exp(std::clamp(x, -kExponentClamp, kExponentClamp)); }

void require_positive(const Vec2& u) {
  if (!(u[0] > 0.0) || !(u[1] > 0.0) || !std::isfinite(u[0]) || !std::isfinite(u[1])) {
    throw DomainError("entropy: state must be positive and finite, got (" + std::to_string(u[0]) +
                      ", " + std::to_string(u[1]) + ")");
  }
}

struct Logs {
  double l1, l2, q;
};

Logs logs_of(const Vec2& u) {
  const double l1 = std::log(u[0]);
  const double l2 = std::log(u[1]);
  return {l1, l2, l1 - l2};
}

// h'(e^xi) and the Jacobian d h'/d xi = h''(u) diag(u).
struct LogResidual {
  Vec2 grad;
  Mat2 jac;
};

LogResidual log_residual(const Vec2& xi, const EntropyParams& params) {
  const Vec2 u{std::exp(xi[0]), std::exp(xi[1])};
  const Mat2 hess = entropy_hessian(u, params);
  return {entropy_gradient(u, params),
          {hess.a11 * u[0], hess.a12 * u[1], hess.a21 * u[0], hess.a22 * u[1]}};
}

}  // namespace

EntropyParams make_entropy_params(double alpha, const CoefficientSpec& spec) {
  if (!std::isfinite(alpha) || alpha < spec.p() + 4.0) {
    throw DomainError("entropy exponent alpha = " + std::to_string(alpha) +
                      " violates the existence hypothesis alpha >= p + 4 (p = " +
                      std::to_string(spec.p()) + " for the " + spec.label() + " coefficient)");
  }
  return EntropyParams{alpha};
}

bool exponent_clamped(const Vec2& u, const EntropyParams& params) {
  const auto [l1, l2, q] = logs_of(u);
  const double a = params.alpha;
  for (double e : {a * q + 2.0 * l1, -a * q + 2.0 * l2, a * q + l1, -a * q + 2.0 * l2 - l1,
                   -a * q + l2, a * q + 2.0 * l1 - l2, (a + 2.0) * q, -(a + 2.0) * q}) {
    if (std::abs(e) > kExponentClamp) return true;
  }
  return false;
}

double entropy_density(const Vec2& u, const EntropyParams& params) {
  require_positive(u);
  const auto [l1, l2, q] = logs_of(u);
  const double a = params.alpha;
  return cexp(a * q + 2.0 * l1) + cexp(-a * q + 2.0 * l2) + (u[0] - l1) + (u[1] - l2);
}

Vec2 entropy_gradient(const Vec2& u, const EntropyParams& params) {
  require_positive(u);
  const auto [l1, l2, q] = logs_of(u);
  const double a = params.alpha;
  const double d1 = (a + 2.0) * cexp(a * q + l1) - a * cexp(-a * q + 2.0 * l2 - l1) - 1.0 / u[0] + 1.0;
  const double d2 = (a + 2.0) * cexp(-a * q + l2) - a * cexp(a * q + 2.0 * l1 - l2) - 1.0 / u[1] + 1.0;
  return {d1, d2};
}

Mat2 entropy_hessian(const Vec2& u, const EntropyParams& params) {
  require_positive(u);
  const double q = std::log(u[0]) - std::log(u[1]);
  const double a = params.alpha;
  const double c1 = (a + 2.0) * (a + 1.0);
  const double c2 = a * (a + 2.0);
  const double c3 = a * (a + 1.0);
  const double off1 = -c2 * cexp((a + 1.0) * q);
  const double off2 = -c2 * cexp(-(a + 1.0) * q);
  const Mat2 h1{c1 * cexp(a * q), off1, off1, c3 * cexp((a + 2.0) * q)};
  const Mat2 h2{c3 * cexp(-(a + 2.0) * q), off2, off2, c1 * cexp(-a * q)};
  const Mat2 h3{1.0 / (u[0] * u[0]), 0.0, 0.0, 1.0 / (u[1] * u[1])};
  return h1 + h2 + h3;
}

Vec2 invert_gradient(const Vec2& w, const EntropyParams& params, const InvertOptions& opts) {
  if (!(opts.tol > 0.0) || opts.max_iter < 1) {
    throw std::invalid_argument("invert_gradient: tol must be positive and max_iter >= 1");
  }
  if (!std::isfinite(w[0]) || !std::isfinite(w[1])) {
    throw DomainError("invert_gradient: entropy variable must be finite");
  }
  constexpr double kMaxLogStep = 2.0;
  constexpr int kMaxHalvings = 30;
  const double target = opts.tol * (1.0 + norm_inf(w));

  Vec2 xi{0.0, 0.0};
  if (opts.initial_guess) {
    require_positive(*opts.initial_guess);
    xi = {std::log((*opts.initial_guess)[0]), std::log((*opts.initial_guess)[1])};
  }

  // Newton runs on G(xi) = asinh(h'(e^xi)) - asinh(w). Same root, but the dominant
  // exponentials become roughly linear in xi, so far-away starts still make progress.
  const Vec2 target_g{std::asinh(w[0]), std::asinh(w[1])};
  struct Eval {
    LogResidual lr;
    Vec2 f;  // h'(u) - w
    Vec2 g;  // asinh(h'(u)) - asinh(w)
  };
  auto evaluate = [&](const Vec2& x) {
    Eval e{log_residual(x, params), {}, {}};
    e.f = {e.lr.grad[0] - w[0], e.lr.grad[1] - w[1]};
    e.g = {std::asinh(e.lr.grad[0]) - target_g[0], std::asinh(e.lr.grad[1]) - target_g[1]};
    return e;
  };
  Eval current = evaluate(xi);
  double merit = std::hypot(current.g[0], current.g[1]);

  for (int it = 0; it < opts.max_iter; ++it) {
    const Vec2 d{1.0 / std::hypot(1.0, current.lr.grad[0]), 1.0 / std::hypot(1.0, current.lr.grad[1])};
    const Mat2& j = current.lr.jac;
    const Mat2 jg{d[0] * j.a11, d[0] * j.a12, d[1] * j.a21, d[1] * j.a22};
    const double det = jg.det();
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) break;
    Vec2 step = inverse(jg) * Vec2{-current.g[0], -current.g[1]};
    const double step_norm = norm_inf(step);
    if (!std::isfinite(step_norm)) break;
    if (step_norm > kMaxLogStep) {
      step[0] *= kMaxLogStep / step_norm;
      step[1] *= kMaxLogStep / step_norm;
    }

    bool accepted = false;
    double t = 1.0;
    for (int halving = 0; halving <= kMaxHalvings; ++halving, t *= 0.5) {
      const Vec2 trial{xi[0] + t * step[0], xi[1] + t * step[1]};
      Eval cand = evaluate(trial);
      const double cand_merit = std::hypot(cand.g[0], cand.g[1]);
      if (cand_merit < merit) {
        xi = trial;
        current = cand;
        merit = cand_merit;
        accepted = true;
        break;
      }
    }
    // Converged once the residual is within tolerance and the log-step has
    // collapsed; when no step lowers the residual any more we are at rounding level.
    const double res_norm = norm_inf(current.f);
    if (res_norm <= target && (!accepted || t * norm_inf(step) <= 1e-7)) {
      return {std::exp(xi[0]), std::exp(xi[1])};
    }
    if (!accepted) break;
  }
  const double res_norm = norm_inf(current.f);
  if (res_norm <= target) return {std::exp(xi[0]), std::exp(xi[1])};
  throw NonConvergence("invert_gradient: no convergence (residual " + std::to_string(res_norm) + ")",
                       {std::exp(xi[0]), std::exp(xi[1])}, res_norm);
}

double entropy_functional(const StateField& field, const EntropyParams& params) {
  const std::size_t n = field.size();
  std::vector<double> cell(n);
  const auto& u1 = field.u1();
  const auto& u2 = field.u2();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
    cell[k] = entropy_density({u1[k], u2[k]}, params);
  }
  // Sequential sum keeps the result independent of the thread count.
  double sum = 0.0;
  for (double v : cell) sum += v;
  return sum * field.grid().cell_volume();
}

namespace serial {
double entropy_functional(const StateField& field, const EntropyParams& params) {
  double sum = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) sum += entropy_density(field.at(k), params);
  return sum * field.grid().cell_volume();
}
}  // namespace serial

double k_alpha(double alpha) { return (alpha * (alpha + 2.0) - 1.0) / ((alpha + 2.0) * (alpha + 2.0)); }

double structure_kappa(const CoefficientSpec& spec, const EntropyParams& params) {
  return spec.a0() * k_alpha(params.alpha) / 4.0;
}

double source_constant(const EntropyParams& params, const Vec2& mu) {
  return 2.0 * (params.alpha + 2.0) * (std::abs(mu[0]) + std::abs(mu[1]));
}

double structure_quotient(const Vec2& u, const Vec2& z, const CoefficientSpec& spec,
                          const EntropyParams& params) {
  const Mat2 m = entropy_hessian(u, params) * diffusion_matrix(u, spec);
  return dot(z, m * z);
}

double structure_lower_bound(const Vec2& u, const Vec2& z, const CoefficientSpec& spec,
                             const EntropyParams& params) {
  require_positive(u);
  const double q = std::log(u[0]) - std::log(u[1]);
  const double e = params.alpha - spec.p();
  return structure_kappa(spec, params) * (cexp(e * q) + cexp(-e * q)) * dot(z, z);
}

StructureBoundReport structure_bound_check(const CoefficientSpec& spec, const EntropyParams& params,
                                           std::size_t n_samples, std::uint64_t rng_seed) {
  if (n_samples < 1) throw std::invalid_argument("structure_bound_check: need n_samples >= 1");
  Rng rng(rng_seed);
  StructureBoundReport report;
  report.kappa = structure_kappa(spec, params);
  report.samples = n_samples;
  report.min_margin = std::numeric_limits<double>::infinity();
  report.min_relative_margin = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vec2 u{rng.log_uniform(1e-4, 1e4), rng.log_uniform(1e-4, 1e4)};
    const Vec2 z = rng.unit_vector();
    const double quotient = structure_quotient(u, z, spec, params);
    const double bound = structure_lower_bound(u, z, spec, params);
    const double margin = quotient - bound;
    const double scale = std::max({std::abs(quotient), std::abs(bound),
                                   std::numeric_limits<double>::min()});
    report.min_margin = std::min(report.min_margin, margin);
    report.min_relative_margin = std::min(report.min_relative_margin, margin / scale);
  }
  return report;
}

DerivativeCheckReport derivative_check(const EntropyParams& params, std::size_t n_samples,
                                       std::uint64_t rng_seed, double lo, double hi) {
  if (n_samples < 1) throw std::invalid_argument("derivative_check: need n_samples >= 1");
  Rng rng(rng_seed);
  DerivativeCheckReport report;
  report.samples = n_samples;
  report.min_hessian_eigen_ratio = std::numeric_limits<double>::infinity();
  constexpr double rel_step = 1e-5;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Vec2 u{rng.log_uniform(lo, hi), rng.log_uniform(lo, hi)};
    const Vec2 g = entropy_gradient(u, params);
    const Mat2 hess = entropy_hessian(u, params);

    Vec2 g_fd{};
    Vec2 col[2];
    for (int i = 0; i < 2; ++i) {
      const double step = rel_step * u[i];
      Vec2 up = u, dn = u;
      up[i] += step;
      dn[i] -= step;
      g_fd[i] = (entropy_density(up, params) - entropy_density(dn, params)) / (2.0 * step);
      const Vec2 gu = entropy_gradient(up, params);
      const Vec2 gd = entropy_gradient(dn, params);
      col[i] = {(gu[0] - gd[0]) / (2.0 * step), (gu[1] - gd[1]) / (2.0 * step)};
    }
    const double g_err = std::max(std::abs(g_fd[0] - g[0]), std::abs(g_fd[1] - g[1]));
    report.gradient_rel_error = std::max(report.gradient_rel_error, g_err / norm_inf(g));
    const Mat2 h_fd{col[0][0], col[1][0], col[0][1], col[1][1]};
    report.hessian_rel_error =
        std::max(report.hessian_rel_error, (h_fd - hess).max_abs() / hess.max_abs());

    const auto eig = symmetric_eigenvalues(hess);
    report.min_hessian_eigen_ratio = std::min(report.min_hessian_eigen_ratio, eig[0] / eig[1]);

    const Vec2 back = invert_gradient(g, params);
    for (int i = 0; i < 2; ++i) {
      report.roundtrip_rel_error =
          std::max(report.roundtrip_rel_error, std::abs(back[i] - u[i]) / u[i]);
    }
  }
  return report;
}

}  // namespace xdiff
