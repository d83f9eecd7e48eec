// Reference time steppers that work directly in the densities.

#include <algorithm>
#include <cmath>
#include <vector>

#include "newton.hpp"
#include "xdiff/banded.hpp"
#include "xdiff/errors.hpp"
#include "xdiff/stepper.hpp"

namespace xdiff {
namespace {

using detail::SparseMatrix;
using detail::Vector;

// Matrix-free CG for ((1 - tau mu)/a) v - tau lap_h v = b, which is SPD for a > 0,
// 1 - tau mu > 0.
Field solve_symmetrized(const PeriodicGrid& grid, const Field& a, double tau, double mu,
                        const Field& b) {
  const std::size_t n = grid.size();
  const double shift = 1.0 - tau * mu;
  Field lap(n);
  auto apply = [&](const Field& v, Field& out) {
    laplacian_into(v, grid, lap);
    for (std::size_t k = 0; k < n; ++k) out[k] = shift / a[k] * v[k] - tau * lap[k];
  };
  Field x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = a[k] * b[k] / shift;  // good guess for small tau
  Field r(n), p(n), ap(n);
  apply(x, ap);
  for (std::size_t k = 0; k < n; ++k) r[k] = b[k] - ap[k];
  p = r;
  auto dotp = [&](const Field& u, const Field& v) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += u[k] * v[k];
    return s;
  };
  double rr = dotp(r, r);
  const double target = 1e-28 * std::max(dotp(b, b), 1e-300);
  for (std::size_t it = 0; it < 10 * n && rr > target; ++it) {
    apply(p, ap);
    const double pap = dotp(p, ap);
    if (!(pap > 0.0)) throw NumericError("step_lagged_linear: CG breakdown (operator not SPD)");
    const double alpha = rr / pap;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * ap[k];
    }
    const double rr_new = dotp(r, r);
    const double beta = rr_new / rr;
    rr = rr_new;
    for (std::size_t k = 0; k < n; ++k) p[k] = r[k] + beta * p[k];
  }
  if (rr > target) throw NumericError("step_lagged_linear: CG did not converge");
  return x;
}

double density_scale(std::span<const double> a, std::span<const double> b) {
  double s = 1.0;
  for (double v : a) s = std::max(s, std::abs(v));
  for (double v : b) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace

LaggedStepResult step_lagged_linear(const StateField& field, const CoefficientSpec& spec,
                                    const SchemeConfig& cfg) {
  field.require_positive();
  const PeriodicGrid& grid = field.grid();
  const std::size_t n = field.size();
  const double tau = cfg.tau;
  Field a(n);
  for (std::size_t k = 0; k < n; ++k) a[k] = coefficient_at(field.at(k), spec);

  std::array<Field, 2> next;
  for (int c = 0; c < 2; ++c) {
    const double mu = field.mu()[c];
    const Field& old = field.component(c);
    if (grid.dim() == 1) {
      const double s = tau / (grid.dx() * grid.dx());
      Field lower(n), diag(n), upper(n);
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t kp = grid.neighbor(k, 0, +1);
        const std::size_t km = grid.neighbor(k, 0, -1);
        lower[k] = -s * a[km];
        diag[k] = 1.0 - tau * mu + 2.0 * s * a[k];
        upper[k] = -s * a[kp];
      }
      next[c] = solve_periodic_tridiagonal(lower, diag, upper, old);
    } else {
      const Field v = solve_symmetrized(grid, a, tau, mu, old);
      next[c].resize(n);
      for (std::size_t k = 0; k < n; ++k) next[c][k] = v[k] / a[k];
    }
  }
  StateField state(grid, std::move(next[0]), std::move(next[1]), field.mu());
  const bool lost = !state.is_positive();
  return {std::move(state), lost};
}

StateField step_flux_implicit(const StateField& field, const CoefficientSpec& spec,
                              const SchemeConfig& cfg, int* iterations) {
  field.require_positive();
  const PeriodicGrid& grid = field.grid();
  const std::size_t n = field.size();
  const double tau = cfg.tau;
  const Vec2 mu = field.mu();
  const SparseMatrix lap = detail::laplacian_matrix(grid);

  Vector x(2 * static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    x[2 * k] = field.u1()[k];
    x[2 * k + 1] = field.u2()[k];
  }
  auto residual = [&](const Vector& u, Vector& r) {
    Vector f1(static_cast<Eigen::Index>(n)), f2(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      if (!(u[2 * k] > 0.0) || !(u[2 * k + 1] > 0.0)) return false;
      const double a = coefficient_at({u[2 * k], u[2 * k + 1]}, spec);
      f1[k] = a * u[2 * k];
      f2[k] = a * u[2 * k + 1];
    }
    const Vector l1 = lap * f1;
    const Vector l2 = lap * f2;
    for (std::size_t k = 0; k < n; ++k) {
      r[2 * k] = (u[2 * k] - field.u1()[k]) / tau - l1[k] - mu[0] * u[2 * k];
      r[2 * k + 1] = (u[2 * k + 1] - field.u2()[k]) / tau - l2[k] - mu[1] * u[2 * k + 1];
    }
    return r.allFinite();
  };
  auto jacobian = [&](const Vector& u) {
    std::vector<Mat2> blocks(n);
    for (std::size_t k = 0; k < n; ++k) blocks[k] = diffusion_matrix({u[2 * k], u[2 * k + 1]}, spec);
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < n; ++k) {
      trip.emplace_back(2 * k, 2 * k, 1.0 / tau - mu[0]);
      trip.emplace_back(2 * k + 1, 2 * k + 1, 1.0 / tau - mu[1]);
    }
    for (int outer = 0; outer < lap.outerSize(); ++outer) {
      for (SparseMatrix::InnerIterator it(lap, outer); it; ++it) {
        const Mat2& A = blocks[static_cast<std::size_t>(it.col())];
        const auto r0 = 2 * it.row();
        const auto c0 = 2 * it.col();
        const double v = -it.value();
        trip.emplace_back(r0, c0, v * A.a11);
        trip.emplace_back(r0, c0 + 1, v * A.a12);
        trip.emplace_back(r0 + 1, c0, v * A.a21);
        trip.emplace_back(r0 + 1, c0 + 1, v * A.a22);
      }
    }
    SparseMatrix jac(x.size(), x.size());
    jac.setFromTriplets(trip.begin(), trip.end());
    return jac;
  };
  const double scale = tau / density_scale(field.u1(), field.u2());
  auto outcome = detail::damped_newton(x, residual, jacobian, scale, cfg.newton_tol, cfg.newton_max,
                                       "step_flux_implicit");
  if (iterations) *iterations = outcome.iterations;
  Field u1(n), u2(n);
  for (std::size_t k = 0; k < n; ++k) {
    u1[k] = outcome.x[2 * k];
    u2[k] = outcome.x[2 * k + 1];
  }
  return {grid, std::move(u1), std::move(u2), mu};
}

EnergyTransportState step_energy_transport(const EnergyTransportState& state,
                                           const SchemeConfig& cfg, int* iterations) {
  const PeriodicGrid& grid = state.grid;
  const std::size_t n = grid.size();
  if (state.n.size() != n || state.theta.size() != n) {
    throw DomainError("step_energy_transport: shape mismatch");
  }
  const double tau = cfg.tau;
  const SparseMatrix lap = detail::laplacian_matrix(grid);
  Field energy_old(n);
  for (std::size_t k = 0; k < n; ++k) energy_old[k] = state.n[k] * state.theta[k];

  Vector x(2 * static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    x[2 * k] = state.n[k];
    x[2 * k + 1] = state.theta[k];
  }
  auto residual = [&](const Vector& v, Vector& r) {
    Vector f1(static_cast<Eigen::Index>(n)), f2(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
      const double dens = v[2 * k], temp = v[2 * k + 1];
      if (!(dens > 0.0) || !(temp > 0.0)) return false;
      f1[k] = dens * temp;
      f2[k] = dens * temp * temp;
    }
    const Vector l1 = lap * f1;
    const Vector l2 = lap * f2;
    for (std::size_t k = 0; k < n; ++k) {
      r[2 * k] = (v[2 * k] - state.n[k]) / tau - l1[k];
      r[2 * k + 1] = (v[2 * k] * v[2 * k + 1] - energy_old[k]) / tau - l2[k];
    }
    return r.allFinite();
  };
  auto jacobian = [&](const Vector& v) {
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t k = 0; k < n; ++k) {
      trip.emplace_back(2 * k, 2 * k, 1.0 / tau);
      trip.emplace_back(2 * k + 1, 2 * k, v[2 * k + 1] / tau);
      trip.emplace_back(2 * k + 1, 2 * k + 1, v[2 * k] / tau);
    }
    for (int outer = 0; outer < lap.outerSize(); ++outer) {
      for (SparseMatrix::InnerIterator it(lap, outer); it; ++it) {
        const auto j = static_cast<std::size_t>(it.col());
        const double dens = v[2 * j], temp = v[2 * j + 1];
        const auto r0 = 2 * it.row();
        const auto c0 = 2 * it.col();
        const double l = -it.value();
        trip.emplace_back(r0, c0, l * temp);
        trip.emplace_back(r0, c0 + 1, l * dens);
        trip.emplace_back(r0 + 1, c0, l * temp * temp);
        trip.emplace_back(r0 + 1, c0 + 1, l * 2.0 * dens * temp);
      }
    }
    SparseMatrix jac(x.size(), x.size());
    jac.setFromTriplets(trip.begin(), trip.end());
    return jac;
  };
  const double scale = tau / density_scale(state.n, energy_old);
  auto outcome = detail::damped_newton(x, residual, jacobian, scale, cfg.newton_tol, cfg.newton_max,
                                       "step_energy_transport");
  if (iterations) *iterations = outcome.iterations;
  EnergyTransportState next{grid, Field(n), Field(n)};
  for (std::size_t k = 0; k < n; ++k) {
    next.n[k] = outcome.x[2 * k];
    next.theta[k] = outcome.x[2 * k + 1];
  }
  return next;
}

}  // namespace xdiff
