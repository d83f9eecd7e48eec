#pragma once

// Damped Newton iteration shared by the implicit steppers (library-internal).

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <string>

#include "xdiff/errors.hpp"
#include "xdiff/grid.hpp"

namespace xdiff::detail {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

struct NewtonOutcome {
  Vector x;
  int iterations = 0;
  double residual = 0.0;
};

/// residual(x, r) fills r and returns false if x is inadmissible; jacobian(x) is only
/// called for the x of the most recent successful residual call. Convergence is
/// scale * |r|_inf <= tol. Each step is halved (at most 30 times) until the residual
/// norm decreases.
template <class ResidualFn, class JacobianFn>
NewtonOutcome damped_newton(Vector x, ResidualFn&& residual, JacobianFn&& jacobian, double scale,
                            double tol, int max_iter, const char* who) {
  constexpr int kMaxHalvings = 30;
  Vector r(x.size());
  if (!residual(x, r)) {
    throw NewtonNonConvergence(std::string(who) + ": initial iterate inadmissible", 0, INFINITY);
  }
  double norm = scale * r.lpNorm<Eigen::Infinity>();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  bool analyzed = false;
  int it = 0;
  while (!(norm <= tol)) {
    if (it == max_iter) {
      throw NewtonNonConvergence(std::string(who) + ": iteration budget exhausted (residual " +
                                     std::to_string(norm) + ")",
                                 it, norm);
    }
    ++it;
    const SparseMatrix jac = jacobian(x);
    if (!analyzed) {
      lu.analyzePattern(jac);
      analyzed = true;
    }
    lu.factorize(jac);
    if (lu.info() != Eigen::Success) {
      throw NewtonNonConvergence(std::string(who) + ": singular Jacobian", it, norm);
    }
    const Vector step = lu.solve(-r);
    if (!step.allFinite()) throw NewtonNonConvergence(std::string(who) + ": non-finite step", it, norm);

    bool accepted = false;
    double t = 1.0;
    Vector trial(x.size()), r_trial(x.size());
    for (int h = 0; h <= kMaxHalvings; ++h, t *= 0.5) {
      trial = x + t * step;
      if (!residual(trial, r_trial)) continue;
      const double trial_norm = scale * r_trial.lpNorm<Eigen::Infinity>();
      if (trial_norm < norm) {
        x.swap(trial);
        r.swap(r_trial);
        norm = trial_norm;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      throw NewtonNonConvergence(std::string(who) + ": line search failed (residual " +
                                     std::to_string(norm) + ")",
                                 it, norm);
    }
  }
  return {std::move(x), it, norm};
}

/// Sparse stencil Laplacian (same stencil as xdiff::laplacian).
SparseMatrix laplacian_matrix(const PeriodicGrid& grid);

/// (-lap_h)^m + I.
SparseMatrix regularization_matrix(const PeriodicGrid& grid, int m);

}  // namespace xdiff::detail
