#include "xdiff/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "newton.hpp"
#include "xdiff/errors.hpp"

namespace xdiff {
namespace detail {

SparseMatrix laplacian_matrix(const PeriodicGrid& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double inv = 1.0 / (grid.dx() * grid.dx());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (1 + 2 * grid.dim()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto row = static_cast<Eigen::Index>(k);
    trip.emplace_back(row, row, -2.0 * grid.dim() * inv);
    for (int axis = 0; axis < grid.dim(); ++axis) {
      trip.emplace_back(row, static_cast<Eigen::Index>(grid.neighbor(k, axis, +1)), inv);
      trip.emplace_back(row, static_cast<Eigen::Index>(grid.neighbor(k, axis, -1)), inv);
    }
  }
  SparseMatrix lap(n, n);
  lap.setFromTriplets(trip.begin(), trip.end());
  return lap;
}

SparseMatrix regularization_matrix(const PeriodicGrid& grid, int m) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  SparseMatrix neg_lap = -laplacian_matrix(grid);
  SparseMatrix power(n, n);
  power.setIdentity();
  for (int k = 0; k < m; ++k) power = SparseMatrix(power * neg_lap);
  SparseMatrix id(n, n);
  id.setIdentity();
  return power + id;
}

}  // namespace detail

namespace {

using detail::SparseMatrix;
using detail::Vector;

// Cellwise data cached at the latest admissible iterate.
struct CellState {
  Vec2 u;
  Mat2 mobility;
  Mat2 hessian_inverse;  // du/dw
};

class EntropyImplicitSystem {
 public:
  EntropyImplicitSystem(const StateField& old, const CoefficientSpec& spec,
                        const EntropyParams& params, double tau, double rho, int m)
      : old_(old), spec_(spec), params_(params), grid_(old.grid()), tau_(tau), rho_(rho),
        cells_(old.size()) {
    for (std::size_t k = 0; k < old.size(); ++k) cells_[k].u = old.at(k);
    if (rho_ != 0.0) reg_ = detail::regularization_matrix(grid_, m);
  }

  Vector initial_w() const {
    Vector w(2 * static_cast<Eigen::Index>(old_.size()));
    for (std::size_t k = 0; k < old_.size(); ++k) {
      const Vec2 g = entropy_gradient(old_.at(k), params_);
      w[2 * k] = g[0];
      w[2 * k + 1] = g[1];
    }
    return w;
  }

  bool residual(const Vector& w, Vector& r) {
    const std::size_t n = old_.size();
    std::vector<CellState> trial(n);
    bool ok = true;
#pragma omp parallel for schedule(static) reduction(&& : ok)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
      try {
        InvertOptions opts;
        opts.initial_guess = cells_[k].u;
        const Vec2 u = invert_gradient({w[2 * k], w[2 * k + 1]}, params_, opts);
        const Mat2 hinv = inverse(entropy_hessian(u, params_));
        trial[k] = {u, diffusion_matrix(u, spec_) * hinv, hinv};
      } catch (const NumericError&) {
        ok = false;
      } catch (const DomainError&) {
        ok = false;
      }
    }
    if (!ok) return false;
    cells_.swap(trial);

    const Vec2 mu = old_.mu();
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 uo = old_.at(k);
      const Vec2& u = cells_[k].u;
      r[2 * k] = (u[0] - uo[0]) / tau_ - mu[0] * u[0];
      r[2 * k + 1] = (u[1] - uo[1]) / tau_ - mu[1] * u[1];
    }
    const double dx = grid_.dx();
    for (int axis = 0; axis < grid_.dim(); ++axis) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t kp = grid_.neighbor(k, axis, +1);
        const Mat2 face = (cells_[k].mobility + cells_[kp].mobility) * 0.5;
        const Vec2 g{(w[2 * kp] - w[2 * k]) / dx, (w[2 * kp + 1] - w[2 * k + 1]) / dx};
        const Vec2 flux = face * g;
        r[2 * k] -= flux[0] / dx;
        r[2 * k + 1] -= flux[1] / dx;
        r[2 * kp] += flux[0] / dx;
        r[2 * kp + 1] += flux[1] / dx;
      }
    }
    if (rho_ != 0.0) {
      for (int c = 0; c < 2; ++c) {
        Vector wc(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) wc[k] = w[2 * k + c];
        const Vector rc = reg_ * wc;
        for (std::size_t k = 0; k < n; ++k) r[2 * k + c] += rho_ * rc[k];
      }
    }
    return r.allFinite();
  }

  SparseMatrix jacobian(const Vector& w) const {
    const std::size_t n = old_.size();
    const Vec2 mu = old_.mu();
    const double dx = grid_.dx();

    // dB/dw_c for each cell: central differences of B in log u, chained with du/dw.
    std::vector<std::array<Mat2, 2>> dB(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) {
      constexpr double eps = 1e-6;
      const Vec2 u = cells_[k].u;
      std::array<Mat2, 2> d_du;
      for (int l = 0; l < 2; ++l) {
        Vec2 up = u, um = u;
        up[l] *= std::exp(eps);
        um[l] *= std::exp(-eps);
        d_du[l] = (mobility_matrix(up, spec_, params_) - mobility_matrix(um, spec_, params_)) *
                  (1.0 / (2.0 * eps * u[l]));
      }
      const Mat2& du_dw = cells_[k].hessian_inverse;
      dB[k][0] = d_du[0] * du_dw.a11 + d_du[1] * du_dw.a21;
      dB[k][1] = d_du[0] * du_dw.a12 + d_du[1] * du_dw.a22;
    }

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(n * (4 + 16 * grid_.dim()));
    auto add_block = [&](std::size_t row, std::size_t col, const Mat2& m) {
      const auto r0 = static_cast<Eigen::Index>(2 * row);
      const auto c0 = static_cast<Eigen::Index>(2 * col);
      trip.emplace_back(r0, c0, m.a11);
      trip.emplace_back(r0, c0 + 1, m.a12);
      trip.emplace_back(r0 + 1, c0, m.a21);
      trip.emplace_back(r0 + 1, c0 + 1, m.a22);
    };

    for (std::size_t k = 0; k < n; ++k) {
      const Mat2 growth{1.0 / tau_ - mu[0], 0.0, 0.0, 1.0 / tau_ - mu[1]};
      add_block(k, k, growth * cells_[k].hessian_inverse);
    }
    for (int axis = 0; axis < grid_.dim(); ++axis) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t kp = grid_.neighbor(k, axis, +1);
        const Mat2 face = (cells_[k].mobility + cells_[kp].mobility) * 0.5;
        const Vec2 g{(w[2 * kp] - w[2 * k]) / dx, (w[2 * kp + 1] - w[2 * k + 1]) / dx};
        // d flux / d w at the right and left cell of the face
        auto coefficient_part = [&](std::size_t cell) {
          const Vec2 c0 = dB[cell][0] * g;
          const Vec2 c1 = dB[cell][1] * g;
          return Mat2{c0[0], c1[0], c0[1], c1[1]} * 0.5;
        };
        const Mat2 d_right = face * (1.0 / dx) + coefficient_part(kp);
        const Mat2 d_left = face * (-1.0 / dx) + coefficient_part(k);
        const double s = 1.0 / dx;
        add_block(k, kp, d_right * (-s));
        add_block(k, k, d_left * (-s));
        add_block(kp, kp, d_right * s);
        add_block(kp, k, d_left * s);
      }
    }
    if (rho_ != 0.0) {
      for (int outer = 0; outer < reg_.outerSize(); ++outer) {
        for (SparseMatrix::InnerIterator it(reg_, outer); it; ++it) {
          const auto row = 2 * it.row();
          const auto col = 2 * it.col();
          trip.emplace_back(row, col, rho_ * it.value());
          trip.emplace_back(row + 1, col + 1, rho_ * it.value());
        }
      }
    }
    const auto dim = static_cast<Eigen::Index>(2 * n);
    SparseMatrix jac(dim, dim);
    jac.setFromTriplets(trip.begin(), trip.end());
    return jac;
  }

  const std::vector<CellState>& cells() const { return cells_; }
  const SparseMatrix& regularization() const { return reg_; }

 private:
  const StateField& old_;
  const CoefficientSpec& spec_;
  const EntropyParams& params_;
  PeriodicGrid grid_;
  double tau_;
  double rho_;
  std::vector<CellState> cells_;
  SparseMatrix reg_;
};

}  // namespace

std::string to_string(SchemeKind kind) {
  return kind == SchemeKind::EntropyImplicit ? "entropy_implicit" : "lagged_linear";
}

int default_regularization_order(int d) { return d == 1 ? 1 : 2; }

void validate(const SchemeConfig& cfg, const EntropyParams& params, const Vec2& mu, int d) {
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) throw DomainError("scheme: tau must be positive");
  if (!(cfg.t_end > 0.0) || !std::isfinite(cfg.t_end)) {
    throw DomainError("scheme: t_end must be positive");
  }
  if (!(cfg.newton_tol > 0.0) || cfg.newton_max < 1) {
    throw DomainError("scheme: newton_tol must be positive and newton_max >= 1");
  }
  if (cfg.regularization_weight && !(*cfg.regularization_weight >= 0.0)) {
    throw DomainError("scheme: regularization weight must be >= 0");
  }
  const bool regularized = cfg.regularization(cfg.tau) != 0.0;
  if (regularized && !(2 * cfg.m > d)) {
    throw DomainError("scheme: regularization order m = " + std::to_string(cfg.m) +
                      " must satisfy m > d/2 (d = " + std::to_string(d) + ")");
  }
  if (cfg.scheme == SchemeKind::EntropyImplicit) {
    const double c_h = source_constant(params, mu);
    if (c_h > 0.0 && !(cfg.tau * c_h < 1.0)) {
      throw DomainError("scheme: tau = " + std::to_string(cfg.tau) +
                        " violates tau < 1/C_h with C_h = 2(alpha+2)(|mu1|+|mu2|) = " +
                        std::to_string(c_h));
    }
  }
}

double entropy_dissipation(const StateField& field, const CoefficientSpec& spec,
                           const EntropyParams& params) {
  const auto g1 = gradient(field.u1(), field.grid());
  const auto g2 = gradient(field.u2(), field.grid());
  const double e = params.alpha - spec.p();
  double sum = 0.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double q = std::log(field.u1()[k]) - std::log(field.u2()[k]);
    const double weight = std::exp(std::clamp(e * q, -kExponentClamp, kExponentClamp)) +
                          std::exp(std::clamp(-e * q, -kExponentClamp, kExponentClamp));
    double grad2 = 0.0;
    for (int axis = 0; axis < field.grid().dim(); ++axis) {
      grad2 += g1[axis][k] * g1[axis][k] + g2[axis][k] * g2[axis][k];
    }
    sum += weight * grad2;
  }
  return structure_kappa(spec, params) * sum * field.grid().cell_volume();
}

int count_clamp_events(const StateField& field, const EntropyParams& params) {
  int count = 0;
  for (std::size_t k = 0; k < field.size(); ++k) count += exponent_clamped(field.at(k), params) ? 1 : 0;
  return count;
}

EntropyStepResult step_entropy_implicit(const StateField& field, const CoefficientSpec& spec,
                                        const EntropyParams& params, const SchemeConfig& cfg) {
  field.require_positive();
  const double rho = cfg.regularization(cfg.tau);
  EntropyImplicitSystem system(field, spec, params, cfg.tau, rho, cfg.m);

  double u_scale = 1.0;
  for (std::size_t k = 0; k < field.size(); ++k) {
    u_scale = std::max({u_scale, field.u1()[k], field.u2()[k]});
  }
  const double scale = cfg.tau / u_scale;
  auto outcome = detail::damped_newton(
      system.initial_w(), [&](const Vector& w, Vector& r) { return system.residual(w, r); },
      [&](const Vector& w) { return system.jacobian(w); }, scale, cfg.newton_tol, cfg.newton_max,
      "step_entropy_implicit");

  const auto& cells = system.cells();
  Field u1(field.size()), u2(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) {
    u1[k] = cells[k].u[0];
    u2[k] = cells[k].u[1];
  }
  StateField next(field.grid(), std::move(u1), std::move(u2), field.mu());

  StepReport report;
  report.tau = cfg.tau;
  report.newton_iterations = outcome.iterations;
  report.residual = outcome.residual;
  report.entropy_before = entropy_functional(field, params);
  report.entropy_after = entropy_functional(next, params);
  report.dissipation = entropy_dissipation(next, spec, params);
  if (rho != 0.0) {
    const Eigen::Index n = static_cast<Eigen::Index>(field.size());
    double reg = 0.0;
    for (int c = 0; c < 2; ++c) {
      Vector wc(n);
      for (Eigen::Index k = 0; k < n; ++k) wc[k] = outcome.x[2 * k + c];
      reg += wc.dot(system.regularization() * wc);
    }
    report.regularization_term = cfg.tau * rho * reg * field.grid().cell_volume();
  }
  for (std::size_t k = 0; k < field.size(); ++k) {
    report.max_change = std::max({report.max_change, std::abs(next.u1()[k] - field.u1()[k]),
                                  std::abs(next.u2()[k] - field.u2()[k])});
  }
  report.clamp_events = count_clamp_events(next, params);
  return {std::move(next), report};
}

}  // namespace xdiff
