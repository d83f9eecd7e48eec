#include "xdiff/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "xdiff/banded.hpp"
#include "xdiff/errors.hpp"
#include "xdiff/stepper.hpp"

namespace xdiff {

FPGrid::FPGrid(int nx, int ny, double half_width) : nx_(nx), ny_(ny), half_width_(half_width) {
  if (nx < 4 || ny < 4) throw DomainError("FPGrid: need nx, ny >= 4");
  if (!(half_width > 0.0)) throw DomainError("FPGrid: truncation half-width must be positive");
}

FPField::FPField(FPGrid grid, const Density& f0, Vec2 lambda, double sigma_n)
    : grid_(grid), f_(grid.size()), lambda_(lambda), sigma_n_(sigma_n) {
  if (!(lambda[0] != lambda[1]) || !std::isfinite(lambda[0]) || !std::isfinite(lambda[1])) {
    throw DomainError("FPField: weights lambda1 and lambda2 must be finite and distinct");
  }
  if (!(sigma_n > 0.0)) throw DomainError("FPField: sigma_n must be positive");
  for (int j = 0; j < grid_.ny(); ++j) {
    for (int i = 0; i < grid_.nx(); ++i) {
      const double v = f0(grid_.x(i), grid_.y(j));
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("FPField: f0 must be nonnegative");
      f_[grid_.index(i, j)] = v;
    }
  }
  const double m = mass();
  if (!(m > 0.0)) throw DomainError("FPField: f0 has zero mass");
  for (double& v : f_) v /= m;
}

Vec2 FPField::mu() const {
  const double s2 = sigma_n_ * sigma_n_;
  return {0.5 * lambda_[0] * lambda_[0] * s2, 0.5 * lambda_[1] * lambda_[1] * s2};
}

double FPField::mass() const {
  double total = 0.0;
  for (int j = 0; j < grid_.ny(); ++j) {
    double row = 0.0;
    for (int i = 0; i < grid_.nx(); ++i) row += f_[grid_.index(i, j)];
    total += row * grid_.y_weight(j);
  }
  return total * grid_.dx();
}

double FPField::truncation_ratio() const {
  const double fmax = *std::max_element(f_.begin(), f_.end());
  if (!(fmax > 0.0)) return 0.0;
  double edge = 0.0;
  for (int i = 0; i < grid_.nx(); ++i) {
    edge = std::max({edge, at(i, 0), at(i, grid_.ny() - 1)});
  }
  const double lam = std::max(std::abs(lambda_[0]), std::abs(lambda_[1]));
  return std::exp(lam * grid_.half_width()) * edge / fmax;
}

StateField partial_average(const FPField& fp) {
  const FPGrid& g = fp.grid();
  const Vec2 lambda = fp.lambda();
  Field u1(g.nx(), 0.0), u2(g.nx(), 0.0);
  for (int j = 0; j < g.ny(); ++j) {
    const double w = g.y_weight(j);
    const double e1 = w * std::exp(lambda[0] * g.y(j));
    const double e2 = w * std::exp(lambda[1] * g.y(j));
    for (int i = 0; i < g.nx(); ++i) {
      const double f = fp.at(i, j);
      u1[i] += f * e1;
      u2[i] += f * e2;
    }
  }
  return {PeriodicGrid(1, g.nx()), std::move(u1), std::move(u2), fp.mu()};
}

std::array<double, 3> y_marginal_moments(const FPField& fp) {
  const FPGrid& g = fp.grid();
  double m0 = 0.0, m1 = 0.0, m2 = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    double row = 0.0;
    for (int i = 0; i < g.nx(); ++i) row += fp.at(i, j);
    row *= g.y_weight(j) * g.dx();
    const double y = g.y(j);
    m0 += row;
    m1 += row * y;
    m2 += row * y * y;
  }
  const double mean = m1 / m0;
  return {m0, mean, m2 / m0 - mean * mean};
}

FPStepInfo fp_step(FPField& fp, const CoefficientSpec& spec, double tau) {
  if (!(tau > 0.0)) throw DomainError("fp_step: tau must be positive");
  const FPGrid& g = fp.grid();
  const int nx = g.nx(), ny = g.ny();
  auto& f = fp.values();
  FPStepInfo info;
  const double mass_before = fp.mass();

  // Coefficient frozen from the partial averages at the start of the step.
  const StateField avg = partial_average(fp);
  Field a(nx);
  for (int i = 0; i < nx; ++i) a[i] = coefficient_at(avg.at(i), spec);

  // y sweep: zero-flux finite-volume stencil, consistent with the trapezoid weights.
  {
    const double s = tau * 0.5 * fp.sigma_n() * fp.sigma_n() / (g.dy() * g.dy());
    std::vector<double> lower(ny, -s), diag(ny, 1.0 + 2.0 * s), upper(ny, -s);
    upper[0] = -2.0 * s;
    lower[ny - 1] = -2.0 * s;
    // Same matrix for every column; rows of f are contiguous, so sweep them together.
    TridiagonalFactor(lower, diag, upper).solve_batch(f, static_cast<std::size_t>(nx));
  }
  // x sweep: periodic, implicit in f with a frozen.
  {
    const double s = tau / (g.dx() * g.dx());
    std::vector<double> lower(nx), diag(nx), upper(nx);
    for (int i = 0; i < nx; ++i) {
      lower[i] = -s * a[(i + nx - 1) % nx];
      diag[i] = 1.0 + 2.0 * s * a[i];
      upper[i] = -s * a[(i + 1) % nx];
    }
    const PeriodicTridiagonalFactor factor(lower, diag, upper);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j) {
      factor.solve_inplace(std::span<double>(f.data() + g.index(0, j), static_cast<std::size_t>(nx)));
    }
  }

  info.mass_drift = std::abs(fp.mass() - mass_before);
  info.truncation_ratio = fp.truncation_ratio();
  info.truncation_adequate = info.truncation_ratio <= 1e-10;
  info.nonnegative = std::all_of(f.begin(), f.end(), [](double v) { return v >= 0.0; });
  return info;
}

FPField::Density gaussian_density(double amplitude, double s, double shift) {
  if (!(s > 0.0)) throw DomainError("gaussian_density: width must be positive");
  if (!(std::abs(amplitude) < 1.0)) throw DomainError("gaussian_density: need |amplitude| < 1");
  return [=](double x, double y) {
    const double two_pi = 2.0 * std::numbers::pi;
    const double m = shift * std::sin(two_pi * x);
    const double z = (y - m) / s;
    return (1.0 + amplitude * std::cos(two_pi * x)) * std::exp(-0.5 * z * z) /
           (s * std::sqrt(two_pi));
  };
}

std::vector<FPResolution> refinement_ladder(const FPResolution& base, int levels) {
  std::vector<FPResolution> ladder{base};
  for (int k = 0; k < levels; ++k) {
    const FPResolution& prev = ladder.back();
    ladder.push_back({2 * prev.nx, 2 * (prev.ny - 1) + 1, prev.tau / 4.0});
  }
  return ladder;
}

ConsistencyReport consistency_compare(const CoefficientSpec& spec, const EntropyParams& params,
                                      const FPScenario& scenario,
                                      std::span<const FPResolution> resolutions) {
  if (!(scenario.horizon > 0.0)) throw DomainError("consistency_compare: horizon must be positive");
  if (!scenario.f0) throw DomainError("consistency_compare: missing initial density");
  ConsistencyReport report;
  for (const FPResolution& res : resolutions) {
    const int steps = std::max(1, static_cast<int>(std::lround(scenario.horizon / res.tau)));
    const double tau = scenario.horizon / steps;

    FPField fp(FPGrid(res.nx, res.ny, scenario.half_width), scenario.f0, scenario.lambda,
               scenario.sigma_n);
    const StateField initial = partial_average(fp);

    ConsistencyRow row;
    row.resolution = res;
    row.steps = steps;
    row.worst_truncation = fp.truncation_ratio();
    for (int k = 0; k < steps; ++k) {
      const FPStepInfo info = fp_step(fp, spec, tau);
      row.mass_drift += info.mass_drift;
      row.nonnegative = row.nonnegative && info.nonnegative;
      row.worst_truncation = std::max(row.worst_truncation, info.truncation_ratio);
    }
    const StateField averaged = partial_average(fp);

    SchemeConfig cfg;
    cfg.tau = tau;
    cfg.t_end = scenario.horizon;
    cfg.regularization_weight = 0.0;
    cfg.newton_tol = 1e-12;
    const RunArtifact reduced = simulate(initial, spec, params, cfg, Probes{steps});

    for (int c = 0; c < 2; ++c) {
      Field diff(averaged.component(c));
      const Field& ref = reduced.final_state.component(c);
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] -= ref[k];
      row.discrepancy[c] = norm_l2(diff, averaged.grid()) / norm_l2(ref, averaged.grid());
    }
    report.rows.push_back(row);
  }
  for (std::size_t k = 1; k < report.rows.size(); ++k) {
    const Vec2 a = report.rows[k - 1].discrepancy;
    const Vec2 b = report.rows[k].discrepancy;
    report.ratios.push_back({a[0] / b[0], a[1] / b[1]});
  }
  return report;
}

}  // namespace xdiff
