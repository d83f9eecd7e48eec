#pragma once

// Two-dimensional Fokker-Planck harness
//
//   d_t f = d_xx(a(u1/u2) f) + (sigma_n^2 / 2) d_yy f,   x in [0,1) periodic, y in [-L, L],
//
// with u_i(x) = int f(x, y) exp(lambda_i y) dy. The partial averages should follow
// the reduced cross-diffusion system with mu_i = lambda_i^2 sigma_n^2 / 2.

#include <functional>
#include <span>
#include <vector>

#include "xdiff/coeffs.hpp"
#include "xdiff/entropy.hpp"
#include "xdiff/grid.hpp"
#include "xdiff/linalg2.hpp"
#include "xdiff/system.hpp"

namespace xdiff {

/// nx periodic nodes in x; ny nodes in y including both ends y = -L and y = L.
class FPGrid {
 public:
  FPGrid(int nx, int ny, double half_width);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double half_width() const { return half_width_; }
  double dx() const { return 1.0 / nx_; }
  double dy() const { return 2.0 * half_width_ / (ny_ - 1); }
  double x(int i) const { return i * dx(); }
  double y(int j) const { return -half_width_ + j * dy(); }
  /// Trapezoid weight of node j (dy, halved at the ends).
  double y_weight(int j) const { return (j == 0 || j == ny_ - 1) ? 0.5 * dy() : dy(); }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

 private:
  int nx_;
  int ny_;
  double half_width_;
};

class FPField {
 public:
  using Density = std::function<double(double x, double y)>;

  /// Samples f0 and rescales it to unit total mass. Rejects lambda1 == lambda2.
  FPField(FPGrid grid, const Density& f0, Vec2 lambda, double sigma_n);

  const FPGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return f_; }
  std::vector<double>& values() { return f_; }
  double at(int i, int j) const { return f_[grid_.index(i, j)]; }
  Vec2 lambda() const { return lambda_; }
  double sigma_n() const { return sigma_n_; }
  /// mu_i = lambda_i^2 sigma_n^2 / 2.
  Vec2 mu() const;

  double mass() const;
  /// e^{max|lambda| L} max_x f(x, +-L) / max f; adequate when <= 1e-10.
  double truncation_ratio() const;
  bool truncation_adequate() const { return truncation_ratio() <= 1e-10; }

 private:
  FPGrid grid_;
  std::vector<double> f_;
  Vec2 lambda_;
  double sigma_n_;
};

struct FPStepInfo {
  /// |mass after - mass before|; zero-flux walls make this rounding-level.
  double mass_drift = 0.0;
  double truncation_ratio = 0.0;
  bool truncation_adequate = true;
  bool nonnegative = true;
};

/// One split step: implicit y-diffusion (zero flux at +-L), then implicit
/// x-diffusion of a f with a frozen from the partial averages at the step start.
FPStepInfo fp_step(FPField& fp, const CoefficientSpec& spec, double tau);

/// u_i(x) = sum_j w_j f(x, y_j) e^{lambda_i y_j}, with mu = lambda^2 sigma_n^2 / 2.
StateField partial_average(const FPField& fp);

/// Moments of the y-marginal: {mass, mean, variance}.
std::array<double, 3> y_marginal_moments(const FPField& fp);

struct FPScenario {
  Vec2 lambda{0.5, -0.5};
  double sigma_n = 1.0;
  double half_width = 8.0;
  double horizon = 0.1;
  FPField::Density f0;
};

/// f0 = (1 + amplitude cos 2 pi x) N(y; shift sin 2 pi x, s^2).
FPField::Density gaussian_density(double amplitude, double s, double shift = 0.0);

struct FPResolution {
  int nx = 128;
  int ny = 256;
  double tau = 1e-4;
};

/// Halves dx and dy and quarters tau `levels` times, starting from base.
std::vector<FPResolution> refinement_ladder(const FPResolution& base, int levels);

struct ConsistencyRow {
  FPResolution resolution;
  /// Relative L2 discrepancy per component at the horizon.
  Vec2 discrepancy{0.0, 0.0};
  double mass_drift = 0.0;
  double worst_truncation = 0.0;
  bool nonnegative = true;
  int steps = 0;
};

struct ConsistencyReport {
  std::vector<ConsistencyRow> rows;
  /// rows[k-1].discrepancy / rows[k].discrepancy, per component.
  std::vector<Vec2> ratios;
};

/// Runs the Fokker-Planck route and the reduced-system route (EntropyImplicit,
/// regularization off) from the t = 0 partial averages, at each resolution.
ConsistencyReport consistency_compare(const CoefficientSpec& spec, const EntropyParams& params,
                                      const FPScenario& scenario,
                                      std::span<const FPResolution> resolutions);

}  // namespace xdiff
