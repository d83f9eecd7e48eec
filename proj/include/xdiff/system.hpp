#pragma once

// Pointwise and fieldwise pieces of
//
//   d_t u_i = lap(a(u1/u2) u_i) + mu_i u_i   on the torus,
//
// written in divergence form d_t u = div(A(u) grad u) + f(u).

#include <cstdint>
#include <utility>

#include "xdiff/coeffs.hpp"
#include "xdiff/entropy.hpp"
#include "xdiff/grid.hpp"
#include "xdiff/linalg2.hpp"

namespace xdiff {

/// Positive pair (u1, u2) sampled on a periodic grid, plus the growth rates mu.
class StateField {
 public:
  StateField(PeriodicGrid grid, Field u1, Field u2, Vec2 mu = {0.0, 0.0});

  /// Spatially constant state.
  static StateField uniform(PeriodicGrid grid, Vec2 value, Vec2 mu = {0.0, 0.0});

  const PeriodicGrid& grid() const { return grid_; }
  const Field& u1() const { return u1_; }
  const Field& u2() const { return u2_; }
  const Field& component(int i) const { return i == 0 ? u1_ : u2_; }
  Vec2 at(std::size_t k) const { return {u1_[k], u2_[k]}; }
  Vec2 mu() const { return mu_; }
  std::size_t size() const { return u1_.size(); }

  /// Throws DomainError unless every cell is positive and finite.
  void require_positive() const;
  bool is_positive() const;
  Vec2 minima() const;

 private:
  PeriodicGrid grid_;
  Field u1_, u2_;
  Vec2 mu_;
};

/// a(u1/u2) with the quotient formed in log space.
double coefficient_at(const Vec2& u, const CoefficientSpec& spec);

/// A(u) = [[a + r a', -r^2 a'], [a', a - r a']] at r = u1/u2.
Mat2 diffusion_matrix(const Vec2& u, const CoefficientSpec& spec);

/// B = A(u) h''(u)^-1. Throws NumericError if det h'' < 1e-300.
Mat2 mobility_matrix(const Vec2& u, const CoefficientSpec& spec, const EntropyParams& params);

/// Cellwise (a(u1/u2) u1, a(u1/u2) u2).
std::pair<Field, Field> flux_density(const StateField& field, const CoefficientSpec& spec);

/// Cellwise (mu1 u1, mu2 u2).
std::pair<Field, Field> source_term(const StateField& field);

/// Cellwise (n, theta) = (u1, u2/u1).
std::pair<Field, Field> energy_transport_transform(const StateField& field);

struct PetrovskiReport {
  double min_eigenvalue = 0.0;
  std::size_t samples = 0;
  bool passed = false;
};

/// The only eigenvalue of A(u) is a(u1/u2); checks it is >= 0 at random states.
PetrovskiReport petrovski_check(const CoefficientSpec& spec, std::size_t samples,
                                std::uint64_t seed = 7);

struct MatrixBoundReport {
  /// max over samples of sum|A_ij| / (1 + r^2 + r^-2).
  double c_a = 0.0;
  std::size_t samples = 0;
  bool finite = false;
};

MatrixBoundReport matrix_bound_check(const CoefficientSpec& spec, std::size_t samples,
                                     std::uint64_t seed = 11);

struct QuadraticGrowthReport {
  /// a(1)^2.
  double c_a = 0.0;
  /// min over samples of rhs - lhs, relative to rhs.
  double min_relative_margin = 0.0;
  std::size_t samples = 0;
  bool passed = false;
};

/// a(r)^2 (u1^2 + u2^2) <= a(1)^2 (u1^2 + u2^2 + u1^4/u2^2 + u2^4/u1^2).
QuadraticGrowthReport quadratic_growth_check(const CoefficientSpec& spec, std::size_t samples,
                                             std::uint64_t seed = 13);

}  // namespace xdiff
