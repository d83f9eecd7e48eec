#pragma once

// Tridiagonal solvers for the one-dimensional implicit sweeps.
//
// Row k reads  lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k].
// For the open variant lower[0] and upper[n-1] are ignored; for the periodic
// variant they couple x[0] with x[n-1].

#include <span>
#include <vector>

namespace xdiff {

/// Thomas algorithm (no pivoting; intended for diagonally dominant systems).
std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs);

/// Cyclic tridiagonal system via the Sherman-Morrison correction.
std::vector<double> solve_periodic_tridiagonal(std::span<const double> lower,
                                               std::span<const double> diag,
                                               std::span<const double> upper,
                                               std::span<const double> rhs);

/// LU factors of a tridiagonal matrix, for repeated solves with one matrix.
class TridiagonalFactor {
 public:
  TridiagonalFactor(std::span<const double> lower, std::span<const double> diag,
                    std::span<const double> upper);

  std::size_t size() const { return inv_pivot_.size(); }
  void solve_inplace(std::span<double> x) const;
  /// Solves `batch` systems at once; entry k of system b is data[k * batch + b].
  void solve_batch(std::span<double> data, std::size_t batch) const;

 private:
  std::vector<double> lower_;
  std::vector<double> c_;
  std::vector<double> inv_pivot_;
};

/// Sherman-Morrison factors of a cyclic tridiagonal matrix.
class PeriodicTridiagonalFactor {
 public:
  PeriodicTridiagonalFactor(std::span<const double> lower, std::span<const double> diag,
                            std::span<const double> upper);

  std::size_t size() const { return z_.size(); }
  void solve_inplace(std::span<double> x) const;

 private:
  TridiagonalFactor inner_;
  std::vector<double> z_;
  double corner_low_over_gamma_ = 0.0;
  double denom_ = 1.0;
};

}  // namespace xdiff
