#pragma once

// Periodic-grid calculus on the unit torus [0,1)^d, d = 1 or 2.
//
// Evolution operators use second-order central stencils; Fourier transforms appear
// only inside poisson_solve, which inverts the stencil Laplacian exactly.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace xdiff {

using Field = std::vector<double>;

class PeriodicGrid {
 public:
  PeriodicGrid(int d, int n);

  int dim() const { return d_; }
  int n() const { return n_; }
  double dx() const { return dx_; }
  double cell_volume() const { return cell_volume_; }
  std::size_t size() const { return size_; }

  /// Node coordinate along one axis (x_i = i dx).
  double coord(int i) const { return i * dx_; }
  /// Flat index of (i, j); j is ignored for d = 1. Row-major with x fastest.
  std::size_t index(int i, int j = 0) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i);
  }
  /// Periodic neighbour of cell k along an axis, offset +-1.
  std::size_t neighbor(std::size_t k, int axis, int offset) const;

  bool operator==(const PeriodicGrid& o) const { return d_ == o.d_ && n_ == o.n_; }

 private:
  int d_;
  int n_;
  double dx_;
  double cell_volume_;
  std::size_t size_;
};

/// Second-order periodic Laplacian. OpenMP over cells.
Field laplacian(std::span<const double> f, const PeriodicGrid& grid);
void laplacian_into(std::span<const double> f, const PeriodicGrid& grid, std::span<double> out);

/// Central-difference gradient, one array per axis.
std::vector<Field> gradient(std::span<const double> f, const PeriodicGrid& grid);

struct PoissonSolution {
  Field phi;
  /// mean of the right-hand side that was removed before solving.
  double removed_mean = 0.0;
};

/// Solves -lap(phi) = rhs - mean(rhs) with mean(phi) = 0, where lap is the stencil
/// Laplacian above (inverted through its Fourier symbol).
PoissonSolution poisson_solve(std::span<const double> rhs, const PeriodicGrid& grid);

double mean(std::span<const double> f);
/// cell_volume * sum(f).
double integral(std::span<const double> f, const PeriodicGrid& grid);
double norm_l2(std::span<const double> f, const PeriodicGrid& grid);
double seminorm_h1(std::span<const double> f, const PeriodicGrid& grid);
/// Split dual norm sqrt(|phi|_{H1}^2 + mean(f)^2) with phi = poisson_solve(f).phi.
double norm_hminus1(std::span<const double> f, const PeriodicGrid& grid);
double norm_inf(std::span<const double> f);

/// Smallest nonzero eigenvalue of -lap: (2/dx^2)(1 - cos(2 pi dx)).
double first_eigenvalue(const PeriodicGrid& grid);

/// Single-threaded reference versions of the parallel kernels.
namespace serial {
Field laplacian(std::span<const double> f, const PeriodicGrid& grid);
}

}  // namespace xdiff
