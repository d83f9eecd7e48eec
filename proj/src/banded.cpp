#include "xdiff/banded.hpp"

#include <cmath>
#include <stdexcept>

#include "xdiff/errors.hpp"

namespace xdiff {

std::vector<double> solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper, std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw std::invalid_argument("solve_tridiagonal: inconsistent band sizes");
  }
  std::vector<double> c(n), x(n);
  double pivot = diag[0];
  if (pivot == 0.0) throw NumericError("solve_tridiagonal: zero pivot");
  c[0] = upper[0] / pivot;
  x[0] = rhs[0] / pivot;
  for (std::size_t k = 1; k < n; ++k) {
    pivot = diag[k] - lower[k] * c[k - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw NumericError("solve_tridiagonal: zero pivot");
    c[k] = upper[k] / pivot;
    x[k] = (rhs[k] - lower[k] * x[k - 1]) / pivot;
  }
  for (std::size_t k = n - 1; k-- > 0;) x[k] -= c[k] * x[k + 1];
  return x;
}

std::vector<double> solve_periodic_tridiagonal(std::span<const double> lower,
                                               std::span<const double> diag,
                                               std::span<const double> upper,
                                               std::span<const double> rhs) {
  const std::size_t n = diag.size();
  if (n < 3 || lower.size() != n || upper.size() != n || rhs.size() != n) {
    throw std::invalid_argument("solve_periodic_tridiagonal: need n >= 3 and matching sizes");
  }
  const double corner_low = lower[0];       // couples row 0 to x[n-1]
  const double corner_up = upper[n - 1];    // couples row n-1 to x[0]
  const double gamma = -diag[0];

  std::vector<double> d(diag.begin(), diag.end());
  d[0] -= gamma;
  d[n - 1] -= corner_low * corner_up / gamma;

  const auto y = solve_tridiagonal(lower, d, upper, rhs);
  std::vector<double> v(n, 0.0);
  v[0] = gamma;
  v[n - 1] = corner_up;
  const auto z = solve_tridiagonal(lower, d, upper, v);

  const double denom = 1.0 + z[0] + corner_low * z[n - 1] / gamma;
  if (denom == 0.0) throw NumericError("solve_periodic_tridiagonal: singular correction");
  const double factor = (y[0] + corner_low * y[n - 1] / gamma) / denom;
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = y[k] - factor * z[k];
  return x;
}

TridiagonalFactor::TridiagonalFactor(std::span<const double> lower, std::span<const double> diag,
                                     std::span<const double> upper)
    : lower_(lower.begin(), lower.end()), c_(diag.size()), inv_pivot_(diag.size()) {
  const std::size_t n = diag.size();
  if (n == 0 || lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("TridiagonalFactor: inconsistent band sizes");
  }
  double pivot = diag[0];
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) pivot = diag[k] - lower[k] * c_[k - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) throw NumericError("TridiagonalFactor: zero pivot");
    inv_pivot_[k] = 1.0 / pivot;
    c_[k] = upper[k] * inv_pivot_[k];
  }
}

void TridiagonalFactor::solve_inplace(std::span<double> x) const {
  const std::size_t n = size();
  if (x.size() != n) throw std::invalid_argument("TridiagonalFactor: size mismatch");
  x[0] *= inv_pivot_[0];
  for (std::size_t k = 1; k < n; ++k) x[k] = (x[k] - lower_[k] * x[k - 1]) * inv_pivot_[k];
  for (std::size_t k = n - 1; k-- > 0;) x[k] -= c_[k] * x[k + 1];
}

void TridiagonalFactor::solve_batch(std::span<double> data, std::size_t batch) const {
  const std::size_t n = size();
  if (data.size() != n * batch) throw std::invalid_argument("TridiagonalFactor: batch size mismatch");
  double* x = data.data();
  for (std::size_t b = 0; b < batch; ++b) x[b] *= inv_pivot_[0];
  for (std::size_t k = 1; k < n; ++k) {
    double* row = x + k * batch;
    const double* prev = row - batch;
    const double l = lower_[k], ip = inv_pivot_[k];
    for (std::size_t b = 0; b < batch; ++b) row[b] = (row[b] - l * prev[b]) * ip;
  }
  for (std::size_t k = n - 1; k-- > 0;) {
    double* row = x + k * batch;
    const double* next = row + batch;
    const double c = c_[k];
    for (std::size_t b = 0; b < batch; ++b) row[b] -= c * next[b];
  }
}

namespace {

std::vector<double> modified_diagonal(std::span<const double> lower, std::span<const double> diag,
                                      std::span<const double> upper) {
  const std::size_t n = diag.size();
  if (n < 3 || lower.size() != n || upper.size() != n) {
    throw std::invalid_argument("PeriodicTridiagonalFactor: need n >= 3 and matching sizes");
  }
  const double gamma = -diag[0];
  std::vector<double> d(diag.begin(), diag.end());
  d[0] -= gamma;
  d[n - 1] -= lower[0] * upper[n - 1] / gamma;
  return d;
}

}  // namespace

PeriodicTridiagonalFactor::PeriodicTridiagonalFactor(std::span<const double> lower,
                                                     std::span<const double> diag,
                                                     std::span<const double> upper)
    : inner_(lower, modified_diagonal(lower, diag, upper), upper), z_(diag.size(), 0.0) {
  const std::size_t n = diag.size();
  const double gamma = -diag[0];
  z_[0] = gamma;
  z_[n - 1] = upper[n - 1];
  inner_.solve_inplace(z_);
  corner_low_over_gamma_ = lower[0] / gamma;
  denom_ = 1.0 + z_[0] + corner_low_over_gamma_ * z_[n - 1];
  if (denom_ == 0.0) throw NumericError("PeriodicTridiagonalFactor: singular correction");
}

void PeriodicTridiagonalFactor::solve_inplace(std::span<double> x) const {
  const std::size_t n = size();
  inner_.solve_inplace(x);
  const double factor = (x[0] + corner_low_over_gamma_ * x[n - 1]) / denom_;
  for (std::size_t k = 0; k < n; ++k) x[k] -= factor * z_[k];
}

}  // namespace xdiff
