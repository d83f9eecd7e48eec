#pragma once

// Fixed-size 2-vector / 2x2 matrix helpers for the pointwise algebra.

#include <array>
#include <cmath>

namespace xdiff {

using Vec2 = std::array<double, 2>;

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  constexpr double det() const { return a11 * a22 - a12 * a21; }
  constexpr double trace() const { return a11 + a22; }
  constexpr Mat2 transposed() const { return {a11, a21, a12, a22}; }
  constexpr Mat2 symmetric_part() const {
    const double off = 0.5 * (a12 + a21);
    return {a11, off, off, a22};
  }
  constexpr Vec2 operator*(const Vec2& z) const {
    return {a11 * z[0] + a12 * z[1], a21 * z[0] + a22 * z[1]};
  }
  constexpr Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
  constexpr Mat2 operator+(const Mat2& o) const {
    return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22};
  }
  constexpr Mat2 operator-(const Mat2& o) const {
    return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
  }
  constexpr Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }

  /// Sum of absolute entries.
  double abs_sum() const {
    return std::abs(a11) + std::abs(a12) + std::abs(a21) + std::abs(a22);
  }
  double max_abs() const {
    return std::fmax(std::fmax(std::abs(a11), std::abs(a12)),
                     std::fmax(std::abs(a21), std::abs(a22)));
  }
};

/// Explicit inverse; caller checks the determinant.
constexpr Mat2 inverse(const Mat2& m) {
  const double inv = 1.0 / m.det();
  return {m.a22 * inv, -m.a12 * inv, -m.a21 * inv, m.a11 * inv};
}

constexpr double dot(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

inline double norm_inf(const Vec2& v) { return std::fmax(std::abs(v[0]), std::abs(v[1])); }

/// Eigenvalues (ascending) of a symmetric 2x2 matrix.
inline Vec2 symmetric_eigenvalues(const Mat2& m) {
  const double mean = 0.5 * (m.a11 + m.a22);
  const double half_diff = 0.5 * (m.a11 - m.a22);
  const double radius = std::hypot(half_diff, m.a12);
  const double hi = mean + radius;
  // mean - radius cancels when the spread is huge; det/hi does not.
  if (mean > 0.0 && hi > 0.0) return {m.det() / hi, hi};
  return {mean - radius, hi};
}

}  // namespace xdiff
