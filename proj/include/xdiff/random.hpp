#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "xdiff/linalg2.hpp"

namespace xdiff {

/// mt19937_64 with distribution code of our own, so sample streams are identical
/// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// exp(uniform(log lo, log hi)).
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  Vec2 unit_vector() {
    const double theta = uniform(0.0, 2.0 * std::numbers::pi);
    return {std::cos(theta), std::sin(theta)};
  }
  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xdiff
