#pragma once

#include <stdexcept>
#include <string>

#include "xdiff/linalg2.hpp"

namespace xdiff {

/// Argument outside the domain of a map (non-positive density, bad shape, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical breakdown: singular matrix, failed linear solve, non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inversion of h' ran out of iterations.
class NonConvergence : public NumericError {
 public:
  NonConvergence(const std::string& what, Vec2 last_iterate, double residual)
      : NumericError(what), last_iterate_(last_iterate), residual_(residual) {}

  Vec2 last_iterate() const { return last_iterate_; }
  double residual() const { return residual_; }

 private:
  Vec2 last_iterate_;
  double residual_;
};

/// The implicit step's Newton iteration failed; the caller should shrink tau.
class NewtonNonConvergence : public NumericError {
 public:
  NewtonNonConvergence(const std::string& what, int iterations, double residual)
      : NumericError(what), iterations_(iterations), residual_(residual) {}

  int iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  int iterations_;
  double residual_;
};

}  // namespace xdiff
