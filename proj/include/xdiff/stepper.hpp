#pragma once

// Time integration of the cross-diffusion system.
//
// EntropyImplicit solves, for the entropy variable w^k on the grid,
//
//   (u(w^k) - u^{k-1})/tau - div_h(B_face grad_h w^k) + rho((-lap_h)^m w^k + w^k) = mu u(w^k)
//
// with u(w) = (h')^{-1}(w) cellwise and B = A h''^{-1} averaged onto faces. Positivity
// of u^k holds by construction. LaggedLinear is a frozen-coefficient reference scheme.

#include <optional>
#include <string>
#include <vector>

#include "xdiff/coeffs.hpp"
#include "xdiff/diagnostics.hpp"
#include "xdiff/entropy.hpp"
#include "xdiff/system.hpp"

namespace xdiff {

enum class SchemeKind { EntropyImplicit, LaggedLinear };

std::string to_string(SchemeKind kind);

struct SchemeConfig {
  double tau = 1e-3;
  /// Order of the (-lap)^m regularization; m > d/2.
  int m = 1;
  SchemeKind scheme = SchemeKind::EntropyImplicit;
  double newton_tol = 1e-10;
  int newton_max = 50;
  double t_end = 1.0;
  /// Weight rho of the regularization; defaults to the current tau. 0 switches it off.
  std::optional<double> regularization_weight;
  int max_halvings = 10;
  int redouble_after = 5;

  double regularization(double tau_now) const { return regularization_weight.value_or(tau_now); }
};

/// m = 1 for d = 1 and m = 2 for d = 2.
int default_regularization_order(int d);

/// Checks tau > 0, t_end > 0, m > d/2 (when regularized) and tau < 1/C_h for
/// EntropyImplicit with nonzero mu. Throws DomainError naming the violated condition.
void validate(const SchemeConfig& cfg, const EntropyParams& params, const Vec2& mu, int d);

struct StepReport {
  double tau = 0.0;
  int newton_iterations = 0;
  /// tau |R|_inf / max(1, |u^{k-1}|_inf) at the accepted iterate.
  double residual = 0.0;
  double entropy_before = 0.0;
  double entropy_after = 0.0;
  /// kappa * integral of (r^(alpha-p) + r^(p-alpha)) |grad u|^2 at the new state.
  double dissipation = 0.0;
  /// tau * rho * integral of (|(-lap)^(m/2) w|^2 + |w|^2), the regularization's share
  /// of the entropy balance.
  double regularization_term = 0.0;
  /// max |u^k - u^{k-1}| over cells and components.
  double max_change = 0.0;
  int clamp_events = 0;
};

struct EntropyStepResult {
  StateField state;
  StepReport report;
};

/// One step of the structure-preserving scheme with time step cfg.tau. Throws
/// NewtonNonConvergence when the damped Newton iteration fails.
EntropyStepResult step_entropy_implicit(const StateField& field, const CoefficientSpec& spec,
                                        const EntropyParams& params, const SchemeConfig& cfg);

struct LaggedStepResult {
  StateField state;
  bool positivity_lost = false;
};

/// (u_i^k - u_i^{k-1})/tau = lap_h(a^{k-1} u_i^k) + mu_i u_i^k with a frozen at the old
/// state. Periodic tridiagonal solve in 1-D, conjugate gradients on the symmetrized
/// operator in 2-D.
LaggedStepResult step_lagged_linear(const StateField& field, const CoefficientSpec& spec,
                                    const SchemeConfig& cfg);

/// Fully implicit Euler in the densities themselves:
/// (u^k - u^{k-1})/tau = lap_h(a(u1^k/u2^k) u^k) + mu u^k, solved by Newton whose
/// Jacobian blocks are exactly A(u).
StateField step_flux_implicit(const StateField& field, const CoefficientSpec& spec,
                              const SchemeConfig& cfg, int* iterations = nullptr);

/// Energy-transport variables n = u1, theta = u2/u1.
struct EnergyTransportState {
  PeriodicGrid grid;
  Field n;
  Field theta;
};

/// Implicit Euler for d_t n = lap(n theta), d_t(n theta) = lap(n theta^2), Newton in
/// (n, theta). Same discrete system as step_flux_implicit with the reciprocal
/// coefficient and mu = 0, written in the transformed unknowns.
EnergyTransportState step_energy_transport(const EnergyTransportState& state,
                                           const SchemeConfig& cfg, int* iterations = nullptr);

struct Probes {
  /// Record diagnostics every this many accepted steps (and at t = 0 and t_end).
  int every = 1;
};

struct RunArtifact {
  SchemeKind scheme = SchemeKind::EntropyImplicit;
  std::vector<DiagnosticsRecord> records;
  std::vector<StepReport> steps;
  StateField final_state;
  Vec2 initial_mean{0.0, 0.0};
  Vec2 mu{0.0, 0.0};
  /// Shift added to each component when the initial data touched zero.
  Vec2 lift{0.0, 0.0};
  double entropy_initial = 0.0;
  double c_h = 0.0;
  double kappa = 0.0;
  int tau_halvings = 0;
  bool positivity_lost = false;
};

RunArtifact simulate(const StateField& initial, const CoefficientSpec& spec,
                     const EntropyParams& params, const SchemeConfig& cfg, const Probes& probes = {});

struct EntropyInequalityReport {
  /// min over steps of (H^{k-1} - (1 - C_h tau) H^k) / (1 + H^{k-1}).
  double worst_margin = 0.0;
  std::size_t worst_step = 0;
  double min_dissipation = 0.0;
  std::size_t steps = 0;
  bool passed = false;
};

/// Per-step check of H^k (1 - C_h tau) <= H^{k-1}; passes when every margin >= -slack.
EntropyInequalityReport entropy_inequality_report(const RunArtifact& run, double slack = 1e-9);

/// kappa * integral of (r^(alpha-p) + r^(p-alpha)) |grad u|^2, central differences.
double entropy_dissipation(const StateField& field, const CoefficientSpec& spec,
                           const EntropyParams& params);

/// Cells where evaluating the entropy would clamp an exponent.
int count_clamp_events(const StateField& field, const EntropyParams& params);

}  // namespace xdiff
