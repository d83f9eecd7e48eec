#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "xdiff/errors.hpp"
#include "xdiff/stepper.hpp"

namespace xdiff {
namespace {

double step_margin(const StepReport& s, double c_h) {
  return (s.entropy_before - (1.0 - c_h * s.tau) * s.entropy_after) / (1.0 + std::abs(s.entropy_before));
}

DiagnosticsRecord make_record(double t, const StateField& state, const EntropyParams& params,
                              const RunArtifact& run, const StepReport* last) {
  DiagnosticsRecord rec;
  const PeriodicGrid& grid = state.grid();
  const bool positive = state.is_positive();
  rec.t = t;
  rec.H = positive ? entropy_functional(state, params) : std::numeric_limits<double>::quiet_NaN();
  rec.mass1 = integral(state.u1(), grid);
  rec.mass2 = integral(state.u2(), grid);
  const Vec2 mins = state.minima();
  rec.min_u1 = mins[0];
  rec.min_u2 = mins[1];
  double dist2 = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double avg = std::exp(run.mu[c] * t) * run.initial_mean[c];
    Field diff(state.component(c));
    for (double& v : diff) v -= avg;
    const double d = norm_l2(diff, grid);
    dist2 += d * d;
  }
  rec.l2_to_average = std::sqrt(dist2);
  rec.hminus1_u1 = norm_hminus1(state.u1(), grid);
  rec.hminus1_u2 = norm_hminus1(state.u2(), grid);
  if (last) {
    rec.newton_iters = last->newton_iterations;
    rec.entropy_margin = step_margin(*last, run.c_h);
  }
  rec.clamp_events = positive ? count_clamp_events(state, params) : 0;
  return rec;
}

StateField lift_initial(const StateField& initial, Vec2& lift) {
  std::array<Field, 2> comps{initial.u1(), initial.u2()};
  for (int c = 0; c < 2; ++c) {
    bool touches_zero = false;
    for (double v : comps[c]) {
      if (!std::isfinite(v) || v < 0.0) {
        throw DomainError("simulate: initial data must be nonnegative and finite");
      }
      touches_zero = touches_zero || v == 0.0;
    }
    if (touches_zero) {
      const double m = mean(comps[c]);
      if (!(m > 0.0)) throw DomainError("simulate: initial component vanishes identically");
      lift[c] = 1e-8 * m;
      for (double& v : comps[c]) v += lift[c];
    }
  }
  return {initial.grid(), std::move(comps[0]), std::move(comps[1]), initial.mu()};
}

}  // namespace

RunArtifact simulate(const StateField& initial, const CoefficientSpec& spec,
                     const EntropyParams& params, const SchemeConfig& cfg, const Probes& probes) {
  validate(cfg, params, initial.mu(), initial.grid().dim());
  if (probes.every < 1) throw DomainError("simulate: probe cadence must be >= 1");

  Vec2 lift{0.0, 0.0};
  StateField state = lift_initial(initial, lift);
  RunArtifact run{.scheme = cfg.scheme, .records = {}, .steps = {}, .final_state = state};
  run.lift = lift;
  run.mu = initial.mu();
  run.initial_mean = {mean(state.u1()), mean(state.u2())};
  run.c_h = source_constant(params, run.mu);
  run.kappa = structure_kappa(spec, params);
  run.entropy_initial = entropy_functional(state, params);
  run.records.push_back(make_record(0.0, state, params, run, nullptr));

  const double t_end = cfg.t_end;
  const double t_eps = 1e-12 * t_end;
  double t = 0.0;
  double tau_now = cfg.tau;
  int consecutive_halvings = 0;
  int successes_since_halving = 0;
  std::size_t accepted = 0;

  while (t < t_end - t_eps) {
    double tau_step = std::min(tau_now, t_end - t);
    if (t_end - t - tau_step < t_eps) tau_step = t_end - t;
    SchemeConfig step_cfg = cfg;
    step_cfg.tau = tau_step;

    StepReport report;
    if (cfg.scheme == SchemeKind::EntropyImplicit) {
      try {
        auto result = step_entropy_implicit(state, spec, params, step_cfg);
        state = std::move(result.state);
        report = result.report;
      } catch (const NewtonNonConvergence&) {
        if (++consecutive_halvings > cfg.max_halvings) throw;
        ++run.tau_halvings;
        tau_now *= 0.5;
        successes_since_halving = 0;
        continue;
      }
    } else {
      const double h_before = entropy_functional(state, params);
      auto result = step_lagged_linear(state, spec, step_cfg);
      state = std::move(result.state);
      report.tau = tau_step;
      report.entropy_before = h_before;
      if (result.positivity_lost) {
        run.positivity_lost = true;
        report.entropy_after = std::numeric_limits<double>::quiet_NaN();
      } else {
        report.entropy_after = entropy_functional(state, params);
        report.dissipation = entropy_dissipation(state, spec, params);
      }
    }
    consecutive_halvings = 0;
    t += tau_step;
    ++accepted;
    run.steps.push_back(report);

    if (tau_now < cfg.tau && ++successes_since_halving >= cfg.redouble_after) {
      tau_now = std::min(cfg.tau, 2.0 * tau_now);
      successes_since_halving = 0;
    }
    const bool at_end = !(t < t_end - t_eps);
    if (accepted % static_cast<std::size_t>(probes.every) == 0 || at_end || run.positivity_lost) {
      run.records.push_back(make_record(t, state, params, run, &run.steps.back()));
    }
    if (run.positivity_lost) break;
  }
  run.final_state = std::move(state);
  return run;
}

EntropyInequalityReport entropy_inequality_report(const RunArtifact& run, double slack) {
  if (run.scheme != SchemeKind::EntropyImplicit) {
    throw std::invalid_argument("entropy_inequality_report: run was not produced by EntropyImplicit");
  }
  EntropyInequalityReport report;
  report.steps = run.steps.size();
  report.worst_margin = std::numeric_limits<double>::infinity();
  report.min_dissipation = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < run.steps.size(); ++k) {
    const double m = step_margin(run.steps[k], run.c_h);
    if (m < report.worst_margin) {
      report.worst_margin = m;
      report.worst_step = k;
    }
    report.min_dissipation = std::min(report.min_dissipation, run.steps[k].dissipation);
  }
  if (run.steps.empty()) {
    report.worst_margin = 0.0;
    report.min_dissipation = 0.0;
  }
  report.passed = report.worst_margin >= -slack;
  return report;
}

}  // namespace xdiff
