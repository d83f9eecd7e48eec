// Acceptance suite: one PASS/FAIL line per criterion. Exit status 0 iff all pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "xdiff/cli.hpp"
#include "xdiff/entropy.hpp"
#include "xdiff/fokker_planck.hpp"
#include "xdiff/random.hpp"
#include "xdiff/stepper.hpp"
#include "xdiff/system.hpp"

using namespace xdiff;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Smallest density seen by any EntropyImplicit run, for criterion 10.
double g_min_density = std::numeric_limits<double>::infinity();
int g_tracked_runs = 0;

void track(const RunArtifact& run) {
  if (run.scheme != SchemeKind::EntropyImplicit) return;
  ++g_tracked_runs;
  for (const auto& r : run.records) g_min_density = std::min({g_min_density, r.min_u1, r.min_u2});
  const Vec2 m = run.final_state.minima();
  g_min_density = std::min({g_min_density, m[0], m[1]});
}

void track(const StateField& s) {
  const Vec2 m = s.minima();
  g_min_density = std::min({g_min_density, m[0], m[1]});
}

StateField random_smooth(int n, std::uint64_t seed, Vec2 mu, double amplitude = 1.0) {
  cli::RunConfig cfg;
  cfg.n = n;
  cfg.mu = mu;
  cfg.initial.preset = cli::InitialPreset::RandomSmooth;
  cfg.initial.seed = seed;
  cfg.initial.amplitude = amplitude;
  return cli::make_initial(cfg);
}

StateField cosine(int n, double amplitude) {
  const PeriodicGrid grid(1, n);
  Field u(grid.size());
  for (int i = 0; i < n; ++i) u[i] = 1.0 + amplitude * std::cos(kTwoPi * grid.coord(i));
  return {grid, u, u};
}

double dist_l2(const StateField& s, Vec2 target, Vec2 weight = {1.0, 1.0}) {
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    Field d(s.component(c));
    for (double& v : d) v = weight[c] * v - target[c];
    const double e = norm_l2(d, s.grid());
    sum += e * e;
  }
  return std::sqrt(sum);
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const auto spec = CoefficientSpec::power(0.5);
  const auto params = make_entropy_params(4.5, spec);
  SchemeConfig cfg;
  cfg.tau = 1e-3;
  cfg.t_end = 0.5;
  cfg.newton_tol = 1e-12;
  const RunArtifact run = simulate(random_smooth(128, 1, {0, 0}), spec, params, cfg);
  track(run);
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : run.steps) {
    worst = std::max(worst, (s.entropy_after - s.entropy_before) / std::abs(s.entropy_before));
  }
  const bool pass = run.steps.size() == 500 && worst <= 1e-9;
  return {pass, fmt("%zu steps, max relative step change of H %.3e (limit +1e-9)", run.steps.size(), worst)};
}

Outcome criterion2() {
  constexpr std::size_t kSamples = 10000;
  const std::vector<CoefficientSpec> specs{CoefficientSpec::constant(), CoefficientSpec::power(0.5),
                                           CoefficientSpec::power(1.0), CoefficientSpec::saturating(0.5),
                                           CoefficientSpec::reciprocal()};
  bool pass = true;
  double worst_struct = std::numeric_limits<double>::infinity(), worst_grad = 0.0, worst_hess = 0.0,
         worst_round = 0.0, worst_eig = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 100;
  for (const auto& spec : specs) {
    const auto params = make_entropy_params(spec.p() + 4.0, spec);
    const auto sb = structure_bound_check(spec, params, kSamples, seed++);
    const auto dc = derivative_check(params, kSamples, seed++);
    worst_struct = std::min(worst_struct, sb.min_relative_margin);
    worst_grad = std::max(worst_grad, dc.gradient_rel_error);
    worst_hess = std::max(worst_hess, dc.hessian_rel_error);
    worst_round = std::max(worst_round, dc.roundtrip_rel_error);
    worst_eig = std::min(worst_eig, dc.min_hessian_eigen_ratio);
  }
  pass = worst_struct >= -1e-12 && worst_grad <= 1e-6 && worst_hess <= 1e-6 && worst_round <= 1e-8 &&
         worst_eig > 0.0;
  return {pass, fmt("%zu families x %zu samples: min eig ratio %.2e, structure margin %.2e (>= -1e-12), "
                    "grad fd %.2e, hess fd %.2e (<= 1e-6), roundtrip %.2e (<= 1e-8)",
                    specs.size(), kSamples, worst_eig, worst_struct, worst_grad, worst_hess, worst_round)};
}

double heat_error(int n, double tau, double t_end) {
  const auto spec = CoefficientSpec::constant();
  const auto params = make_entropy_params(4.0, spec);
  SchemeConfig cfg;
  cfg.tau = tau;
  cfg.t_end = t_end;
  cfg.newton_tol = 1e-12;
  const StateField init = cosine(n, 0.5);
  const RunArtifact run = simulate(init, spec, params, cfg, Probes{1000000});
  track(run);
  const double decay = 0.5 * std::exp(-kTwoPi * kTwoPi * t_end);
  double err = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < n; ++i) {
      const double exact = 1.0 + decay * std::cos(kTwoPi * init.grid().coord(i));
      err = std::max(err, std::abs(run.final_state.component(c)[i] - exact));
    }
  }
  return err;
}

Outcome criterion3() {
  constexpr double T = 0.05;
  // Spatial: tau = dx^2 so both error sources shrink by 4 per halving of dx.
  auto tau_for = [&](int n) {
    const double dx2 = 1.0 / (double(n) * n);
    return T / std::round(T / dx2);
  };
  const double e64 = heat_error(64, tau_for(64), T);
  const double e128 = heat_error(128, tau_for(128), T);
  const double spatial = e64 / e128;
  // Temporal: n = 256, tau halving.
  const std::vector<double> taus{1e-3, 5e-4, 2.5e-4};
  std::vector<double> errs;
  for (double tau : taus) errs.push_back(heat_error(256, tau, T));
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    mx += std::log(taus[k]) / taus.size();
    my += std::log(errs[k]) / taus.size();
  }
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < taus.size(); ++k) {
    sxy += (std::log(taus[k]) - mx) * (std::log(errs[k]) - my);
    sxx += (std::log(taus[k]) - mx) * (std::log(taus[k]) - mx);
  }
  const double order = sxy / sxx;
  const bool pass = spatial >= 3.5 && spatial <= 4.5 && order >= 0.9 && order <= 1.1;
  return {pass, fmt("spatial ratio n=64->128 %.3f (in [3.5, 4.5]); temporal order %.3f (in [0.9, 1.1]); "
                    "errors %.2e %.2e | %.2e %.2e %.2e",
                    spatial, order, e64, e128, errs[0], errs[1], errs[2])};
}

Outcome criterion4() {
  const auto spec = CoefficientSpec::power(0.5);
  const auto params = make_entropy_params(4.5, spec);
  SchemeConfig cfg;
  cfg.tau = 1e-3;
  cfg.t_end = 1.0;
  cfg.regularization_weight = 0.0;
  cfg.newton_tol = 1e-13;
  const RunArtifact run = simulate(random_smooth(128, 2, {0, 0}), spec, params, cfg);
  track(run);
  double drift = 0.0;
  const auto& first = run.records.front();
  for (const auto& r : run.records) {
    drift = std::max({drift, std::abs(r.mass1 - first.mass1), std::abs(r.mass2 - first.mass2)});
  }

  // Spatially constant data with growth rates: u^k = u^0 (1 - tau mu)^{-k}.
  const Vec2 mu{-1.0, -0.5};
  const Vec2 u0{1.3, 0.7};
  SchemeConfig c2 = cfg;
  c2.t_end = 0.1;
  c2.newton_tol = 1e-14;
  const RunArtifact flat = simulate(StateField::uniform(PeriodicGrid(1, 32), u0, mu), spec, params, c2);
  track(flat);
  double law = 0.0;
  const int k = static_cast<int>(flat.steps.size());
  for (int c = 0; c < 2; ++c) {
    const double exact = u0[c] * std::pow(1.0 - c2.tau * mu[c], -k);
    for (double v : flat.final_state.component(c)) law = std::max(law, std::abs(v - exact) / exact);
  }
  const bool pass = run.steps.size() == 1000 && drift <= 1e-10 && law <= 1e-12;
  return {pass, fmt("%zu steps, max mass drift %.3e (<= 1e-10); constant data after %d steps, relative "
                    "deviation from (1 - tau mu)^-k %.3e (<= 1e-12)",
                    run.steps.size(), drift, k, law)};
}

Outcome criterion5() {
  const auto spec = CoefficientSpec::power(0.5);
  const auto params = make_entropy_params(4.5, spec);
  SchemeConfig cfg;
  cfg.tau = 1e-3;
  cfg.t_end = 2.0;
  cfg.regularization_weight = 0.0;
  cfg.newton_tol = 1e-12;
  const RunArtifact run = simulate(random_smooth(128, 3, {0, 0}), spec, params, cfg);
  track(run);
  const double final_dist = run.records.back().l2_to_average;
  bool monotone = true;
  std::size_t where = 0;
  for (std::size_t k = 11; k < run.records.size(); ++k) {
    if (run.records[k].l2_to_average > run.records[k - 1].l2_to_average * (1.0 + 1e-12) + 1e-300) {
      monotone = false;
      where = k;
      break;
    }
  }
  const bool pass = final_dist <= 1e-6 && monotone;
  return {pass, fmt("|u(2) - mean|_L2 = %.3e (<= 1e-6); nonincreasing after step 10: %s%s", final_dist,
                    monotone ? "yes" : "no", monotone ? "" : fmt(" (record %zu)", where).c_str())};
}

Outcome criterion6() {
  const auto spec = CoefficientSpec::power(0.5);
  const auto params = make_entropy_params(4.5, spec);
  SchemeConfig cfg;
  cfg.tau = 1e-3;
  cfg.t_end = 2.0;
  cfg.regularization_weight = 0.0;
  cfg.newton_tol = 1e-12;
  const RunArtifact run = simulate(random_smooth(128, 4, {-1.0, -1.0}), spec, params, cfg, Probes{10});
  track(run);
  double worst = 0.0;
  Vec2 slopes{};
  for (int c = 0; c < 2; ++c) {
    std::vector<double> t, y;
    for (const auto& r : run.records) {
      if (r.t < 0.5 - 1e-12) continue;
      t.push_back(r.t);
      y.push_back(std::log(c == 0 ? r.hminus1_u1 : r.hminus1_u2));
    }
    double mt = 0, my = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      mt += t[k] / t.size();
      my += y[k] / t.size();
    }
    double sty = 0, stt = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
      sty += (t[k] - mt) * (y[k] - my);
      stt += (t[k] - mt) * (t[k] - mt);
    }
    slopes[c] = sty / stt;
    worst = std::max(worst, std::abs(slopes[c] + 1.0));
  }
  return {worst <= 0.05, fmt("slopes of log|u_i|_H-1 on [0.5, 2]: %.4f, %.4f (within 5%% of -1)", slopes[0],
                             slopes[1])};
}

Outcome criterion7() {
  const auto spec = CoefficientSpec::power(0.5);
  const auto params = make_entropy_params(4.5, spec);
  SchemeConfig cfg;
  cfg.tau = 2e-4;
  cfg.t_end = 2.0;
  cfg.regularization_weight = 0.0;
  cfg.newton_tol = 1e-12;
  const Vec2 mu{0.5, 0.5};
  const StateField init = random_smooth(64, 5, mu);
  const RunArtifact run = simulate(init, spec, params, cfg, Probes{1000});
  track(run);
  const double w = std::exp(-0.5 * cfg.t_end);
  const double d = dist_l2(run.final_state, run.initial_mean, {w, w});
  return {d <= 1e-4, fmt("|exp(-t/2) u(2) - mean|_L2 = %.3e (<= 1e-4)", d)};
}

Outcome criterion8() {
  const auto spec = CoefficientSpec::reciprocal();
  Rng rng(8);
  double identity = 0.0;
  for (int s = 0; s < 100; ++s) {
    const PeriodicGrid grid(1, 8);
    Field u1(8), u2(8);
    for (int k = 0; k < 8; ++k) {
      u1[k] = rng.log_uniform(1e-3, 1e3);
      u2[k] = rng.log_uniform(1e-3, 1e3);
    }
    const StateField st(grid, u1, u2);
    const auto [f1, f2] = flux_density(st, spec);
    const auto [n, theta] = energy_transport_transform(st);
    for (int k = 0; k < 8; ++k) {
      identity = std::max(identity, std::abs(f1[k] - n[k] * theta[k]) / (n[k] * theta[k]));
      identity = std::max(identity, std::abs(f2[k] - n[k] * theta[k] * theta[k]) / (n[k] * theta[k] * theta[k]));
    }
  }

  SchemeConfig cfg;
  cfg.tau = 1e-3;
  cfg.newton_tol = 1e-13;
  StateField u = random_smooth(64, 9, {0, 0}, 0.5);
  const auto [n0, th0] = energy_transport_transform(u);
  EnergyTransportState et{u.grid(), n0, th0};
  for (int k = 0; k < 100; ++k) {
    u = step_flux_implicit(u, spec, cfg);
    et = step_energy_transport(et, cfg);
  }
  track(u);
  double run_diff = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    run_diff = std::max(run_diff, std::abs(u.u1()[k] - et.n[k]) / u.u1()[k]);
    run_diff = std::max(run_diff, std::abs(u.u2()[k] - et.n[k] * et.theta[k]) / u.u2()[k]);
  }
  const bool pass = identity <= 1e-14 && run_diff <= 1e-9;
  return {pass, fmt("flux identity rel. error %.2e (<= 1e-14); 100-step runs differ by %.2e relative "
                    "(solver tolerance 1e-9)",
                    identity, run_diff)};
}

Outcome criterion9() {
  FPScenario sc;
  sc.lambda = {0.5, -0.5};
  sc.sigma_n = 1.0;
  sc.half_width = 8.0;
  sc.horizon = 0.1;
  sc.f0 = gaussian_density(0.5, 1.0);
  const auto ladder = refinement_ladder({128, 256, 1e-4}, 1);

  const auto constant = CoefficientSpec::constant();
  const auto rc = consistency_compare(constant, make_entropy_params(4.0, constant), sc, ladder);

  // Shifting the Gaussian in y makes u1/u2 vary in x; the shift needs a wider truncation.
  FPScenario sp = sc;
  sp.f0 = gaussian_density(0.5, 1.0, 0.5);
  sp.half_width = 9.0;
  const auto power = CoefficientSpec::power(0.5);
  const auto rp = consistency_compare(power, make_entropy_params(4.5, power), sp, ladder);

  auto in_band = [](Vec2 q) { return q[0] >= 3.0 && q[0] <= 5.0 && q[1] >= 3.0 && q[1] <= 5.0; };
  const Vec2 base = rc.rows[0].discrepancy;
  Vec2 trunc{0.0, 0.0};
  bool nonneg = true;
  for (int r = 0; r < 2; ++r) {
    for (const auto& row : (r == 0 ? rc : rp).rows) {
      trunc[r] = std::max(trunc[r], row.worst_truncation);
      nonneg = nonneg && row.nonnegative;
    }
  }
  const bool truncation = trunc[0] <= 1e-10 && trunc[1] <= 1e-10;
  const bool pass = std::max(base[0], base[1]) <= 0.02 && in_band(rc.ratios[0]) && in_band(rp.ratios[0]) &&
                    truncation && nonneg;
  return {pass, fmt("constant: baseline discrepancy (%.2e, %.2e) (<= 2e-2), refinement ratio (%.2f, %.2f); "
                    "power(0.5): (%.2e, %.2e) -> ratio (%.2f, %.2f); ratios in [3, 5]; truncation (%.1e, %.1e) (<= 1e-10)",
                    base[0], base[1], rc.ratios[0][0], rc.ratios[0][1], rp.rows[0].discrepancy[0],
                    rp.rows[0].discrepancy[1], rp.ratios[0][0], rp.ratios[0][1], trunc[0], trunc[1])};
}

Outcome criterion10() {
  const bool pass = g_tracked_runs > 0 && g_min_density > 0.0;
  return {pass, fmt("minimum density over %d implicit runs: %.3e (> 0)", g_tracked_runs, g_min_density)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"entropy monotonicity", criterion1}, {"convexity and structure", criterion2},
      {"heat-equation oracle", criterion3}, {"mass law", criterion4},
      {"large-time convergence", criterion5}, {"H^-1 exponential decay", criterion6},
      {"rescaled convergence", criterion7}, {"energy-transport identity", criterion8},
      {"Fokker-Planck consistency", criterion9}, {"positivity", criterion10}};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += o.pass ? 0 : 1;
    std::printf("criterion %2zu %s %s: %s [%.1fs]\n", k + 1, o.pass ? "PASS" : "FAIL",
                criteria[k].first.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
