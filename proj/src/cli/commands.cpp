#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <numbers>
#include <thread>

#include <json.hpp>
#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "xdiff/cli.hpp"
#include "xdiff/errors.hpp"
#include "xdiff/version.hpp"

namespace xdiff::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

json pair_json(const Vec2& v) { return json::array({v[0], v[1]}); }

std::string preset_name(InitialPreset p) {
  switch (p) {
    case InitialPreset::Constant: return "constant";
    case InitialPreset::CosinePerturbed: return "cosine-perturbed";
    case InitialPreset::RandomSmooth: return "random-smooth";
  }
  return "?";
}

json versions_json() {
  json v = json::object();
  for (const auto& [k, s] : build_versions()) v[k] = s;
  return v;
}

json config_json(const RunConfig& c) {
  json coeff{{"family", c.coefficient.family},
             {"exponent", c.coefficient.exponent},
             {"beta", c.coefficient.beta},
             {"scale", c.coefficient.scale},
             {"shift", c.coefficient.shift}};
  if (c.coefficient.a0) coeff["a0"] = *c.coefficient.a0;
  if (c.coefficient.p) coeff["p"] = *c.coefficient.p;
  json scheme{{"kind", to_string(c.scheme.scheme)},
              {"tau", c.scheme.tau},
              {"t_end", c.scheme.t_end},
              {"m", c.scheme.m},
              {"newton_tol", c.scheme.newton_tol},
              {"newton_max", c.scheme.newton_max},
              {"max_halvings", c.scheme.max_halvings}};
  if (c.scheme.regularization_weight) scheme["regularization_weight"] = *c.scheme.regularization_weight;
  else scheme["regularization_weight"] = "tau";
  json out{{"source", c.source},
           {"grid", {{"d", c.d}, {"n", c.n}}},
           {"coefficient", coeff},
           {"mu", pair_json(c.mu)},
           {"scheme", scheme},
           {"initial",
            {{"preset", preset_name(c.initial.preset)},
             {"value", pair_json(c.initial.value)},
             {"amplitude", c.initial.amplitude},
             {"modes", c.initial.modes},
             {"seed", c.initial.seed}}},
           {"probes", {{"every", c.probe_every}}},
           {"assertions", {{"entropy_slack", c.entropy_slack}}}};
  if (c.alpha) out["entropy"] = {{"alpha", *c.alpha}};
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory '" + dir + "'");
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << std::setw(2) << j << '\n';
}

// L-inf distance to value (1 + A e^{-4 pi^2 t} cos 2 pi x): the exact solution for the
// constant coefficient, cosine-perturbed data and mu = 0.
std::optional<double> heat_oracle_error(const RunConfig& cfg, const CoefficientSpec& spec,
                                        const StateField& state, double t) {
  if (spec.family() != Family::Constant || cfg.initial.preset != InitialPreset::CosinePerturbed ||
      cfg.mu[0] != 0.0 || cfg.mu[1] != 0.0) {
    return std::nullopt;
  }
  const PeriodicGrid& grid = state.grid();
  const double two_pi = 2.0 * std::numbers::pi;
  const double decay = cfg.initial.amplitude * std::exp(-two_pi * two_pi * t);
  const int ny = grid.dim() == 2 ? grid.n() : 1;
  double err = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < grid.n(); ++i) {
        const double exact = cfg.initial.value[c] * (1.0 + decay * std::cos(two_pi * grid.coord(i)));
        err = std::max(err, std::abs(state.component(c)[grid.index(i, j)] - exact));
      }
    }
  }
  return err;
}

struct PointOutcome {
  int exit_code = kExitOk;
  std::string message;
  json summary;
};

PointOutcome run_to_dir(const RunConfig& cfg) {
  PointOutcome outcome;
  const CoefficientSpec spec = build_coefficient(cfg.coefficient);
  const EntropyParams params = make_entropy_params(resolved_alpha(cfg, spec), spec);
  SchemeConfig scheme = cfg.scheme;
  const StateField initial = make_initial(cfg);
  ensure_dir(cfg.out_dir);

  spdlog::info("run: {} n={} d={} tau={} t_end={} alpha={}", to_string(scheme.scheme), cfg.n, cfg.d,
               scheme.tau, scheme.t_end, params.alpha);
  const RunArtifact run = simulate(initial, spec, params, scheme, Probes{cfg.probe_every});

  {
    std::ofstream csv(fs::path(cfg.out_dir) / "diagnostics.csv");
    if (!csv) throw std::runtime_error("cannot write diagnostics.csv in '" + cfg.out_dir + "'");
    write_csv(csv, run.records);
  }
  if (cfg.gnuplot) {
    std::ofstream dat(fs::path(cfg.out_dir) / "diagnostics.dat");
    write_gnuplot(dat, run.records);
  }

  const DiagnosticsRecord& last = run.records.back();
  const Vec2 mins = run.final_state.minima();
  json s;
  s["status"] = "ok";
  s["scheme"] = to_string(run.scheme);
  s["steps"] = run.steps.size();
  s["t_final"] = last.t;
  s["tau_halvings"] = run.tau_halvings;
  s["lift"] = pair_json(run.lift);
  s["c_h"] = run.c_h;
  s["kappa"] = run.kappa;
  s["alpha"] = params.alpha;
  s["coefficient"] = {{"label", spec.label()}, {"a0", spec.a0()}, {"p", spec.p()}};
  s["final"] = {{"H", last.H},
                {"mass", pair_json({last.mass1, last.mass2})},
                {"min_u", pair_json(mins)},
                {"l2_to_average", last.l2_to_average},
                {"hminus1", pair_json({last.hminus1_u1, last.hminus1_u2})}};
  s["entropy_initial"] = run.entropy_initial;
  if (auto e = heat_oracle_error(cfg, spec, run.final_state, last.t)) s["heat_oracle_linf_error"] = *e;

  bool failed = false;
  if (run.scheme == SchemeKind::EntropyImplicit) {
    const EntropyInequalityReport rep = entropy_inequality_report(run, cfg.entropy_slack);
    s["entropy_inequality"] = {{"worst_margin", rep.worst_margin},
                               {"worst_step", rep.worst_step},
                               {"min_dissipation", rep.min_dissipation},
                               {"slack", cfg.entropy_slack},
                               {"passed", rep.passed}};
    if (!rep.passed) {
      failed = true;
      outcome.message = "entropy inequality violated at step " + std::to_string(rep.worst_step);
    }
    if (!(mins[0] > 0.0) || !(mins[1] > 0.0)) {
      failed = true;
      outcome.message = "positivity lost";
    }
  }
  s["positivity_lost"] = run.positivity_lost;
  if (run.positivity_lost) {
    failed = true;
    outcome.message = "positivity lost (lagged scheme)";
  }
  if (failed) {
    s["status"] = "assertion_failed";
    s["failure"] = outcome.message;
    outcome.exit_code = kExitAssertion;
  }
  s["config"] = config_json(cfg);
  s["versions"] = versions_json();
  write_json(fs::path(cfg.out_dir) / "summary.json", s);
  outcome.summary = std::move(s);
  return outcome;
}

struct Check {
  std::string name;
  bool passed;
  json detail;
};

// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace

void init_logging() {
  auto logger = spdlog::get("xdiff");
  if (!logger) logger = spdlog::stderr_color_mt("xdiff");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("XDIFF_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

int cmd_run(const RunConfig& cfg) {
  const PointOutcome out = run_to_dir(cfg);
  const auto& fin = out.summary["final"];
  std::cout << "run: " << out.summary["status"].get<std::string>() << ", steps " << out.summary["steps"]
            << ", H " << fin["H"] << ", l2_to_average " << fin["l2_to_average"] << " -> " << cfg.out_dir
            << '\n';
  if (out.exit_code != kExitOk) std::cerr << "assertion failed: " << out.message << '\n';
  return out.exit_code;
}

int cmd_verify_structure(const RunConfig& cfg) {
  const CoefficientSpec spec = build_coefficient(cfg.coefficient);
  const EntropyParams params = make_entropy_params(resolved_alpha(cfg, spec), spec);
  const std::size_t samples = cfg.verify.samples;
  const std::uint64_t seed = cfg.verify.seed;
  std::vector<Check> checks;

  const auto grid = default_r_grid();
  const AssumptionReport ass = verify_assumptions(spec, grid);
  checks.push_back({"growth_bound", ass.growth_ok,
                    {{"relative_margin", ass.growth_margin}, {"worst_r", ass.worst_growth_r}}});
  checks.push_back({"lower_bound", ass.lower_bound_ok, {{"relative_margin", ass.lower_bound_margin}}});
  checks.push_back({"monotonicity", ass.monotonicity_ok,
                    {{"a_over_r_violation", ass.a_over_r_violation},
                     {"a_times_r_violation", ass.a_times_r_violation}}});

  const StructureBoundReport sb = structure_bound_check(spec, params, samples, seed);
  checks.push_back({"structure_bound", sb.min_relative_margin >= -1e-12,
                    {{"kappa", sb.kappa},
                     {"min_margin", sb.min_margin},
                     {"min_relative_margin", sb.min_relative_margin},
                     {"samples", sb.samples}}});

  const MatrixBoundReport mb = matrix_bound_check(spec, samples, seed + 1);
  checks.push_back({"matrix_bound", mb.finite, {{"c_a", mb.c_a}, {"samples", mb.samples}}});

  const PetrovskiReport pk = petrovski_check(spec, samples, seed + 2);
  checks.push_back({"petrovski", pk.passed, {{"min_eigenvalue", pk.min_eigenvalue}, {"samples", pk.samples}}});

  const QuadraticGrowthReport qg = quadratic_growth_check(spec, samples, seed + 3);
  checks.push_back({"quadratic_growth", qg.passed,
                    {{"c_a", qg.c_a}, {"min_relative_margin", qg.min_relative_margin}, {"samples", qg.samples}}});

  const DerivativeCheckReport dc = derivative_check(params, samples, seed + 4);
  checks.push_back({"gradient_fd", dc.gradient_rel_error <= 1e-6, {{"rel_error", dc.gradient_rel_error}}});
  checks.push_back({"hessian_fd", dc.hessian_rel_error <= 1e-6, {{"rel_error", dc.hessian_rel_error}}});
  checks.push_back({"hessian_positive", dc.min_hessian_eigen_ratio > 0.0,
                    {{"min_eigen_ratio", dc.min_hessian_eigen_ratio}}});
  checks.push_back({"invert_roundtrip", dc.roundtrip_rel_error <= 1e-8, {{"rel_error", dc.roundtrip_rel_error}}});

  bool all = true;
  json report;
  report["coefficient"] = {{"label", spec.label()},
                           {"a0", spec.a0()},
                           {"p", spec.p()},
                           {"derivative_approximate", spec.derivative_is_approximate()}};
  report["alpha"] = params.alpha;
  report["checks"] = json::array();
  for (const Check& c : checks) {
    all = all && c.passed;
    report["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ' ' << c.detail.dump() << '\n';
  }
  report["passed"] = all;
  report["versions"] = versions_json();
  ensure_dir(cfg.out_dir);
  write_json(fs::path(cfg.out_dir) / "verify.json", report);
  return all ? kExitOk : kExitAssertion;
}

int cmd_fp_compare(const RunConfig& cfg) {
  const CoefficientSpec spec = build_coefficient(cfg.coefficient);
  const EntropyParams params = make_entropy_params(resolved_alpha(cfg, spec), spec);
  const FPConfig& f = cfg.fp;
  if (!(f.lambda[0] != f.lambda[1])) throw DomainError("fp.lambda: weights must be distinct");
  FPScenario scenario;
  scenario.lambda = f.lambda;
  scenario.sigma_n = f.sigma_n;
  scenario.half_width = f.half_width;
  scenario.horizon = f.horizon;
  scenario.f0 = gaussian_density(f.amplitude, f.width, f.shift);
  const auto ladder = refinement_ladder(f.base, f.levels);
  const ConsistencyReport rep = consistency_compare(spec, params, scenario, ladder);

  ensure_dir(cfg.out_dir);
  std::ofstream csv(fs::path(cfg.out_dir) / "fp_compare.csv");
  csv << "nx,ny,tau,steps,discrepancy_u1,discrepancy_u2,mass_drift,worst_truncation,nonnegative\n";
  csv << std::setprecision(17);
  json rows = json::array();
  bool ok = true, truncation_ok = true;
  for (const ConsistencyRow& r : rep.rows) {
    csv << r.resolution.nx << ',' << r.resolution.ny << ',' << r.resolution.tau << ',' << r.steps << ','
        << r.discrepancy[0] << ',' << r.discrepancy[1] << ',' << r.mass_drift << ',' << r.worst_truncation
        << ',' << (r.nonnegative ? 1 : 0) << '\n';
    rows.push_back({{"nx", r.resolution.nx},
                    {"ny", r.resolution.ny},
                    {"tau", r.resolution.tau},
                    {"steps", r.steps},
                    {"discrepancy", pair_json(r.discrepancy)},
                    {"mass_drift", r.mass_drift},
                    {"worst_truncation", r.worst_truncation},
                    {"truncation_adequate", r.worst_truncation <= 1e-10},
                    {"nonnegative", r.nonnegative}});
    ok = ok && r.nonnegative;
    truncation_ok = truncation_ok && r.worst_truncation <= 1e-10;
    std::cout << "nx=" << r.resolution.nx << " ny=" << r.resolution.ny << " tau=" << r.resolution.tau
              << " discrepancy=(" << r.discrepancy[0] << ", " << r.discrepancy[1] << ")\n";
  }
  json ratios = json::array();
  for (const Vec2& q : rep.ratios) {
    ratios.push_back(pair_json(q));
    ok = ok && q[0] > 1.0 && q[1] > 1.0;
  }
  if (!truncation_ok) spdlog::warn("fp-compare: truncation adequacy violated; enlarge fp.half_width");
  json summary{{"rows", rows},
               {"refinement_ratios", ratios},
               {"truncation_warning", !truncation_ok},
               {"mu", pair_json({0.5 * f.lambda[0] * f.lambda[0] * f.sigma_n * f.sigma_n,
                                 0.5 * f.lambda[1] * f.lambda[1] * f.sigma_n * f.sigma_n})},
               {"coefficient", spec.label()},
               {"alpha", params.alpha},
               {"passed", ok},
               {"versions", versions_json()}};
  write_json(fs::path(cfg.out_dir) / "fp_compare.json", summary);
  return ok ? kExitOk : kExitAssertion;
}

int cmd_sweep(const RunConfig& cfg, int jobs) {
  if (cfg.sweep.empty()) throw ConfigError(cfg.source, 0, "sweep", "parameter grid is empty");
  const std::vector<double> taus = cfg.sweep.tau.empty() ? std::vector<double>{cfg.scheme.tau} : cfg.sweep.tau;
  const std::vector<int> ns = cfg.sweep.n.empty() ? std::vector<int>{cfg.n} : cfg.sweep.n;
  std::vector<std::optional<double>> alphas;
  if (cfg.sweep.alpha.empty()) alphas.push_back(cfg.alpha);
  for (double a : cfg.sweep.alpha) alphas.emplace_back(a);

  std::vector<RunConfig> points;
  for (double tau : taus) {
    for (int n : ns) {
      for (const auto& alpha : alphas) {
        RunConfig p = cfg;
        p.scheme.tau = tau;
        p.n = n;
        p.alpha = alpha;
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu", points.size());
        p.out_dir = (fs::path(cfg.out_dir) / name).string();
        points.push_back(std::move(p));
      }
    }
  }
  ensure_dir(cfg.out_dir);

  std::vector<PointOutcome> outcomes(points.size());
  std::atomic<std::size_t> next{0};
  const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(points.size())));
  auto worker = [&] {
    if (workers > 1) omp_set_num_threads(1);
    for (std::size_t k = next++; k < points.size(); k = next++) {
      try {
        outcomes[k] = run_to_dir(points[k]);
      } catch (const std::exception& e) {
        outcomes[k].exit_code = kExitError;
        outcomes[k].message = e.what();
        spdlog::error("sweep point {}: {}", k, e.what());
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }

  std::ofstream csv(fs::path(cfg.out_dir) / "sweep_summary.csv");
  csv << "point,tau,n,alpha,status,steps,H,l2_to_average,heat_error,worst_margin\n";
  csv << std::setprecision(17);
  int exit_code = kExitOk;
  json fits = json::array();
  // (n, alpha) -> (tau, err) and (tau, alpha) -> (n, err)
  std::map<std::pair<int, double>, std::vector<std::pair<double, double>>> by_n;
  std::map<std::pair<double, double>, std::vector<std::pair<double, double>>> by_tau;
  for (std::size_t k = 0; k < points.size(); ++k) {
    const PointOutcome& o = outcomes[k];
    const RunConfig& p = points[k];
    const json& s = o.summary;
    const double alpha = s.contains("alpha") ? s["alpha"].get<double>() : p.alpha.value_or(NAN);
    std::string status = o.exit_code == kExitError ? "error" : s.value("status", "error");
    csv << k << ',' << p.scheme.tau << ',' << p.n << ',' << alpha << ',' << status << ',';
    if (o.exit_code == kExitError) {
      csv << ",,,,\n";
      exit_code = kExitAssertion;
      continue;
    }
    if (o.exit_code != kExitOk) exit_code = kExitAssertion;
    const double heat = s.value("heat_oracle_linf_error", NAN);
    const double margin = s.contains("entropy_inequality") ? s["entropy_inequality"]["worst_margin"].get<double>()
                                                           : NAN;
    csv << s["steps"] << ',' << s["final"]["H"].get<double>() << ','
        << s["final"]["l2_to_average"].get<double>() << ',' << heat << ',' << margin << '\n';
    if (std::isfinite(heat) && heat > 0.0) {
      by_n[{p.n, alpha}].push_back({p.scheme.tau, heat});
      by_tau[{p.scheme.tau, alpha}].push_back({static_cast<double>(p.n), heat});
    }
  }
  for (const auto& [key, pts] : by_n) {
    if (pts.size() < 2) continue;
    std::vector<double> x, y;
    for (auto [tau, e] : pts) {
      x.push_back(tau);
      y.push_back(e);
    }
    fits.push_back({{"kind", "temporal"}, {"n", key.first}, {"alpha", key.second}, {"order", loglog_slope(x, y)}});
  }
  for (const auto& [key, pts] : by_tau) {
    if (pts.size() < 2) continue;
    std::vector<double> x, y;
    for (auto [n, e] : pts) {
      x.push_back(n);
      y.push_back(e);
    }
    fits.push_back({{"kind", "spatial"}, {"tau", key.first}, {"alpha", key.second}, {"order", -loglog_slope(x, y)}});
  }
  json summary{{"points", points.size()}, {"orders", fits}, {"versions", versions_json()}};
  json failures = json::array();
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (outcomes[k].exit_code != kExitOk) failures.push_back({{"point", k}, {"message", outcomes[k].message}});
  }
  summary["failures"] = failures;
  write_json(fs::path(cfg.out_dir) / "sweep.json", summary);
  for (const auto& f : fits) std::cout << f["kind"].get<std::string>() << " order " << f["order"] << '\n';
  std::cout << "sweep: " << points.size() << " points, " << failures.size() << " failed -> " << cfg.out_dir
            << '\n';
  return exit_code;
}

int dispatch(const std::string& command, const std::string& config_path, const Overrides& o, int jobs) {
  try {
    RunConfig cfg = load_config(config_path);
    apply_overrides(cfg, o);
    if (command == "run") return cmd_run(cfg);
    if (command == "verify-structure") return cmd_verify_structure(cfg);
    if (command == "fp-compare") return cmd_fp_compare(cfg);
    if (command == "sweep") return cmd_sweep(cfg, jobs);
    std::cerr << "error: unknown command '" << command << "'\n";
    return kExitError;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kExitError;
}

}  // namespace xdiff::cli
