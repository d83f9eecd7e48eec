#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "xdiff/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"xdiff: entropy-stable solver for two-species cross-diffusion"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  long long seed = -1;
  int jobs = 1;
  int probe_every = 0;
  bool gnuplot = false;
  app.add_option("--config", config, "Config file (YAML or JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output directory (overrides output.dir)");
  app.add_option("--seed", seed, "Seed for random initial data and sampling checks");
  app.add_option("--jobs", jobs, "Concurrent sweep points")->check(CLI::PositiveNumber);
  app.add_option("--probe-every", probe_every, "Record diagnostics every N steps");
  app.add_flag("--gnuplot", gnuplot, "Also write whitespace-separated column files");

  for (const char* name : {"run", "verify-structure", "fp-compare", "sweep"}) {
    app.add_subcommand(name)->fallthrough();
  }
  app.get_subcommand("run")->description("Simulate and write diagnostics.csv and summary.json");
  app.get_subcommand("verify-structure")->description("Numerically check the structural assumptions");
  app.get_subcommand("fp-compare")->description("Fokker-Planck versus reduced-system consistency study");
  app.get_subcommand("sweep")->description("Run a parameter grid and fit convergence orders");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : xdiff::cli::kExitError;
  }

  xdiff::cli::init_logging();
  xdiff::cli::Overrides o;
  if (!out.empty()) o.out = out;
  if (seed >= 0) o.seed = static_cast<std::uint64_t>(seed);
  if (probe_every != 0) o.probe_every = probe_every;
  o.gnuplot = gnuplot;
  const std::string command = app.get_subcommands().front()->get_name();
  return xdiff::cli::dispatch(command, config, o, jobs);
}
