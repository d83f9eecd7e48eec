#pragma once

// Batch front end: config files, subcommands and their artifacts.
//
// Exit codes: 0 success, 1 usage/config/runtime error, 2 a checked property failed.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "xdiff/coeffs.hpp"
#include "xdiff/fokker_planck.hpp"
#include "xdiff/stepper.hpp"
#include "xdiff/system.hpp"

namespace xdiff::cli {

enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitAssertion = 2 };

/// Config problem; what() reads "<source>:<line>: <field>: <message>".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& field, const std::string& message);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class InitialPreset { Constant, CosinePerturbed, RandomSmooth };

struct InitialData {
  InitialPreset preset = InitialPreset::Constant;
  /// Base level of each component.
  Vec2 value{1.0, 1.0};
  /// cosine-perturbed: u_i = value_i (1 + amplitude cos 2 pi x).
  /// random-smooth: u_i = value_i exp(amplitude sum_k (c_k cos + s_k sin)(2 pi k x) / k^2).
  double amplitude = 0.5;
  int modes = 4;
  std::uint64_t seed = 1;
};

struct CoefficientConfig {
  /// constant | power | saturating | reciprocal | affine_power
  std::string family = "constant";
  /// power: a = r^exponent; affine_power: a = scale r^exponent + shift.
  double exponent = 0.5;
  double beta = 1.0;
  double scale = 1.0;
  double shift = 0.0;
  std::optional<double> a0;
  std::optional<double> p;
};

CoefficientSpec build_coefficient(const CoefficientConfig& cfg);

struct FPConfig {
  Vec2 lambda{0.5, -0.5};
  double sigma_n = 1.0;
  double half_width = 8.0;
  double horizon = 0.1;
  FPResolution base{128, 256, 1e-4};
  int levels = 1;
  /// f0 = (1 + amplitude cos 2 pi x) N(y; shift sin 2 pi x, width^2).
  double amplitude = 0.5;
  double width = 1.0;
  double shift = 0.0;
};

struct VerifyConfig {
  std::size_t samples = 10000;
  std::uint64_t seed = 7;
};

struct SweepConfig {
  std::vector<double> tau;
  std::vector<int> n;
  std::vector<double> alpha;
  bool empty() const { return tau.empty() && n.empty() && alpha.empty(); }
};

struct RunConfig {
  std::string source = "<string>";
  int d = 1;
  int n = 128;
  CoefficientConfig coefficient;
  /// Defaults to p + 4 of the coefficient when absent.
  std::optional<double> alpha;
  Vec2 mu{0.0, 0.0};
  SchemeConfig scheme;
  InitialData initial;
  int probe_every = 1;
  std::string out_dir = "xdiff_out";
  bool gnuplot = false;
  /// Allowed relative violation of the per-step entropy inequality.
  double entropy_slack = 1e-9;
  VerifyConfig verify;
  FPConfig fp;
  SweepConfig sweep;
};

/// Parses YAML (or JSON) text. Unknown keys are rejected.
RunConfig parse_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_config(const std::string& path);

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> probe_every;
  bool gnuplot = false;
};

void apply_overrides(RunConfig& cfg, const Overrides& o);

double resolved_alpha(const RunConfig& cfg, const CoefficientSpec& spec);
StateField make_initial(const RunConfig& cfg);

int cmd_run(const RunConfig& cfg);
int cmd_verify_structure(const RunConfig& cfg);
int cmd_fp_compare(const RunConfig& cfg);
int cmd_sweep(const RunConfig& cfg, int jobs);

/// Loads the config, applies overrides, runs the subcommand and maps exceptions
/// to exit codes. `command` is one of run, verify-structure, fp-compare, sweep.
int dispatch(const std::string& command, const std::string& config_path, const Overrides& o, int jobs);

/// Reads XDIFF_LOG (trace, debug, info, warn, error, off; default warn).
void init_logging();

}  // namespace xdiff::cli
