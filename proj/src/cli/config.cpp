#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "xdiff/cli.hpp"
#include "xdiff/errors.hpp"
#include "xdiff/random.hpp"

namespace xdiff::cli {
namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& field, const std::string& msg) const {
    const int line = node.IsDefined() && node.Mark().line >= 0 ? node.Mark().line + 1 : 0;
    throw ConfigError(source_, line, field, msg);
  }

  void require_map(const YAML::Node& node, const std::string& field) const {
    if (!node.IsMap()) fail(node, field, "expected a mapping");
  }

  void allow_keys(const YAML::Node& node, const std::string& field, std::set<std::string> keys) const {
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!keys.count(key)) fail(kv.first, join(field, key), "unknown key");
    }
  }

  template <class T>
  void read(const YAML::Node& parent, const std::string& key, const std::string& field, T& out) const {
    const YAML::Node node = parent[key];
    if (!node.IsDefined() || node.IsNull()) return;
    out = convert<T>(node, join(field, key));
  }

  template <class T>
  void read_opt(const YAML::Node& parent, const std::string& key, const std::string& field,
                std::optional<T>& out) const {
    const YAML::Node node = parent[key];
    if (!node.IsDefined() || node.IsNull()) return;
    out = convert<T>(node, join(field, key));
  }

  Vec2 pair(const YAML::Node& node, const std::string& field) const {
    if (!node.IsSequence() || node.size() != 2) fail(node, field, "expected a list of two numbers");
    return {convert<double>(node[0], field + "[0]"), convert<double>(node[1], field + "[1]")};
  }

  template <class T>
  std::vector<T> list(const YAML::Node& parent, const std::string& key, const std::string& field) const {
    std::vector<T> out;
    const YAML::Node node = parent[key];
    if (!node.IsDefined() || node.IsNull()) return out;
    if (!node.IsSequence()) fail(node, join(field, key), "expected a list");
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.push_back(convert<T>(node[i], join(field, key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  template <class T>
  T convert(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) fail(node, field, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::BadConversion&) {
      fail(node, field, std::string("cannot convert '") + node.Scalar() + "'");
    }
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

SchemeKind parse_scheme(const Reader& r, const YAML::Node& node, const std::string& field) {
  const auto s = r.convert<std::string>(node, field);
  if (s == "entropy_implicit" || s == "EntropyImplicit") return SchemeKind::EntropyImplicit;
  if (s == "lagged_linear" || s == "LaggedLinear") return SchemeKind::LaggedLinear;
  r.fail(node, field, "unknown scheme '" + s + "' (entropy_implicit, lagged_linear)");
}

InitialPreset parse_preset(const Reader& r, const YAML::Node& node, const std::string& field) {
  const auto s = r.convert<std::string>(node, field);
  if (s == "constant") return InitialPreset::Constant;
  if (s == "cosine-perturbed") return InitialPreset::CosinePerturbed;
  if (s == "random-smooth") return InitialPreset::RandomSmooth;
  r.fail(node, field, "unknown preset '" + s + "' (constant, cosine-perturbed, random-smooth)");
}

void positive(const Reader& r, const YAML::Node& node, const std::string& field, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) r.fail(node, field, "must be positive");
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line, const std::string& field,
                         const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + field + ": " + message),
      line_(line),
      field_(field) {}

CoefficientSpec build_coefficient(const CoefficientConfig& c) {
  CoefficientSpec spec = CoefficientSpec::constant();
  if (c.family == "constant") {
    spec = CoefficientSpec::constant();
  } else if (c.family == "power") {
    spec = CoefficientSpec::power(c.exponent);
  } else if (c.family == "saturating") {
    spec = CoefficientSpec::saturating(c.beta);
  } else if (c.family == "reciprocal") {
    spec = CoefficientSpec::reciprocal();
  } else if (c.family == "affine_power") {
    if (!c.a0 || !c.p) throw DomainError("coefficient: affine_power needs explicit a0 and p");
    const double scale = c.scale, e = c.exponent, shift = c.shift;
    std::ostringstream label;
    label << scale << "*r^" << e << (shift < 0 ? "" : "+") << shift;
    return CoefficientSpec::custom([=](double r) { return scale * std::pow(r, e) + shift; }, *c.a0, *c.p,
                                   label.str());
  } else {
    throw DomainError("coefficient: unknown family '" + c.family + "'");
  }
  if (c.a0 || c.p) spec = spec.with_constants(c.a0.value_or(spec.a0()), c.p.value_or(spec.p()));
  return spec;
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig cfg;
  cfg.source = source;
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source, e.mark.line + 1, "<document>", e.msg);
  }
  if (root.IsNull()) return cfg;
  r.require_map(root, "<document>");
  r.allow_keys(root, "", {"grid", "coefficient", "entropy", "mu", "scheme", "initial", "probes", "output",
                          "assertions", "verify", "fp", "sweep"});

  if (const auto g = root["grid"]) {
    r.require_map(g, "grid");
    r.allow_keys(g, "grid", {"d", "n"});
    r.read(g, "d", "grid", cfg.d);
    r.read(g, "n", "grid", cfg.n);
    if (cfg.d != 1 && cfg.d != 2) r.fail(g["d"], "grid.d", "must be 1 or 2");
    if (cfg.n < 4) r.fail(g["n"], "grid.n", "must be >= 4");
  }
  if (const auto c = root["coefficient"]) {
    r.require_map(c, "coefficient");
    r.allow_keys(c, "coefficient", {"family", "exponent", "beta", "scale", "shift", "a0", "p"});
    auto& cc = cfg.coefficient;
    r.read(c, "family", "coefficient", cc.family);
    r.read(c, "exponent", "coefficient", cc.exponent);
    r.read(c, "beta", "coefficient", cc.beta);
    r.read(c, "scale", "coefficient", cc.scale);
    r.read(c, "shift", "coefficient", cc.shift);
    r.read_opt(c, "a0", "coefficient", cc.a0);
    r.read_opt(c, "p", "coefficient", cc.p);
    static const std::set<std::string> families{"constant", "power", "saturating", "reciprocal",
                                                "affine_power"};
    if (!families.count(cc.family)) {
      r.fail(c["family"], "coefficient.family",
             "unknown family '" + cc.family + "' (constant, power, saturating, reciprocal, affine_power)");
    }
    if (cc.family == "affine_power" && (!cc.a0 || !cc.p)) {
      r.fail(c, "coefficient", "affine_power needs explicit a0 and p");
    }
  }
  if (const auto e = root["entropy"]) {
    r.require_map(e, "entropy");
    r.allow_keys(e, "entropy", {"alpha"});
    r.read_opt(e, "alpha", "entropy", cfg.alpha);
  }
  if (const auto m = root["mu"]) cfg.mu = r.pair(m, "mu");

  if (const auto s = root["scheme"]) {
    r.require_map(s, "scheme");
    r.allow_keys(s, "scheme", {"kind", "tau", "t_end", "m", "newton_tol", "newton_max",
                               "regularization_weight", "max_halvings"});
    auto& sc = cfg.scheme;
    if (s["kind"]) sc.scheme = parse_scheme(r, s["kind"], "scheme.kind");
    r.read(s, "tau", "scheme", sc.tau);
    r.read(s, "t_end", "scheme", sc.t_end);
    r.read(s, "newton_tol", "scheme", sc.newton_tol);
    r.read(s, "newton_max", "scheme", sc.newton_max);
    r.read(s, "max_halvings", "scheme", sc.max_halvings);
    r.read_opt(s, "regularization_weight", "scheme", sc.regularization_weight);
    if (s["tau"]) positive(r, s["tau"], "scheme.tau", sc.tau);
    if (s["t_end"]) positive(r, s["t_end"], "scheme.t_end", sc.t_end);
    if (sc.regularization_weight && !(*sc.regularization_weight >= 0.0)) {
      r.fail(s["regularization_weight"], "scheme.regularization_weight", "must be >= 0");
    }
    sc.m = default_regularization_order(cfg.d);
    r.read(s, "m", "scheme", sc.m);
  } else {
    cfg.scheme.m = default_regularization_order(cfg.d);
  }

  if (const auto i = root["initial"]) {
    r.require_map(i, "initial");
    r.allow_keys(i, "initial", {"preset", "value", "amplitude", "modes", "seed"});
    auto& in = cfg.initial;
    if (i["preset"]) in.preset = parse_preset(r, i["preset"], "initial.preset");
    if (i["value"]) {
      in.value = r.pair(i["value"], "initial.value");
      if (!(in.value[0] > 0.0) || !(in.value[1] > 0.0)) r.fail(i["value"], "initial.value", "must be positive");
    }
    r.read(i, "amplitude", "initial", in.amplitude);
    r.read(i, "modes", "initial", in.modes);
    r.read(i, "seed", "initial", in.seed);
    if (in.preset == InitialPreset::CosinePerturbed && !(std::abs(in.amplitude) < 1.0)) {
      r.fail(i["amplitude"], "initial.amplitude", "cosine-perturbed needs |amplitude| < 1");
    }
    if (in.modes < 1) r.fail(i["modes"], "initial.modes", "must be >= 1");
  }
  if (const auto p = root["probes"]) {
    r.require_map(p, "probes");
    r.allow_keys(p, "probes", {"every"});
    r.read(p, "every", "probes", cfg.probe_every);
    if (cfg.probe_every < 1) r.fail(p["every"], "probes.every", "must be >= 1");
  }
  if (const auto o = root["output"]) {
    r.require_map(o, "output");
    r.allow_keys(o, "output", {"dir", "gnuplot"});
    r.read(o, "dir", "output", cfg.out_dir);
    r.read(o, "gnuplot", "output", cfg.gnuplot);
  }
  if (const auto a = root["assertions"]) {
    r.require_map(a, "assertions");
    r.allow_keys(a, "assertions", {"entropy_slack"});
    r.read(a, "entropy_slack", "assertions", cfg.entropy_slack);
  }
  if (const auto v = root["verify"]) {
    r.require_map(v, "verify");
    r.allow_keys(v, "verify", {"samples", "seed"});
    r.read(v, "samples", "verify", cfg.verify.samples);
    r.read(v, "seed", "verify", cfg.verify.seed);
    if (cfg.verify.samples < 1) r.fail(v["samples"], "verify.samples", "must be >= 1");
  }
  if (const auto f = root["fp"]) {
    r.require_map(f, "fp");
    r.allow_keys(f, "fp", {"lambda", "sigma_n", "half_width", "horizon", "nx", "ny", "tau", "levels",
                           "amplitude", "width", "shift"});
    auto& fp = cfg.fp;
    if (f["lambda"]) fp.lambda = r.pair(f["lambda"], "fp.lambda");
    r.read(f, "sigma_n", "fp", fp.sigma_n);
    r.read(f, "half_width", "fp", fp.half_width);
    r.read(f, "horizon", "fp", fp.horizon);
    r.read(f, "nx", "fp", fp.base.nx);
    r.read(f, "ny", "fp", fp.base.ny);
    r.read(f, "tau", "fp", fp.base.tau);
    r.read(f, "levels", "fp", fp.levels);
    r.read(f, "amplitude", "fp", fp.amplitude);
    r.read(f, "width", "fp", fp.width);
    r.read(f, "shift", "fp", fp.shift);
    if (fp.levels < 0) r.fail(f["levels"], "fp.levels", "must be >= 0");
  }
  if (const auto s = root["sweep"]) {
    r.require_map(s, "sweep");
    r.allow_keys(s, "sweep", {"tau", "n", "alpha"});
    cfg.sweep.tau = r.list<double>(s, "tau", "sweep");
    cfg.sweep.n = r.list<int>(s, "n", "sweep");
    cfg.sweep.alpha = r.list<double>(s, "alpha", "sweep");
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "<file>", "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.out) cfg.out_dir = *o.out;
  if (o.seed) {
    cfg.initial.seed = *o.seed;
    cfg.verify.seed = *o.seed;
  }
  if (o.probe_every) {
    if (*o.probe_every < 1) throw ConfigError("<command line>", 0, "--probe-every", "must be >= 1");
    cfg.probe_every = *o.probe_every;
  }
  if (o.gnuplot) cfg.gnuplot = true;
}

double resolved_alpha(const RunConfig& cfg, const CoefficientSpec& spec) {
  return cfg.alpha.value_or(spec.p() + 4.0);
}

StateField make_initial(const RunConfig& cfg) {
  const PeriodicGrid grid(cfg.d, cfg.n);
  const InitialData& in = cfg.initial;
  const double two_pi = 2.0 * std::numbers::pi;
  Field shape(grid.size(), 1.0);
  const int ny = cfg.d == 2 ? cfg.n : 1;

  switch (in.preset) {
    case InitialPreset::Constant:
      break;
    case InitialPreset::CosinePerturbed:
      for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < cfg.n; ++i) {
          shape[grid.index(i, j)] = 1.0 + in.amplitude * std::cos(two_pi * grid.coord(i));
        }
      }
      break;
    case InitialPreset::RandomSmooth:
      // drawn per component below
      break;
  }

  Field u1(grid.size()), u2(grid.size());
  if (in.preset != InitialPreset::RandomSmooth) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      u1[k] = in.value[0] * shape[k];
      u2[k] = in.value[1] * shape[k];
    }
    return {grid, std::move(u1), std::move(u2), cfg.mu};
  }

  Rng rng(in.seed);
  for (int c = 0; c < 2; ++c) {
    Field& u = c == 0 ? u1 : u2;
    std::vector<double> cx(in.modes), sx(in.modes), cy(in.modes), sy(in.modes);
    for (int m = 0; m < in.modes; ++m) {
      cx[m] = rng.uniform(-1.0, 1.0);
      sx[m] = rng.uniform(-1.0, 1.0);
      cy[m] = rng.uniform(-1.0, 1.0);
      sy[m] = rng.uniform(-1.0, 1.0);
    }
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < cfg.n; ++i) {
        double s = 0.0;
        for (int m = 0; m < in.modes; ++m) {
          const double k = m + 1.0;
          const double px = two_pi * k * grid.coord(i);
          s += (cx[m] * std::cos(px) + sx[m] * std::sin(px)) / (k * k);
          if (cfg.d == 2) {
            const double py = two_pi * k * grid.coord(j);
            s += (cy[m] * std::cos(py) + sy[m] * std::sin(py)) / (k * k);
          }
        }
        u[grid.index(i, j)] = in.value[c] * std::exp(in.amplitude * s);
      }
    }
  }
  return {grid, std::move(u1), std::move(u2), cfg.mu};
}

}  // namespace xdiff::cli
