#pragma once

// Experiment configuration: a YAML document with the sections
// experiment / model / proposal / run / bounds / plan / output.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhc/mhc.hpp"

namespace mhc::cli {

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"sample", "couple", "scaling", "bounds", "plan", "exit", "tps-demo"};
  return names;
}

/// Invalid configuration. The message carries "file:line: ".
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string kind;  // gaussian | quadratic | tps
  std::size_t d = 1;
  std::vector<double> b;  // quadratic diagonal
  int m = 5;
  std::size_t ell = 1;
  std::vector<double> start;
  std::vector<double> end;
  std::string potential = "double_well";
  double potential_scale = 1.0;
  double alpha = 0.6;
  double q = 8.0;
};

struct ProposalConfig {
  ProposalKind kind = ProposalKind::semi_implicit;
  std::optional<double> h;
  std::vector<double> h_grid;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::size_t n_steps = 1000;
  std::size_t n_samples = 10000;
  std::size_t n_replicas = 1000;
  std::size_t burn_in = 0;
  double R = 1.0;
  std::vector<double> x0;
  std::vector<double> x_tilde;
  bool store_trajectory = false;
};

struct BoundsConfig {
  std::optional<double> K, M, N;
  std::array<std::optional<double>, 4> C{};
  std::map<int, double> moments;
  UnspecifiedConstants unspecified;
  double x_norm = 0.0;
  double grad_u_norm = 0.0;
  std::optional<double> sup_grad_u_norm;
  std::size_t n = 0;
  std::size_t moment_samples = 1000000;
};

struct PlanConfig {
  std::vector<double> epsilon{0.1};
  double K = 0.5;
  double D_bar = 1.0;
  double C = 1.0;
  double q = 1.0;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv"};
};

struct ExperimentConfig {
  std::string experiment;
  std::string source;
  ModelConfig model;
  ProposalConfig proposal;
  RunConfig run;
  BoundsConfig bounds;
  PlanConfig plan;
  OutputConfig output;
};

namespace config_detail {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& msg) const {
    const auto mark = at.Mark();
    const int line = mark.line >= 0 ? mark.line + 1 : 1;
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  [[noreturn]] void fail_line(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }

  /// Rejects keys outside `allowed`.
  void check_keys(const YAML::Node& node, const std::string& section, const std::set<std::string>& allowed) const {
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in section '" + section + "'");
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, "'" + what + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "'" + what + "' has an invalid value '" + node.Scalar() + "'");
    }
  }

  double number(const YAML::Node& node, const std::string& what) const {
    const double v = scalar<double>(node, what);
    if (!std::isfinite(v)) fail(node, "'" + what + "' must be finite");
    return v;
  }

  double positive(const YAML::Node& node, const std::string& what) const {
    const double v = number(node, what);
    if (!(v > 0.0)) fail(node, "'" + what + "' must be > 0");
    return v;
  }

  double nonnegative(const YAML::Node& node, const std::string& what) const {
    const double v = number(node, what);
    if (!(v >= 0.0)) fail(node, "'" + what + "' must be >= 0");
    return v;
  }

  std::size_t count(const YAML::Node& node, const std::string& what) const {
    const long long v = scalar<long long>(node, what);
    if (v < 0) fail(node, "'" + what + "' must be >= 0");
    return static_cast<std::size_t>(v);
  }

  /// A scalar is accepted as a one-element list.
  std::vector<double> numbers(const YAML::Node& node, const std::string& what) const {
    std::vector<double> out;
    if (node.IsScalar()) {
      out.push_back(number(node, what));
      return out;
    }
    if (!node.IsSequence()) fail(node, "'" + what + "' must be a number or a list of numbers");
    for (const auto& v : node) out.push_back(number(v, what));
    return out;
  }

  YAML::Node section(const YAML::Node& root, const std::string& name, bool required) const {
    const YAML::Node n = root[name];
    if (!n) {
      if (required) fail(root, "missing section '" + name + "'");
      return n;
    }
    if (n.IsNull()) fail_line(line_of_key(root, name), "section '" + name + "' is empty");
    if (!n.IsMap()) fail(n, "section '" + name + "' must be a mapping");
    return n;
  }

  int line_of_key(const YAML::Node& map, const std::string& key) const {
    for (const auto& kv : map)
      if (kv.first.as<std::string>() == key) return kv.first.Mark().line + 1;
    return map.Mark().line + 1;
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

inline void parse_model(const Reader& r, const YAML::Node& root, ModelConfig& m) {
  const YAML::Node n = root["model"];
  if (!n) r.fail(root, "missing section 'model'");
  if (n.IsNull() || (n.IsMap() && n.size() == 0)) {
    r.fail_line(r.line_of_key(root, "model"), "section 'model' is empty; missing key 'kind'");
  }
  if (!n.IsMap()) r.fail(n, "section 'model' must be a mapping");
  r.check_keys(n, "model", {"kind", "d", "b", "m", "ell", "start", "end", "potential", "potential_scale", "alpha", "q"});
  if (!n["kind"]) r.fail(n, "model: missing key 'kind'");
  m.kind = r.scalar<std::string>(n["kind"], "model.kind");
  if (m.kind == "gaussian") {
    if (!n["d"]) r.fail(n, "model: missing key 'd'");
    m.d = r.count(n["d"], "model.d");
    if (m.d < 1) r.fail(n["d"], "'model.d' must be >= 1");
  } else if (m.kind == "quadratic") {
    if (!n["b"]) r.fail(n, "model: missing key 'b'");
    m.b = r.numbers(n["b"], "model.b");
    m.d = n["d"] ? r.count(n["d"], "model.d") : m.b.size();
    if (m.d < 1) r.fail(n["d"], "'model.d' must be >= 1");
    if (m.b.size() == 1 && m.d > 1) m.b.assign(m.d, m.b[0]);
    if (m.b.size() != m.d) r.fail(n["b"], "'model.b' must have d entries");
  } else if (m.kind == "tps") {
    if (n["m"]) {
      const long long v = r.scalar<long long>(n["m"], "model.m");
      if (v < 1 || v > 20) r.fail(n["m"], "'model.m' must lie in [1, 20]");
      m.m = static_cast<int>(v);
    }
    if (n["ell"]) m.ell = r.count(n["ell"], "model.ell");
    if (m.ell < 1) r.fail(n["ell"], "'model.ell' must be >= 1");
    m.start = n["start"] ? r.numbers(n["start"], "model.start") : std::vector<double>(m.ell, 0.0);
    m.end = n["end"] ? r.numbers(n["end"], "model.end") : std::vector<double>(m.ell, 0.0);
    if (m.start.size() == 1 && m.ell > 1) m.start.assign(m.ell, m.start[0]);
    if (m.end.size() == 1 && m.ell > 1) m.end.assign(m.ell, m.end[0]);
    if (m.start.size() != m.ell) r.fail(n["start"], "'model.start' must have ell entries");
    if (m.end.size() != m.ell) r.fail(n["end"], "'model.end' must have ell entries");
    if (n["potential"]) m.potential = r.scalar<std::string>(n["potential"], "model.potential");
    static const std::set<std::string> pots{"double_well", "zero", "linear", "quadratic"};
    if (!pots.count(m.potential)) {
      r.fail(n["potential"], "'model.potential' must be one of double_well | zero | linear | quadratic");
    }
    if (n["potential_scale"]) m.potential_scale = r.number(n["potential_scale"], "model.potential_scale");
    if (n["alpha"]) m.alpha = r.nonnegative(n["alpha"], "model.alpha");
    if (n["q"]) m.q = r.positive(n["q"], "model.q");
    m.d = ((std::size_t{1} << m.m) - 1) * m.ell;
  } else {
    r.fail(n["kind"], "'model.kind' must be one of gaussian | quadratic | tps");
  }
}

inline void parse_proposal(const Reader& r, const YAML::Node& root, ProposalConfig& p, bool need_h, bool need_grid,
                           bool need_kind) {
  const YAML::Node n = r.section(root, "proposal", need_h || need_grid);
  if (!n) return;
  r.check_keys(n, "proposal", {"kind", "h", "h_grid"});
  if (n["kind"]) {
    try {
      p.kind = parse_proposal_kind(r.scalar<std::string>(n["kind"], "proposal.kind"));
    } catch (const std::invalid_argument& e) {
      r.fail(n["kind"], e.what());
    }
  } else if (need_kind) {
    r.fail(n, "proposal: missing key 'kind'");
  }
  if (n["h"]) {
    p.h = r.number(n["h"], "proposal.h");
    if (!(*p.h > 0.0 && *p.h < 2.0)) r.fail(n["h"], "'proposal.h' must lie in (0, 2)");
  } else if (need_h) {
    r.fail(n, "proposal: missing key 'h'");
  }
  if (n["h_grid"]) {
    p.h_grid = r.numbers(n["h_grid"], "proposal.h_grid");
    try {
      validate_h_grid(p.h_grid);
    } catch (const std::invalid_argument& e) {
      r.fail(n["h_grid"], std::string("'proposal.h_grid': ") + e.what());
    }
  } else if (need_grid) {
    r.fail(n, "proposal: missing key 'h_grid'");
  }
}

inline void parse_run(const Reader& r, const YAML::Node& root, RunConfig& run, bool seed_from_flag) {
  const YAML::Node n = r.section(root, "run", !seed_from_flag);
  if (!n) return;
  r.check_keys(n, "run", {"seed", "n_steps", "n_samples", "n_replicas", "burn_in", "R", "x0", "x_tilde",
                          "store_trajectory"});
  if (n["seed"]) {
    run.seed = r.scalar<std::uint64_t>(n["seed"], "run.seed");
  } else if (!seed_from_flag) {
    r.fail(n, "run: missing key 'seed' (no wall-clock default)");
  }
  if (n["n_steps"]) run.n_steps = r.count(n["n_steps"], "run.n_steps");
  if (n["n_samples"]) run.n_samples = r.count(n["n_samples"], "run.n_samples");
  if (n["n_replicas"]) run.n_replicas = r.count(n["n_replicas"], "run.n_replicas");
  if (n["burn_in"]) run.burn_in = r.count(n["burn_in"], "run.burn_in");
  if (n["R"]) run.R = r.positive(n["R"], "run.R");
  if (n["x0"]) run.x0 = r.numbers(n["x0"], "run.x0");
  if (n["x_tilde"]) run.x_tilde = r.numbers(n["x_tilde"], "run.x_tilde");
  if (n["store_trajectory"]) run.store_trajectory = r.scalar<bool>(n["store_trajectory"], "run.store_trajectory");
  for (const char* key : {"n_steps", "n_samples", "n_replicas"}) {
    if (n[key] && r.count(n[key], key) < 1) r.fail(n[key], std::string("'run.") + key + "' must be >= 1");
  }
}

inline void parse_bounds(const Reader& r, const YAML::Node& root, BoundsConfig& b) {
  const YAML::Node n = r.section(root, "bounds", false);
  if (!n) return;
  r.check_keys(n, "bounds", {"K", "M", "N", "C", "moments", "A", "C_main", "D_main", "q_main", "rho", "C2_lyap",
                             "D_exit", "D_bar", "x_norm", "grad_u_norm", "sup_grad_u_norm", "n", "moment_samples"});
  if (n["K"]) {
    b.K = r.number(n["K"], "bounds.K");
    if (!(*b.K > 0.0 && *b.K <= 1.0)) r.fail(n["K"], "'bounds.K' must lie in (0, 1]");
  }
  if (n["M"]) b.M = r.nonnegative(n["M"], "bounds.M");
  if (n["N"]) b.N = r.nonnegative(n["N"], "bounds.N");
  if (n["C"]) {
    const auto c = r.numbers(n["C"], "bounds.C");
    if (c.size() != 4) r.fail(n["C"], "'bounds.C' must list C1..C4");
    for (std::size_t i = 0; i < 4; ++i) {
      if (!(c[i] >= 0.0)) r.fail(n["C"], "'bounds.C' entries must be >= 0");
      b.C[i] = c[i];
    }
  }
  if (n["moments"]) {
    const auto mm = r.numbers(n["moments"], "bounds.moments");
    for (std::size_t i = 0; i < mm.size(); ++i) b.moments[static_cast<int>(i) + 1] = mm[i];
  }
  auto& u = b.unspecified;
  const std::pair<const char*, double*> consts[] = {{"A", &u.A},           {"C_main", &u.C_main}, {"D_main", &u.D_main},
                                                    {"q_main", &u.q_main}, {"rho", &u.rho},       {"C2_lyap", &u.C2_lyap},
                                                    {"D_exit", &u.D_exit}, {"D_bar", &u.D_bar}};
  for (const auto& [key, dst] : consts)
    if (n[key]) *dst = r.nonnegative(n[key], std::string("bounds.") + key);
  if (n["x_norm"]) b.x_norm = r.nonnegative(n["x_norm"], "bounds.x_norm");
  if (n["grad_u_norm"]) b.grad_u_norm = r.nonnegative(n["grad_u_norm"], "bounds.grad_u_norm");
  if (n["sup_grad_u_norm"]) b.sup_grad_u_norm = r.nonnegative(n["sup_grad_u_norm"], "bounds.sup_grad_u_norm");
  if (n["n"]) b.n = r.count(n["n"], "bounds.n");
  if (n["moment_samples"]) b.moment_samples = r.count(n["moment_samples"], "bounds.moment_samples");
}

inline void parse_plan(const Reader& r, const YAML::Node& root, PlanConfig& p, bool required) {
  const YAML::Node n = r.section(root, "plan", required);
  if (!n) return;
  r.check_keys(n, "plan", {"epsilon", "K", "D_bar", "C", "q"});
  if (n["epsilon"]) {
    p.epsilon = r.numbers(n["epsilon"], "plan.epsilon");
    for (double e : p.epsilon)
      if (!(e > 0.0)) r.fail(n["epsilon"], "'plan.epsilon' values must be > 0");
  }
  if (n["K"]) {
    p.K = r.number(n["K"], "plan.K");
    if (!(p.K > 0.0 && p.K <= 1.0)) r.fail(n["K"], "'plan.K' must lie in (0, 1]");
  }
  if (n["D_bar"]) p.D_bar = r.nonnegative(n["D_bar"], "plan.D_bar");
  if (n["C"]) p.C = r.positive(n["C"], "plan.C");
  if (n["q"]) p.q = r.nonnegative(n["q"], "plan.q");
}

inline void parse_output(const Reader& r, const YAML::Node& root, OutputConfig& o) {
  const YAML::Node n = r.section(root, "output", false);
  if (!n) return;
  r.check_keys(n, "output", {"directory", "formats"});
  if (n["directory"]) o.directory = r.scalar<std::string>(n["directory"], "output.directory");
  if (n["formats"]) {
    o.formats.clear();
    const YAML::Node f = n["formats"];
    auto add = [&](const YAML::Node& v) {
      const auto s = r.scalar<std::string>(v, "output.formats");
      if (s != "csv" && s != "json") r.fail(v, "'output.formats' entries must be csv or json");
      o.formats.push_back(s);
    };
    if (f.IsSequence()) {
      for (const auto& v : f) add(v);
    } else {
      add(f);
    }
    if (o.formats.empty()) r.fail(f, "'output.formats' must not be empty");
  }
}

}  // namespace config_detail

/// Parses a YAML document. `subcommand` fixes the experiment; a conflicting
/// `experiment` key is an error.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source,
                                     const std::string& subcommand, bool seed_from_flag = false) {
  config_detail::Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    r.fail_line(e.mark.line + 1, "YAML syntax error: " + e.msg);
  }
  if (!root || root.IsNull()) r.fail_line(1, "configuration is empty");
  if (!root.IsMap()) r.fail(root, "configuration must be a mapping");
  r.check_keys(root, "top level", {"experiment", "model", "proposal", "run", "bounds", "plan", "output"});

  ExperimentConfig c;
  c.source = source;
  c.experiment = subcommand;
  if (root["experiment"]) {
    const auto e = r.scalar<std::string>(root["experiment"], "experiment");
    if (std::find(experiment_names().begin(), experiment_names().end(), e) == experiment_names().end()) {
      r.fail(root["experiment"], "unknown experiment '" + e + "'");
    }
    if (!subcommand.empty() && e != subcommand) {
      r.fail(root["experiment"], "experiment '" + e + "' does not match subcommand '" + subcommand + "'");
    }
    c.experiment = e;
  }
  if (c.experiment.empty()) r.fail(root, "missing key 'experiment'");

  const std::string& e = c.experiment;
  const bool needs_model = e != "plan" && e != "tps-demo";
  if (needs_model) config_detail::parse_model(r, root, c.model);
  else if (root["model"]) config_detail::parse_model(r, root, c.model);

  const bool need_h = e == "sample" || e == "couple" || e == "exit" || e == "bounds" || e == "tps-demo";
  const bool need_grid = e == "scaling" || e == "tps-demo";
  config_detail::parse_proposal(r, root, c.proposal, need_h, need_grid, (need_h || need_grid) && e != "tps-demo");
  config_detail::parse_run(r, root, c.run, seed_from_flag);
  config_detail::parse_bounds(r, root, c.bounds);
  config_detail::parse_plan(r, root, c.plan, e == "plan");
  config_detail::parse_output(r, root, c.output);

  const std::size_t d = c.model.d;
  if (needs_model) {
    if (!c.run.x0.empty() && c.run.x0.size() != d) {
      r.fail(root["run"]["x0"], "'run.x0' must have " + std::to_string(d) + " entries");
    }
    if (!c.run.x_tilde.empty() && c.run.x_tilde.size() != d) {
      r.fail(root["run"]["x_tilde"], "'run.x_tilde' must have " + std::to_string(d) + " entries");
    }
    if (e == "couple" && c.run.x_tilde.empty()) r.fail(root["run"] ? root["run"] : root, "run: missing key 'x_tilde'");
    if (e == "exit" && c.run.x0.size() == d) {
      // Checked against the model norm when the model is built.
    }
  }
  return c;
}

}  // namespace mhc::cli
