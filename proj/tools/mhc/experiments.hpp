#pragma once

// Experiment runners behind the CLI subcommands.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mhc/config.hpp"
#include "mhc/mhc.hpp"
#include "mhc/report.hpp"

namespace mhc::cli {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline nlohmann::json jnum(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

inline nlohmann::json jopt(const std::optional<double>& v) { return v ? jnum(*v) : nlohmann::json(nullptr); }

inline Cell icell(std::size_t v) { return static_cast<std::int64_t>(v); }

/// Fully resolved configuration, defaults included.
inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["experiment"] = c.experiment;
  j["source"] = c.source;
  const auto& m = c.model;
  if (!m.kind.empty()) {
    nlohmann::json mj{{"kind", m.kind}, {"d", m.d}};
    if (m.kind == "quadratic") mj["b"] = m.b;
    if (m.kind == "tps") {
      mj["m"] = m.m;
      mj["ell"] = m.ell;
      mj["start"] = m.start;
      mj["end"] = m.end;
      mj["potential"] = m.potential;
      mj["potential_scale"] = m.potential_scale;
      mj["alpha"] = m.alpha;
      mj["q"] = m.q;
    }
    j["model"] = mj;
  }
  j["proposal"] = {{"kind", std::string(to_string(c.proposal.kind))},
                   {"h", jopt(c.proposal.h)},
                   {"h_grid", c.proposal.h_grid}};
  j["run"] = {{"seed", c.run.seed},           {"n_steps", c.run.n_steps}, {"n_samples", c.run.n_samples},
              {"n_replicas", c.run.n_replicas}, {"burn_in", c.run.burn_in}, {"R", c.run.R},
              {"x0", c.run.x0},               {"x_tilde", c.run.x_tilde}, {"store_trajectory", c.run.store_trajectory}};
  const auto& b = c.bounds;
  nlohmann::json cj = nlohmann::json::array();
  for (const auto& v : b.C) cj.push_back(jopt(v));
  nlohmann::json mom = nlohmann::json::object();
  for (const auto& [n, v] : b.moments) mom[std::to_string(n)] = v;
  j["bounds"] = {{"K", jopt(b.K)},
                 {"M", jopt(b.M)},
                 {"N", jopt(b.N)},
                 {"C", cj},
                 {"moments", mom},
                 {"x_norm", b.x_norm},
                 {"grad_u_norm", b.grad_u_norm},
                 {"sup_grad_u_norm", jopt(b.sup_grad_u_norm)},
                 {"n", b.n},
                 {"moment_samples", b.moment_samples}};
  const auto& u = b.unspecified;
  j["unspecified_constants"] = {{"A", u.A},           {"C_main", u.C_main}, {"D_main", u.D_main},
                                {"q_main", u.q_main}, {"rho", u.rho},       {"C2_lyap", u.C2_lyap},
                                {"D_exit", u.D_exit}, {"D_bar", u.D_bar}};
  j["plan"] = {{"epsilon", c.plan.epsilon}, {"K", c.plan.K}, {"D_bar", c.plan.D_bar}, {"C", c.plan.C},
               {"q", c.plan.q}};
  j["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  return j;
}

/// A target model with whatever closed-form constants its family provides.
struct BuiltModel {
  TargetModel model;
  std::optional<QuadraticModel> quadratic;
  std::optional<TPSModel> tps;
};

inline HSpec make_hspec(const ModelConfig& m) {
  if (m.potential == "zero") return HSpec::zero();
  if (m.potential == "linear") return HSpec::linear(m.potential_scale);
  if (m.potential == "quadratic") return HSpec::quadratic(m.potential_scale);
  return HSpec::double_well();
}

inline BuiltModel build_model(const ModelConfig& m) {
  BuiltModel out;
  if (m.kind == "gaussian") {
    out.model = make_gaussian_model(m.d);
  } else if (m.kind == "quadratic") {
    out.quadratic = make_quadratic_model(m.b);
    out.model = out.quadratic->model;
  } else if (m.kind == "tps") {
    out.tps = make_tps_model(TPSGeometry{m.m, m.ell, m.start, m.end}, make_hspec(m), m.alpha, m.q);
    out.model = out.tps->model;
  } else {
    throw std::invalid_argument("unknown model kind '" + m.kind + "'");
  }
  return out;
}

inline Point initial_point(const std::vector<double>& v, std::size_t d) {
  return v.empty() ? Point(d, 0.0) : Point(v.begin(), v.end());
}

/// Model constants, then user overrides from the bounds section.
inline BoundInputs assemble_bound_inputs(const ExperimentConfig& c, const BuiltModel& bm, double h,
                                         RunOutput& out) {
  const BoundsConfig& b = c.bounds;
  const double R = c.run.R;
  BoundInputs in;
  if (bm.quadratic) {
    in = bm.quadratic->bound_inputs(R, h);
  } else if (bm.tps) {
    in.R = R;
    in.h = h;
    if (bm.model.d <= 2 && bm.model.has_hessian()) {
      const HessianNorms hn = estimate_hessian_norms(bm.model, R);
      in.M_R = hn.M;
      in.N_R = hn.N;
      in.hessian_norms_heuristic = true;
    }
    // Monte Carlo moments on a stream of their own so the main stream is untouched.
    RandomStream mr = RandomStream::derive(c.run.seed, 0x6d6f6d656e7473ULL);
    in.moments = norm_moments(bm.model.norm, 4, b.moment_samples, mr);
  } else {
    in.K = 1.0;
    in.M_R = 1.0;
    in.N_R = 0.0;
    in.C = {0.0, 0.0, 0.0, 0.0};
    for (int n = 1; n <= 4; ++n) in.moments[n] = euclidean_norm_moment(bm.model.d, n);
    in.R = R;
    in.h = h;
  }
  if (b.K) in.K = b.K;
  if (b.M) {
    in.M_R = b.M;
    in.hessian_norms_heuristic = false;
  }
  if (b.N) in.N_R = b.N;
  for (std::size_t i = 0; i < 4; ++i)
    if (b.C[i]) in.C[i] = b.C[i];
  for (const auto& [n, v] : b.moments) in.moments[n] = v;
  in.unspecified = b.unspecified;
  if (in.hessian_norms_heuristic) out.warnings.push_back("M(R) and N(R) estimated on a grid (heuristic)");
  return in;
}

/// sup ||grad U||_- over B_R^-: user value, closed form for Euclidean
/// quadratic and Gaussian targets, grid search for d <= 2.
inline std::optional<double> sup_grad_u(const ExperimentConfig& c, const BuiltModel& bm) {
  if (c.bounds.sup_grad_u_norm) return c.bounds.sup_grad_u_norm;
  if (bm.quadratic) return bm.quadratic->constants.M * c.run.R;
  if (c.model.kind == "gaussian") return c.run.R;
  if (bm.model.d <= 2) return estimate_sup_grad_u_norm(bm.model, c.run.R);
  return std::nullopt;
}

inline nlohmann::json inputs_to_json(const BoundInputs& in) {
  nlohmann::json cj = nlohmann::json::array();
  for (const auto& v : in.C) cj.push_back(jopt(v));
  nlohmann::json mom = nlohmann::json::object();
  for (const auto& [n, v] : in.moments) mom[std::to_string(n)] = v;
  return {{"K", jopt(in.K)}, {"M", jopt(in.M_R)}, {"N", jopt(in.N_R)}, {"C", cj}, {"moments", mom},
          {"R", in.R},       {"h", in.h},         {"hessian_norms_heuristic", in.hessian_norms_heuristic}};
}

inline Table inputs_table(const BoundInputs& in) {
  Table t{"bounds_inputs", {"name", "value"}, {}};
  auto opt = [](const std::optional<double>& v) -> Cell { return v ? *v : kNaN; };
  t.add({std::string("K"), opt(in.K)});
  t.add({std::string("M"), opt(in.M_R)});
  t.add({std::string("N"), opt(in.N_R)});
  for (int n = 1; n <= 4; ++n) t.add({"C" + std::to_string(n), opt(in.C[static_cast<std::size_t>(n - 1)])});
  for (const auto& [n, v] : in.moments) t.add({"m" + std::to_string(n), v});
  t.add({std::string("R"), in.R});
  t.add({std::string("h"), in.h});
  const auto& u = in.unspecified;
  const std::pair<const char*, double> consts[] = {{"A", u.A},           {"C_main", u.C_main}, {"D_main", u.D_main},
                                                   {"q_main", u.q_main}, {"rho", u.rho},       {"C2_lyap", u.C2_lyap},
                                                   {"D_exit", u.D_exit}, {"D_bar", u.D_bar}};
  for (const auto& [k, v] : consts) t.add({std::string(k), v});
  return t;
}

// ---------------------------------------------------------------------------

inline void run_sample(const ExperimentConfig& c, RandomStream& rng, RunOutput& out) {
  const BuiltModel bm = build_model(c.model);
  const ProposalSpec spec(c.proposal.kind, *c.proposal.h);
  ChainOptions opts;
  opts.burn_in = c.run.burn_in;
  opts.store_trajectory = c.run.store_trajectory;
  const ChainResult res = run_chain(spec, bm.model, initial_point(c.run.x0, bm.model.d), c.run.n_steps, rng, opts);

  Table mom{"sample_moments", {"coordinate", "mean", "variance"}, {}};
  for (std::size_t i = 0; i < bm.model.d; ++i) mom.add({icell(i), res.mean[i], res.variance[i]});
  out.tables.push_back(std::move(mom));
  if (c.run.store_trajectory) {
    Table tr{"sample_trajectory", {"step"}, {}};
    for (std::size_t i = 0; i < bm.model.d; ++i) tr.columns.push_back("x_" + std::to_string(i));
    for (std::size_t k = 0; k < res.trajectory.size(); ++k) {
      std::vector<Cell> row{icell(k)};
      for (double v : res.trajectory[k]) row.emplace_back(v);
      tr.add(std::move(row));
    }
    out.tables.push_back(std::move(tr));
  }
  out.results["acceptance_rate"] = res.acceptance_rate;
  out.results["accepted"] = res.accepted;
  out.results["n_steps"] = res.n_steps;
  out.results["n_moment_samples"] = res.n_moment_samples;
  out.results["max_minus_norm"] = res.max_minus_norm;
}

inline void run_couple(const ExperimentConfig& c, RandomStream& rng, RunOutput& out) {
  const BuiltModel bm = build_model(c.model);
  const ProposalSpec spec(c.proposal.kind, *c.proposal.h);
  CoupledState s0{initial_point(c.run.x0, bm.model.d), initial_point(c.run.x_tilde, bm.model.d)};
  const ContractionReport rep = run_coupled_chain(spec, bm.model, std::move(s0), c.run.n_steps, rng, c.run.R);

  Table dist{"couple_distances", {"step", "distance"}, {}};
  for (std::size_t k = 0; k < rep.distances.size(); ++k) dist.add({icell(k), rep.distances[k]});
  out.tables.push_back(std::move(dist));
  Table ev{"couple_events", {"event", "count"}, {}};
  ev.add({std::string("both_accept"), icell(rep.events.both_accept)});
  ev.add({std::string("both_reject"), icell(rep.events.both_reject)});
  ev.add({std::string("first_only"), icell(rep.events.first_only)});
  ev.add({std::string("second_only"), icell(rep.events.second_only)});
  out.tables.push_back(std::move(ev));

  out.results["events"] = {{"both_accept", rep.events.both_accept},
                           {"both_reject", rep.events.both_reject},
                           {"first_only", rep.events.first_only},
                           {"second_only", rep.events.second_only}};
  out.results["one_step_ratio"] = {{"mean", jnum(rep.one_step_ratio.value)},
                                   {"std_error", jnum(rep.one_step_ratio.std_error)},
                                   {"n", rep.one_step_ratio.n_samples}};
  out.results["coalescence_step"] =
      rep.coalescence_step ? nlohmann::json(*rep.coalescence_step) : nlohmann::json(nullptr);
  out.results["exit_step"] = rep.exit_step ? nlohmann::json(*rep.exit_step) : nlohmann::json(nullptr);
}

/// Bound on the rejection probability matching the proposal family, NaN when
/// an input is missing or no bound applies.
inline double matching_rejection_bound(ProposalKind kind, const BoundInputs& in, PointNorms at) {
  if (kind == ProposalKind::explicit_euler) return kNaN;
  try {
    return rejection_bound(in, kind == ProposalKind::ou ? BoundKind::ou_p2zero : BoundKind::semi_implicit_explicit,
                           at);
  } catch (const std::invalid_argument&) {
    return kNaN;
  }
}

inline void run_scaling(const ExperimentConfig& c, RandomStream& rng, RunOutput& out) {
  const BuiltModel bm = build_model(c.model);
  if (bm.tps && bm.tps->warning) out.warnings.push_back(*bm.tps->warning);
  const Point x = initial_point(c.run.x0, bm.model.d);
  const auto& grid = c.proposal.h_grid;
  const PointNorms at{bm.model.norm.minus(x), bm.model.norm.minus(grad_U(bm.model, x))};
  BoundInputs in = assemble_bound_inputs(c, bm, grid.front(), out);

  // Same stream layout as fit_scaling_exponent.
  const std::uint64_t seed = rng.engine()();
  std::vector<EstimateWithError> est(grid.size());
  Table t{"scaling", {"h", "estimate", "std_error", "bound"}, {}};
  bool bound_missing = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    RandomStream r = RandomStream::derive(seed, i);
    est[i] = estimate_rejection_probability(ProposalSpec(c.proposal.kind, grid[i]), bm.model, x, c.run.n_samples, r);
    in.h = grid[i];
    const double bound = matching_rejection_bound(c.proposal.kind, in, at);
    bound_missing = bound_missing || std::isnan(bound);
    t.add({grid[i], est[i].value, est[i].std_error, bound});
  }
  out.tables.push_back(std::move(t));
  if (bound_missing) out.warnings.push_back("bound column is nan where constants are missing or no bound applies");

  out.results["x_norm"] = at.x_norm;
  out.results["grad_u_norm"] = at.grad_u_norm;
  try {
    const ScalingFit fit = fit_power_law(grid, est);
    out.results["slope"] = fit.slope;
    out.results["intercept"] = fit.intercept;
    out.results["r_squared"] = jnum(fit.r_squared);
    out.results["used"] = fit.used;
  } catch (const std::runtime_error& e) {
    out.results["slope"] = nullptr;
    out.warnings.push_back(std::string("no slope: ") + e.what());
  }
}

inline void run_bounds(const ExperimentConfig& c, RandomStream&, RunOutput& out) {
  const BuiltModel bm = build_model(c.model);
  const BoundInputs in = assemble_bound_inputs(c, bm, *c.proposal.h, out);
  const auto sup = sup_grad_u(c, bm);
  const BoundReport rep =
      evaluate_bounds(in, PointNorms{c.bounds.x_norm, c.bounds.grad_u_norm}, sup, c.bounds.n);

  Table t{"bounds", {"name", "value", "formula"}, {}};
  for (const auto& e : rep.entries) t.add({e.name, e.value, e.formula});
  out.tables.push_back(std::move(t));
  out.tables.push_back(inputs_table(in));
  out.results["inputs"] = inputs_to_json(in);
  out.results["sup_grad_u_norm"] = jopt(sup);
  out.results["skipped"] = rep.skipped;
  nlohmann::json vals = nlohmann::json::object();
  for (const auto& e : rep.entries) vals[e.name] = jnum(e.value);
  out.results["values"] = vals;
}

inline void run_plan(const ExperimentConfig& c, RandomStream&, RunOutput& out) {
  const PlanConfig& p = c.plan;
  Table t{"plan", {"epsilon", "K", "D_bar", "C", "q", "feasible", "R", "h", "n", "bound", "violated"}, {}};
  for (double eps : p.epsilon) {
    const StepPlan s = step_planner(eps, p.K, p.D_bar, p.C, p.q);
    t.add({eps, p.K, p.D_bar, p.C, p.q, std::int64_t{s.feasible ? 1 : 0}, s.R, s.h, icell(s.n), s.bound,
           s.violated});
  }
  out.tables.push_back(std::move(t));
}

inline void run_exit(const ExperimentConfig& c, RandomStream& rng, RunOutput& out) {
  const BuiltModel bm = build_model(c.model);
  const ProposalSpec spec(c.proposal.kind, *c.proposal.h);
  const Point x0 = initial_point(c.run.x0, bm.model.d);
  const double x_norm = bm.model.norm.minus(x0);
  const EstimateWithError e =
      estimate_exit_probability(spec, bm.model, x0, c.run.R, c.run.n_steps, c.run.n_replicas, rng);
  BoundInputs in = assemble_bound_inputs(c, bm, spec.h(), out);
  ProbabilityBound pb{kNaN, kNaN};
  try {
    pb = lyapunov_exit_bound(in, x_norm, c.run.n_steps);
  } catch (const std::invalid_argument& err) {
    out.warnings.push_back(std::string("no exit bound: ") + err.what());
  }
  Table t{"exit", {"R", "n_steps", "n_replicas", "x_norm", "estimate", "std_error", "bound_raw", "bound_clipped"}, {}};
  t.add({c.run.R, icell(c.run.n_steps), icell(c.run.n_replicas), x_norm, e.value, e.std_error, pb.raw, pb.clipped});
  out.tables.push_back(std::move(t));
  out.results["estimate"] = e.value;
  out.results["std_error"] = e.std_error;
}

/// Double-well path model at m = 3..8: rejection scaling in h for OU and
/// semi-implicit proposals, and stationary rejection at a fixed h.
inline void run_tps_demo(const ExperimentConfig& c, RandomStream& rng, RunOutput& out) {
  const double alpha = c.model.kind == "tps" ? c.model.alpha : 0.6;
  const auto& grid = c.proposal.h_grid;
  const double h_fixed = *c.proposal.h;
  const std::uint64_t seed = rng.engine()();

  Table sc{"tps_demo_scaling", {"m", "d", "kind", "h", "estimate", "std_error"}, {}};
  Table fits{"tps_demo_fits", {"m", "d", "kind", "slope", "r_squared"}, {}};
  Table dim{"tps_demo_dimension", {"m", "d", "h", "rejection", "std_error"}, {}};
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int m = 3; m <= 8; ++m) {
    const TPSModel t = make_double_well_tps(m, alpha);
    const TargetModel& model = t.model;
    const auto d = static_cast<std::int64_t>(model.d);
    RandomStream r = RandomStream::derive(seed, static_cast<std::uint64_t>(m));
    // Representative state: end of an OU chain from the zero path.
    const Point x = run_chain(ProposalSpec(ProposalKind::ou, 0.1), model, Point(model.d, 0.0),
                              std::max<std::size_t>(c.run.burn_in, 1), r)
                        .final_state;
    for (ProposalKind kind : {ProposalKind::ou, ProposalKind::semi_implicit}) {
      const ScalingFit f = fit_scaling_exponent(kind, model, x, grid, c.run.n_samples, r);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        sc.add({std::int64_t{m}, d, std::string(to_string(kind)), grid[i], f.estimates[i].value,
                f.estimates[i].std_error});
      }
      fits.add({std::int64_t{m}, d, std::string(to_string(kind)), f.slope, f.r_squared});
    }
    const EstimateWithError st = estimate_stationary_rejection(ProposalSpec(ProposalKind::semi_implicit, h_fixed),
                                                               model, x, c.run.burn_in, c.run.n_steps, r);
    dim.add({std::int64_t{m}, d, h_fixed, st.value, st.std_error});
    lo = std::min(lo, st.value);
    hi = std::max(hi, st.value);
  }
  out.tables.push_back(std::move(sc));
  out.tables.push_back(std::move(fits));
  out.tables.push_back(std::move(dim));
  out.results["stationary_rejection_max_over_min"] = jnum(hi / lo);
}

inline void run_experiment(const ExperimentConfig& c, RandomStream& rng, RunOutput& out) {
  const std::string& e = c.experiment;
  if (e == "sample") return run_sample(c, rng, out);
  if (e == "couple") return run_couple(c, rng, out);
  if (e == "scaling") return run_scaling(c, rng, out);
  if (e == "bounds") return run_bounds(c, rng, out);
  if (e == "plan") return run_plan(c, rng, out);
  if (e == "exit") return run_exit(c, rng, out);
  if (e == "tps-demo") return run_tps_demo(c, rng, out);
  throw std::invalid_argument("unknown experiment '" + e + "'");
}

}  // namespace mhc::cli
