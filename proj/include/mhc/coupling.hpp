#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mhc/chain.hpp"
#include "mhc/estimate.hpp"

namespace mhc {

/// A pair of chains driven by the same Gaussian innovation and the same
/// acceptance uniform.
struct CoupledState {
  Point x;
  Point x_tilde;
};

enum class CoupledEvent { both_accept, both_reject, first_only, second_only };

struct EventCounts {
  std::size_t both_accept = 0;
  std::size_t both_reject = 0;
  std::size_t first_only = 0;
  std::size_t second_only = 0;

  std::size_t discordant() const { return first_only + second_only; }
  std::size_t total() const { return both_accept + both_reject + discordant(); }

  void add(CoupledEvent e) {
    switch (e) {
      case CoupledEvent::both_accept: ++both_accept; break;
      case CoupledEvent::both_reject: ++both_reject; break;
      case CoupledEvent::first_only: ++first_only; break;
      case CoupledEvent::second_only: ++second_only; break;
    }
  }

  EventCounts& operator+=(const EventCounts& o) {
    both_accept += o.both_accept;
    both_reject += o.both_reject;
    first_only += o.first_only;
    second_only += o.second_only;
    return *this;
  }
};

inline CoupledEvent classify(bool first, bool second) {
  if (first && second) return CoupledEvent::both_accept;
  if (!first && !second) return CoupledEvent::both_reject;
  return first ? CoupledEvent::first_only : CoupledEvent::second_only;
}

struct CoupledStepResult {
  CoupledState state;
  CoupledEvent event = CoupledEvent::both_accept;
  Point proposal;
  Point proposal_tilde;
  double g = 0.0;
  double g_tilde = 0.0;
};

/// One coupled transition from explicit shared randomness.
inline CoupledStepResult coupled_step(const ProposalSpec& spec, const TargetModel& model,
                                      const CoupledState& s, ConstPoint z, double log_u) {
  require_dim(s.x.size(), s.x_tilde.size(), "coupled_step");
  CoupledStepResult r;
  r.proposal = propose(spec, model, s.x, z);
  r.proposal_tilde = propose(spec, model, s.x_tilde, z);
  r.g = log_g(spec, model, s.x, r.proposal);
  r.g_tilde = log_g(spec, model, s.x_tilde, r.proposal_tilde);
  const bool a = accept_decision(r.g, log_u);
  const bool b = accept_decision(r.g_tilde, log_u);
  r.event = classify(a, b);
  r.state.x = a ? r.proposal : s.x;
  r.state.x_tilde = b ? r.proposal_tilde : s.x_tilde;
  return r;
}

inline CoupledStepResult coupled_step(const ProposalSpec& spec, const TargetModel& model,
                                      const CoupledState& s, RandomStream& rng) {
  Point z(model.d);
  rng.fill_normal(z);
  const double log_u = rng.log_uniform();
  return coupled_step(spec, model, s, z, log_u);
}

/// ||Y(x) - Y(x~)||_- under shared noise. It does not depend on the draw.
inline double proposal_coupling_distance(const ProposalSpec& spec, const TargetModel& model,
                                         ConstPoint x, ConstPoint x_tilde) {
  require_dim(model.d, x.size(), "proposal_coupling_distance");
  require_dim(model.d, x_tilde.size(), "proposal_coupling_distance");
  const double h = spec.h();
  if (spec.kind() == ProposalKind::ou) {
    return (1.0 - 0.5 * h) * model.norm.minus_distance(x, x_tilde);
  }
  const Point gu = grad_U(model, x);
  const Point gu_tilde = grad_U(model, x_tilde);
  Point diff(model.d);
  for (std::size_t i = 0; i < model.d; ++i) {
    diff[i] = (x[i] - x_tilde[i]) - 0.5 * h * (gu[i] - gu_tilde[i]);
  }
  return model.norm.minus(diff);
}

struct ContractionReport {
  /// ||X_k - X~_k||_- for k = 0..n.
  std::vector<double> distances;
  /// Mean of d_{k+1}/d_k over steps with d_k > 0.
  EstimateWithError one_step_ratio;
  EventCounts events;
  std::optional<std::size_t> coalescence_step;
  /// First pre-step index k < n at which either chain is outside the open ball B_R^-.
  std::optional<std::size_t> exit_step;
  CoupledState final_state;

  bool exited() const { return exit_step.has_value(); }
};

inline ContractionReport run_coupled_chain(const ProposalSpec& spec, const TargetModel& model,
                                           CoupledState s0, std::size_t n, RandomStream& rng,
                                           std::optional<double> exit_radius = std::nullopt) {
  if (n < 1) throw std::invalid_argument("run_coupled_chain: n must be >= 1");
  require_dim(model.d, s0.x.size(), "run_coupled_chain");
  require_dim(model.d, s0.x_tilde.size(), "run_coupled_chain");

  ContractionReport rep;
  rep.distances.reserve(n + 1);
  CoupledState s = std::move(s0);
  double dist = model.norm.minus_distance(s.x, s.x_tilde);
  rep.distances.push_back(dist);
  if (s.x == s.x_tilde) rep.coalescence_step = 0;

  RunningMoments ratios;
  Point z(model.d);
  for (std::size_t k = 0; k < n; ++k) {
    if (exit_radius && !rep.exit_step &&
        (model.norm.minus(s.x) >= *exit_radius || model.norm.minus(s.x_tilde) >= *exit_radius)) {
      rep.exit_step = k;
    }
    rng.fill_normal(z);
    const double log_u = rng.log_uniform();
    CoupledStepResult r = coupled_step(spec, model, s, z, log_u);
    rep.events.add(r.event);
    s = std::move(r.state);
    const double next = model.norm.minus_distance(s.x, s.x_tilde);
    if (dist > 0.0) ratios.add(next / dist);
    dist = next;
    rep.distances.push_back(dist);
    if (!rep.coalescence_step && s.x == s.x_tilde) rep.coalescence_step = k + 1;
  }
  rep.one_step_ratio = ratios.estimate();
  rep.final_state = std::move(s);
  return rep;
}

}  // namespace mhc
