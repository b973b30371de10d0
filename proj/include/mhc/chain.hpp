#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhc/proposal.hpp"
#include "mhc/random.hpp"

namespace mhc {

struct StepOutcome {
  Point next;
  Point proposal;
  double g_value = 0.0;
  bool accepted = false;
  double log_uniform = 0.0;
};

/// Accept iff log u < -max(g, 0). Ties reject.
inline bool accept_decision(double g, double log_u) { return log_u < -std::max(g, 0.0); }

/// One Metropolis-Hastings transition from explicit randomness (z, log u).
inline StepOutcome mh_step(const ProposalSpec& spec, const TargetModel& model, ConstPoint x,
                           ConstPoint z, double log_u) {
  StepOutcome out;
  out.proposal = propose(spec, model, x, z);
  out.g_value = log_g(spec, model, x, out.proposal);
  out.log_uniform = log_u;
  out.accepted = accept_decision(out.g_value, log_u);
  out.next = out.accepted ? out.proposal : Point(x.begin(), x.end());
  return out;
}

/// One transition drawing z then u from `rng`.
inline StepOutcome mh_step(const ProposalSpec& spec, const TargetModel& model, ConstPoint x,
                           RandomStream& rng) {
  Point z(model.d);
  rng.fill_normal(z);
  const double log_u = rng.log_uniform();
  return mh_step(spec, model, x, z, log_u);
}

struct ChainOptions {
  bool store_trajectory = false;
  /// States X_1..X_burn_in are excluded from the running moments.
  std::size_t burn_in = 0;
  /// Hard cap on stored doubles (steps * d) when storing the trajectory.
  std::size_t max_trajectory_values = 50'000'000;
};

struct ChainResult {
  std::size_t n_steps = 0;
  std::size_t accepted = 0;
  double acceptance_rate = 0.0;
  /// Running mean and variance of each coordinate over the post-burn-in states.
  Point mean;
  Point variance;
  std::size_t n_moment_samples = 0;
  /// max over k of ||X_k||_-, including the initial state.
  double max_minus_norm = 0.0;
  Point final_state;
  /// X_0..X_n when requested.
  std::vector<Point> trajectory;
};

inline ChainResult run_chain(const ProposalSpec& spec, const TargetModel& model, Point x0,
                             std::size_t n, RandomStream& rng, const ChainOptions& opts = {}) {
  if (n < 1) throw std::invalid_argument("run_chain: n must be >= 1");
  require_dim(model.d, x0.size(), "run_chain");
  if (!all_finite(x0)) throw std::invalid_argument("run_chain: initial state is not finite");
  if (opts.store_trajectory &&
      (n + 1) > opts.max_trajectory_values / std::max<std::size_t>(model.d, 1)) {
    throw std::length_error("run_chain: trajectory of " + std::to_string(n + 1) + " x " +
                            std::to_string(model.d) +
                            " values exceeds the storage limit; use streaming mode "
                            "(store_trajectory = false) to get online moments only");
  }

  ChainResult res;
  res.n_steps = n;
  res.mean.assign(model.d, 0.0);
  res.variance.assign(model.d, 0.0);
  Point m2(model.d, 0.0);
  if (opts.store_trajectory) {
    res.trajectory.reserve(n + 1);
    res.trajectory.push_back(x0);
  }
  res.max_minus_norm = model.norm.minus(x0);

  Point x = std::move(x0);
  Point z(model.d);
  for (std::size_t k = 1; k <= n; ++k) {
    rng.fill_normal(z);
    const double log_u = rng.log_uniform();
    Point y = propose(spec, model, x, z);
    const double g = log_g(spec, model, x, y);
    if (accept_decision(g, log_u)) {
      x = std::move(y);
      ++res.accepted;
    }
    res.max_minus_norm = std::max(res.max_minus_norm, model.norm.minus(x));
    if (k > opts.burn_in) {
      const double cnt = static_cast<double>(++res.n_moment_samples);
      for (std::size_t i = 0; i < model.d; ++i) {
        const double delta = x[i] - res.mean[i];
        res.mean[i] += delta / cnt;
        m2[i] += delta * (x[i] - res.mean[i]);
      }
    }
    if (opts.store_trajectory) res.trajectory.push_back(x);
  }
  if (res.n_moment_samples > 1) {
    for (std::size_t i = 0; i < model.d; ++i) {
      res.variance[i] = m2[i] / static_cast<double>(res.n_moment_samples - 1);
    }
  }
  res.acceptance_rate = static_cast<double>(res.accepted) / static_cast<double>(n);
  res.final_state = std::move(x);
  return res;
}

}  // namespace mhc
