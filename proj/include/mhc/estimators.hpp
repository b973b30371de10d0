#pragma once

// Monte Carlo estimators confronting the analytic bounds with simulation.
//
// Sample-based estimators split their work into fixed blocks of kBlockSize
// draws. Block b owns the stream derived from (base seed, b), and block
// results are merged in block order, so output does not depend on the worker
// count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhc/bounds.hpp"
#include "mhc/chain.hpp"
#include "mhc/coupling.hpp"
#include "mhc/estimate.hpp"
#include "mhc/parallel.hpp"

namespace mhc {

inline constexpr std::size_t kBlockSize = 4096;

namespace est_detail {

inline std::uint64_t base_seed(RandomStream& rng) { return rng.engine()(); }

inline std::size_t block_count(std::size_t n) { return (n + kBlockSize - 1) / kBlockSize; }

/// Runs `block(stream, count, out)` over fixed blocks and merges in order.
template <class Acc, class Block>
Acc run_blocks(std::size_t n, std::uint64_t seed, Block&& block) {
  const std::size_t nb = block_count(n);
  std::vector<Acc> parts(nb);
  parallel_for(nb, [&](std::size_t b) {
    RandomStream rng = RandomStream::derive(seed, b);
    const std::size_t count = std::min(kBlockSize, n - b * kBlockSize);
    block(rng, count, parts[b]);
  });
  Acc total{};
  for (auto& p : parts) total.merge(p);
  return total;
}

}  // namespace est_detail

// ---------------------------------------------------------------------------
// Rejection probabilities.

/// Mean of 1 - alpha(x, Y_h(x)) over n_samples proposals.
inline EstimateWithError estimate_rejection_probability(const ProposalSpec& spec, const TargetModel& model,
                                                        ConstPoint x, std::size_t n_samples,
                                                        RandomStream& rng) {
  if (n_samples < 1) throw std::invalid_argument("estimate_rejection_probability: n_samples must be >= 1");
  require_dim(model.d, x.size(), "estimate_rejection_probability");
  const Point x0(x.begin(), x.end());
  auto acc = est_detail::run_blocks<RunningMoments>(
      n_samples, est_detail::base_seed(rng), [&](RandomStream& r, std::size_t count, RunningMoments& out) {
        Point z(model.d);
        for (std::size_t s = 0; s < count; ++s) {
          r.fill_normal(z);
          const Point y = propose(spec, model, x0, z);
          out.add(1.0 - acceptance(log_g(spec, model, x0, y)));
        }
      });
  return acc.estimate();
}

/// Standard error of the mean of a correlated series by non-overlapping batch means.
inline EstimateWithError batch_means(const std::vector<double>& series, std::size_t n_batches = 50) {
  if (series.empty()) throw std::invalid_argument("batch_means: empty series");
  n_batches = std::clamp<std::size_t>(n_batches, 1, series.size());
  const std::size_t len = series.size() / n_batches;
  RunningMoments batches;
  RunningMoments all;
  for (double v : series) all.add(v);
  for (std::size_t b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (std::size_t i = b * len; i < (b + 1) * len; ++i) s += series[i];
    batches.add(s / static_cast<double>(len));
  }
  EstimateWithError e;
  e.value = all.mean();
  e.n_samples = series.size();
  e.std_error = n_batches > 1 ? std::sqrt(batches.variance() / static_cast<double>(n_batches)) : 0.0;
  return e;
}

/// Rejection probability averaged along a chain after burn-in: each step
/// contributes 1 - alpha of its own proposal. Error by batch means.
inline EstimateWithError estimate_stationary_rejection(const ProposalSpec& spec, const TargetModel& model,
                                                       Point x0, std::size_t burn_in, std::size_t n_steps,
                                                       RandomStream& rng, std::size_t n_batches = 50) {
  if (n_steps < 1) throw std::invalid_argument("estimate_stationary_rejection: n_steps must be >= 1");
  require_dim(model.d, x0.size(), "estimate_stationary_rejection");
  Point x = std::move(x0);
  Point z(model.d);
  std::vector<double> series;
  series.reserve(n_steps);
  for (std::size_t k = 0; k < burn_in + n_steps; ++k) {
    rng.fill_normal(z);
    const double log_u = rng.log_uniform();
    Point y = propose(spec, model, x, z);
    const double g = log_g(spec, model, x, y);
    if (k >= burn_in) series.push_back(1.0 - acceptance(g));
    if (accept_decision(g, log_u)) x = std::move(y);
  }
  return batch_means(series, n_batches);
}

// ---------------------------------------------------------------------------
// Scaling exponents.

struct ScalingFit {
  std::vector<double> h;
  std::vector<EstimateWithError> estimates;
  /// Whether each grid point entered the regression.
  std::vector<bool> used;
  double slope = 0.0;
  double intercept = 0.0;
  /// log-estimate minus fitted line at each used point.
  std::vector<double> residuals;
  double r_squared = 0.0;
};

inline constexpr double kScalingMaxRelativeError = 0.2;

/// Least-squares fit of log estimate against log h, skipping zero estimates
/// and estimates with relative standard error above 20%.
inline ScalingFit fit_power_law(const std::vector<double>& h, const std::vector<EstimateWithError>& est) {
  if (h.size() != est.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  ScalingFit fit;
  fit.h = h;
  fit.estimates = est;
  fit.used.assign(h.size(), false);
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& e = est[i];
    if (!(e.value > 0.0) || !(h[i] > 0.0)) continue;
    if (e.std_error > kScalingMaxRelativeError * e.value) continue;
    fit.used[i] = true;
    lx.push_back(std::log(h[i]));
    ly.push_back(std::log(e.value));
  }
  if (lx.size() < 3) {
    throw std::runtime_error("fit_scaling_exponent: fewer than 3 usable grid points (" +
                             std::to_string(lx.size()) + ")");
  }
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    fit.residuals.push_back(r);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return fit;
}

inline void validate_h_grid(const std::vector<double>& h_grid) {
  if (h_grid.size() < 4) throw std::invalid_argument("h grid needs at least 4 points");
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    if (!(h_grid[i] > 0.0 && h_grid[i] < 2.0)) throw std::invalid_argument("h grid values must lie in (0, 2)");
    if (i > 0 && !(h_grid[i] > h_grid[i - 1])) throw std::invalid_argument("h grid must be strictly increasing");
  }
}

/// Rejection probability at each h on the grid and its fitted log-log slope.
/// Grid point i draws from the stream derived from (base seed, i).
inline ScalingFit fit_scaling_exponent(ProposalKind kind, const TargetModel& model, ConstPoint x,
                                       const std::vector<double>& h_grid, std::size_t n_samples,
                                       RandomStream& rng) {
  validate_h_grid(h_grid);
  const std::uint64_t seed = est_detail::base_seed(rng);
  std::vector<EstimateWithError> est(h_grid.size());
  for (std::size_t i = 0; i < h_grid.size(); ++i) {
    RandomStream r = RandomStream::derive(seed, i);
    est[i] = estimate_rejection_probability(ProposalSpec(kind, h_grid[i]), model, x, n_samples, r);
  }
  return fit_power_law(h_grid, est);
}

// ---------------------------------------------------------------------------
// Contraction.

/// Upper-bound decomposition of the expected coupled distance after one step
/// from (x, x~), with d = ||x - x~||_-:
/// d(Y,Y~) + (d - d(Y,Y~)) E[max(1-alpha, 1-alpha~)]
///   + E[d(x,Y)(alpha - alpha~)^+] + E[d(x~,Y~)(alpha - alpha~)^-].
struct ContractionDecomposition {
  double initial_distance = 0.0;
  EstimateWithError proposal_distance;
  EstimateWithError rejection_term;
  EstimateWithError first_excess_term;
  EstimateWithError second_excess_term;

  double total() const {
    return proposal_distance.value + rejection_term.value + first_excess_term.value + second_excess_term.value;
  }
};

struct ContractionEstimate {
  /// E||W - W~||_- / ||x - x~||_-.
  EstimateWithError ratio;
  EventCounts events;
  ContractionDecomposition decomposition;
};

namespace est_detail {

struct ContractionAcc {
  RunningMoments ratio, prop, rej, first, second;
  EventCounts events;

  void merge(const ContractionAcc& o) {
    ratio.merge(o.ratio);
    prop.merge(o.prop);
    rej.merge(o.rej);
    first.merge(o.first);
    second.merge(o.second);
    events += o.events;
  }
};

}  // namespace est_detail

/// One-step coupled distance ratio from the fixed pair (x, x~). Each sample
/// shares Z and the acceptance uniform between the two chains.
inline ContractionEstimate estimate_contraction_rate(const ProposalSpec& spec, const TargetModel& model,
                                                     ConstPoint x, ConstPoint x_tilde, std::size_t n_samples,
                                                     RandomStream& rng) {
  if (n_samples < 1) throw std::invalid_argument("estimate_contraction_rate: n_samples must be >= 1");
  require_dim(model.d, x.size(), "estimate_contraction_rate");
  require_dim(model.d, x_tilde.size(), "estimate_contraction_rate");
  const double d0 = model.norm.minus_distance(x, x_tilde);
  if (!(d0 > 0.0)) throw std::invalid_argument("estimate_contraction_rate: x and x_tilde must differ");
  const CoupledState s0{Point(x.begin(), x.end()), Point(x_tilde.begin(), x_tilde.end())};

  auto acc = est_detail::run_blocks<est_detail::ContractionAcc>(
      n_samples, est_detail::base_seed(rng),
      [&](RandomStream& r, std::size_t count, est_detail::ContractionAcc& out) {
        Point z(model.d);
        for (std::size_t s = 0; s < count; ++s) {
          r.fill_normal(z);
          const double log_u = r.log_uniform();
          const CoupledStepResult step = coupled_step(spec, model, s0, z, log_u);
          out.events.add(step.event);
          out.ratio.add(model.norm.minus_distance(step.state.x, step.state.x_tilde) / d0);

          const double a = acceptance(step.g);
          const double at = acceptance(step.g_tilde);
          const double dy = model.norm.minus_distance(step.proposal, step.proposal_tilde);
          out.prop.add(dy);
          out.rej.add((d0 - dy) * std::max(1.0 - a, 1.0 - at));
          out.first.add(model.norm.minus_distance(s0.x, step.proposal) * std::max(a - at, 0.0));
          out.second.add(model.norm.minus_distance(s0.x_tilde, step.proposal_tilde) * std::max(at - a, 0.0));
        }
      });

  ContractionEstimate e;
  e.ratio = acc.ratio.estimate();
  e.events = acc.events;
  e.decomposition.initial_distance = d0;
  e.decomposition.proposal_distance = acc.prop.estimate();
  e.decomposition.rejection_term = acc.rej.estimate();
  e.decomposition.first_excess_term = acc.first.estimate();
  e.decomposition.second_excess_term = acc.second.estimate();
  return e;
}

// ---------------------------------------------------------------------------
// Exit probabilities.

namespace est_detail {

struct CountAcc {
  RunningMoments m;
  void merge(const CountAcc& o) { m.merge(o.m); }
};

}  // namespace est_detail

/// Fraction of replicas with max_{k < n} ||X_k||_- >= R. Replica j runs on the
/// stream derived from (base seed, j).
inline EstimateWithError estimate_exit_probability(const ProposalSpec& spec, const TargetModel& model,
                                                   ConstPoint x0, double R, std::size_t n_steps,
                                                   std::size_t n_replicas, RandomStream& rng) {
  if (n_steps < 1 || n_replicas < 1) {
    throw std::invalid_argument("estimate_exit_probability: n_steps and n_replicas must be >= 1");
  }
  require_dim(model.d, x0.size(), "estimate_exit_probability");
  if (!(model.norm.minus(x0) < R)) throw std::invalid_argument("estimate_exit_probability: x0 must lie inside B_R");
  const std::uint64_t seed = est_detail::base_seed(rng);
  std::vector<char> exited(n_replicas, 0);
  parallel_for(n_replicas, [&](std::size_t j) {
    RandomStream r = RandomStream::derive(seed, j);
    Point x(x0.begin(), x0.end());
    Point z(model.d);
    for (std::size_t k = 1; k < n_steps; ++k) {
      r.fill_normal(z);
      const double log_u = r.log_uniform();
      Point y = propose(spec, model, x, z);
      if (accept_decision(log_g(spec, model, x, y), log_u)) x = std::move(y);
      if (model.norm.minus(x) >= R) {
        exited[j] = 1;
        return;
      }
    }
  });
  RunningMoments m;
  for (char c : exited) m.add(c ? 1.0 : 0.0);
  return m.estimate();
}

// ---------------------------------------------------------------------------
// Wasserstein distance on the line.

/// Exact W1 between the empirical measures of a and b. Equal sizes use the
/// sorted pairing; otherwise the integral of |F_a - F_b| is evaluated exactly.
/// Also an upper bound for the truncated distance min(|x - y|, 2R).
inline double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  if (a.size() == b.size()) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s / static_cast<double>(a.size());
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double prev = std::min(a[0], b[0]);
  double total = 0.0;
  while (i < a.size() || j < b.size()) {
    const double next = (j >= b.size() || (i < a.size() && a[i] <= b[j])) ? a[i] : b[j];
    total += std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb) * (next - prev);
    while (i < a.size() && a[i] == next) ++i;
    while (j < b.size() && b[j] == next) ++j;
    prev = next;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Finite differences.

/// Max over points of ||grad_f - central FD||_inf / max(||FD||_inf, floor).
inline double finite_difference_check(const std::function<double(ConstPoint)>& f,
                                      const std::function<Point(ConstPoint)>& grad_f,
                                      const std::vector<Point>& points, double fd_step = 1e-5,
                                      double floor = 1e-8) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("finite_difference_check: fd_step must be > 0");
  double worst = 0.0;
  for (const Point& p : points) {
    const Point g = grad_f(p);
    require_dim(p.size(), g.size(), "finite_difference_check");
    Point q = p;
    double diff = 0.0, scale = floor;
    for (std::size_t i = 0; i < p.size(); ++i) {
      q[i] = p[i] + fd_step;
      const double fp = f(q);
      q[i] = p[i] - fd_step;
      const double fm = f(q);
      q[i] = p[i];
      const double fd = (fp - fm) / (2.0 * fd_step);
      diff = std::max(diff, std::abs(fd - g[i]));
      scale = std::max(scale, std::abs(fd));
    }
    worst = std::max(worst, diff / scale);
  }
  return worst;
}

/// G(x, y(x, w)) with the noise offset w fixed, the function whose gradient
/// grad_x_g returns.
inline double log_g_fixed_noise(const ProposalSpec& spec, const TargetModel& model, ConstPoint x, ConstPoint w) {
  Point y(model.d);
  detail::proposal_mean(spec, model, x, y);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += w[i];
  return log_g(spec, model, x, y);
}

// ---------------------------------------------------------------------------
// Lyapunov drift.

struct DriftPoint {
  double x_norm = 0.0;
  EstimateWithError expected_f;
  /// Smallest C2 making the drift inequality hold at the point estimate.
  double fitted_c2 = 0.0;
  bool holds = false;
};

/// E[f(X_1) | X_0 = x] for f = exp(K ||.||_-^2 / 16) and the fitted drift
/// constant at each point. `holds` compares against `user_c2`.
inline std::vector<DriftPoint> lyapunov_drift_check(const ProposalSpec& spec, const TargetModel& model, double K,
                                                    const std::vector<Point>& points, std::size_t n_samples,
                                                    RandomStream& rng, double user_c2 = 1.0) {
  if (!(K > 0.0)) throw std::invalid_argument("lyapunov_drift_check: K must be > 0");
  if (n_samples < 1) throw std::invalid_argument("lyapunov_drift_check: n_samples must be >= 1");
  std::vector<DriftPoint> out;
  for (const Point& x : points) {
    require_dim(model.d, x.size(), "lyapunov_drift_check");
    auto acc = est_detail::run_blocks<RunningMoments>(
        n_samples, est_detail::base_seed(rng), [&](RandomStream& r, std::size_t count, RunningMoments& m) {
          Point z(model.d);
          for (std::size_t s = 0; s < count; ++s) {
            r.fill_normal(z);
            const double log_u = r.log_uniform();
            const StepOutcome step = mh_step(spec, model, x, z, log_u);
            m.add(lyapunov_function(K, model.norm.minus(step.next)));
          }
        });
    DriftPoint p;
    p.x_norm = model.norm.minus(x);
    p.expected_f = acc.estimate();
    p.fitted_c2 = lyapunov_drift_constant(K, spec.h(), p.x_norm, p.expected_f.value);
    p.holds = p.fitted_c2 <= user_c2;
    out.push_back(p);
  }
  return out;
}

/// E exp(sum_i s_i (mu_i + sigma Z_i)^2) for standard normal Z; requires 2 s_i sigma^2 < 1.
inline double gaussian_exp_quadratic_moment(ConstPoint mu, double sigma, ConstPoint s) {
  require_dim(mu.size(), s.size(), "gaussian_exp_quadratic_moment");
  double log_v = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double t = 1.0 - 2.0 * s[i] * sigma * sigma;
    if (!(t > 0.0)) throw std::domain_error("gaussian_exp_quadratic_moment: moment is infinite");
    log_v += -0.5 * std::log(t) + s[i] * mu[i] * mu[i] / t;
  }
  return std::exp(log_v);
}

// ---------------------------------------------------------------------------
// Norm moments.

/// Monte Carlo E||Z||_-^n for n = 1..max_n.
inline std::map<int, EstimateWithError> estimate_norm_moments(const NormSpace& norm, int max_n,
                                                              std::size_t n_samples, RandomStream& rng) {
  if (max_n < 1 || n_samples < 1) throw std::invalid_argument("estimate_norm_moments: invalid arguments");
  struct Acc {
    std::vector<RunningMoments> m;
    void merge(const Acc& o) {
      if (m.empty()) m.resize(o.m.size());
      for (std::size_t i = 0; i < o.m.size(); ++i) m[i].merge(o.m[i]);
    }
  };
  auto acc = est_detail::run_blocks<Acc>(n_samples, est_detail::base_seed(rng),
                                         [&](RandomStream& r, std::size_t count, Acc& out) {
                                           out.m.resize(static_cast<std::size_t>(max_n));
                                           Point z(norm.dim());
                                           for (std::size_t s = 0; s < count; ++s) {
                                             r.fill_normal(z);
                                             const double v = norm.minus(z);
                                             double p = 1.0;
                                             for (int n = 1; n <= max_n; ++n) {
                                               p *= v;
                                               out.m[static_cast<std::size_t>(n - 1)].add(p);
                                             }
                                           }
                                         });
  std::map<int, EstimateWithError> out;
  for (int n = 1; n <= max_n; ++n) out[n] = acc.m[static_cast<std::size_t>(n - 1)].estimate();
  return out;
}

/// Moments for BoundInputs: chi moments for the Euclidean norm, otherwise Monte Carlo.
inline std::map<int, double> norm_moments(const NormSpace& norm, int max_n, std::size_t n_samples,
                                          RandomStream& rng) {
  std::map<int, double> out;
  if (norm.is_euclidean()) {
    for (int n = 1; n <= max_n; ++n) out[n] = euclidean_norm_moment(norm.dim(), n);
    return out;
  }
  for (const auto& [n, e] : estimate_norm_moments(norm, max_n, n_samples, rng)) out[n] = e.value;
  return out;
}

}  // namespace mhc
