#pragma once

// Closed-form analytic bounds for the MH chains: proposal and MH contraction
// constants, rejection and acceptance-sensitivity bounds, Lyapunov exit
// bounds, iterated Wasserstein bounds and the step-count planner.
//
// Constants that are only known to exist (A, D, D-bar, C, q, rho, ...) are
// explicit inputs defaulting to 1. Every report echoes them.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhc/model.hpp"

namespace mhc {

/// Constants whose values are only asserted to exist. User-supplied.
struct UnspecifiedConstants {
  double A = 1.0;        ///< OU contraction correction constant.
  double C_main = 1.0;   ///< step-size regime h^{-1} >= C (1+R)^q.
  double D_main = 1.0;   ///< exit term of the quantitative convergence bound.
  double q_main = 1.0;
  double rho = 1.0;      ///< exponent of the exit-bound step-size regime.
  double C2_lyap = 1.0;  ///< drift constant of the Lyapunov inequality.
  double D_exit = 1.0;   ///< prefactor of the exit-probability bound.
  double D_bar = 1.0;    ///< exit term of the final distance bound.
};

struct BoundInputs {
  std::optional<double> K;    ///< curvature lower bound of U, in (0, 1].
  std::optional<double> M_R;  ///< sup of ||Hess U(z) eta||_- over z in B_R^-, ||eta||_- <= 1.
  std::optional<double> N_R;  ///< same for Hess V.
  std::array<std::optional<double>, 4> C{};
  std::array<int, 4> p{0, 0, 0, 0};
  /// moments[n] = E ||Z||_-^n.
  std::map<int, double> moments;
  double R = 1.0;
  double h = 0.1;
  UnspecifiedConstants unspecified;
  /// True when M_R / N_R came from a numerical search rather than closed form.
  bool hessian_norms_heuristic = false;

  double c(int n) const {
    const auto& v = C.at(static_cast<std::size_t>(n - 1));
    if (!v) throw std::invalid_argument("bound inputs: missing constant C" + std::to_string(n));
    return *v;
  }

  double m(int n) const {
    auto it = moments.find(n);
    if (it == moments.end()) {
      throw std::invalid_argument("bound inputs: missing moment m" + std::to_string(n));
    }
    return it->second;
  }

  double k() const {
    if (!K) throw std::invalid_argument("bound inputs: missing convexity constant K");
    return *K;
  }

  void validate() const {
    if (K && !(*K > 0.0 && *K <= 1.0)) throw std::invalid_argument("bound inputs: K must lie in (0, 1]");
    if (M_R && !(*M_R >= 0.0)) throw std::invalid_argument("bound inputs: M(R) must be >= 0");
    if (N_R && !(*N_R >= 0.0)) throw std::invalid_argument("bound inputs: N(R) must be >= 0");
    for (const auto& v : C)
      if (v && !(*v >= 0.0)) throw std::invalid_argument("bound inputs: C_n must be >= 0");
    for (int v : p)
      if (v < 0) throw std::invalid_argument("bound inputs: p_n must be >= 0");
    if (!(R > 0.0)) throw std::invalid_argument("bound inputs: R must be > 0");
    if (!(h > 0.0 && h < 2.0)) throw std::invalid_argument("bound inputs: h must lie in (0, 2)");
    for (const auto& [n, v] : moments) {
      if (n < 1 || !(v >= 0.0)) throw std::invalid_argument("bound inputs: invalid moment m" + std::to_string(n));
    }
    // Lyapunov's inequality: m_n^{1/n} is nondecreasing in n.
    double prev = 0.0;
    for (const auto& [n, v] : moments) {
      const double root = std::pow(v, 1.0 / n);
      if (root < prev * (1.0 - 1e-12)) {
        throw std::invalid_argument("bound inputs: moments violate m_n^{1/n} monotonicity at n=" +
                                    std::to_string(n));
      }
      prev = root;
    }
    const auto& u = unspecified;
    for (double v : {u.A, u.C_main, u.D_main, u.q_main, u.rho, u.C2_lyap, u.D_exit, u.D_bar})
      if (!(v >= 0.0)) throw std::invalid_argument("bound inputs: unspecified constants must be >= 0");
  }
};

/// E|Z|^n for a standard normal Z in R^d (chi moments).
inline double euclidean_norm_moment(std::size_t d, int n) {
  const double dd = static_cast<double>(d);
  return std::exp(0.5 * n * std::log(2.0) + std::lgamma(0.5 * (dd + n)) - std::lgamma(0.5 * dd));
}

// ---------------------------------------------------------------------------
// Proposal contraction.

enum class ContractionMode { lipschitz, convex };

/// 1 - K h/2 + M^2 h^2/8. Valid for any lower curvature bound K > 0.
inline double convex_proposal_factor(double K, double M, double h) {
  return 1.0 - 0.5 * K * h + M * M * h * h / 8.0;
}

/// Factor bounding ||Y_h(x) - Y_h(x~)||_- / ||x - x~||_- on B_R^-. May exceed 1.
inline double proposal_contraction_factor(const BoundInputs& in, ContractionMode mode) {
  in.validate();
  if (mode == ContractionMode::lipschitz) {
    if (!in.N_R) throw std::invalid_argument("proposal_contraction_factor: lipschitz mode needs N(R)");
    return 1.0 - 0.5 * (1.0 - *in.N_R) * in.h;
  }
  if (!in.M_R) throw std::invalid_argument("proposal_contraction_factor: convex mode needs M(R)");
  return convex_proposal_factor(in.k(), *in.M_R, in.h);
}

// ---------------------------------------------------------------------------
// Rejection and acceptance-sensitivity bounds.

enum class BoundKind { ou_p2zero, semi_implicit_explicit };

/// Norms at the evaluation point. For sensitivity bounds of OU proposals
/// `x_norm` is max(||x||_-, ||x~||_-).
struct PointNorms {
  double x_norm = 0.0;
  double grad_u_norm = 0.0;
};

/// Upper bound on E[1 - alpha(x, Y_h(x))].
inline double rejection_bound(const BoundInputs& in, BoundKind kind, PointNorms at) {
  in.validate();
  const double h = in.h;
  const double sh = std::sqrt(h);
  if (kind == BoundKind::ou_p2zero) {
    const double c1 = in.c(1), c2 = in.c(2), m1 = in.m(1), m2 = in.m(2);
    const double x = at.x_norm;
    return m1 * (c1 + c2 * x) * sh + 0.5 * (2.0 * m2 * c2 + c1 * x + c2 * x * x) * h +
           0.5 * m1 * c2 * x * h * sh;
  }
  const double c2 = in.c(2), c3 = in.c(3);
  const double m1 = in.m(1), m2 = in.m(2), m3 = in.m(3);
  const double g = at.grad_u_norm;
  return h * sh * (0.25 * c3 * m3 + 0.5 * c2 * m1 * g) +
         h * h * (0.25 * c2 * g * g + 0.5 * c2 * (1.0 + c2) * m2) +
         h * h * h * (c3 * g * g * g / 32.0 + 0.125 * c2 * (1.0 + c2) * g * g);
}

/// Per-unit-distance bound on the dependence of acceptance on the current
/// state: the L2 norm of alpha(x,Y) - alpha(x~,Y~) divided by ||x - x~||_-
/// for OU, and E||grad_x G(x, Y_h(x))||_+ for semi-implicit proposals.
inline double acceptance_sensitivity_bound(const BoundInputs& in, BoundKind kind, PointNorms at) {
  in.validate();
  const double h = in.h;
  const double sh = std::sqrt(h);
  if (kind == BoundKind::ou_p2zero) {
    const double c1 = in.c(1), c2 = in.c(2), m2 = in.m(2);
    return std::sqrt(m2) * c2 * sh + 0.5 * (c1 + 2.0 * c2 * at.x_norm) * h;
  }
  const double c2 = in.c(2), c3 = in.c(3), c4 = in.c(4);
  const double m1 = in.m(1), m2 = in.m(2), m3 = in.m(3);
  const double g = at.grad_u_norm;
  const double h32 = h * sh;
  return 0.25 * h32 * (c4 * m3 + (1.0 + c2) * c2 * m1 + 2.0 * c3 * g * m1) +
         0.125 * h * h * (4.0 * c2 * (1.0 + 2.0 * c2) * m2 + 3.0 * c2 * (1.0 + c2) * g + 2.0 * c3 * g * g) +
         h * h32 / 16.0 * c2 * (1.0 + c2) * (1.0 + c2) * (2.0 * m1 + sh * g) +
         h * h * h / 32.0 * (4.0 * c3 * (1.0 + 2.0 * c2) * g * g + c4 * g * g * g);
}

// ---------------------------------------------------------------------------
// MH contraction constants.

/// Suprema over B_R^- entering the semi-implicit contraction constant.
struct SemiImplicitAux {
  double beta = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
};

/// beta, gamma, delta from the explicit rejection / sensitivity polynomials
/// evaluated at the worst-case ||grad U||_- over the ball. Both polynomials
/// are nondecreasing in that argument, so evaluating at the supremum gives the
/// supremum. The k = 1 sensitivity polynomial stands in for its L2 version.
inline SemiImplicitAux semi_implicit_aux(const BoundInputs& in, double sup_grad_u_norm) {
  const double h32 = in.h * std::sqrt(in.h);
  const PointNorms at{in.R, sup_grad_u_norm};
  const double p1 = rejection_bound(in, BoundKind::semi_implicit_explicit, at) / h32;
  const double q = acceptance_sensitivity_bound(in, BoundKind::semi_implicit_explicit, at) / h32;
  return {p1, std::sqrt(in.m(2)) * q, q * sup_grad_u_norm};
}

struct ContractionConstant {
  double value = 1.0;
  bool contractive = false;
};

inline ContractionConstant make_contraction(double v) { return {v, v < 1.0}; }

/// c_h^OU(R) = 1 - h/2 + m2 C2 h + A (1+R)(1 + h^{1/2} R) h^{3/2}.
inline ContractionConstant mh_contraction_factor_ou(const BoundInputs& in) {
  in.validate();
  const double h = in.h;
  const double A = in.unspecified.A;
  return make_contraction(1.0 - 0.5 * h + in.m(2) * in.c(2) * h +
                          A * (1.0 + in.R) * (1.0 + std::sqrt(h) * in.R) * h * std::sqrt(h));
}

/// c_h(R) = 1 - K h/2 + (M^2/8 + gamma) h^2 + (K beta + delta/2) h^{5/2}
/// at an arbitrary h >= 0 (h = 0 gives exactly 1).
inline ContractionConstant semi_implicit_contraction(double K, double M, const SemiImplicitAux& aux,
                                                     double h) {
  const double h2 = h * h;
  return make_contraction(1.0 - 0.5 * K * h + (M * M / 8.0 + aux.gamma) * h2 +
                          (K * aux.beta + 0.5 * aux.delta) * h2 * std::sqrt(h));
}

inline ContractionConstant mh_contraction_factor_semi_implicit(const BoundInputs& in,
                                                              const SemiImplicitAux& aux) {
  in.validate();
  if (!in.M_R) throw std::invalid_argument("mh_contraction_factor: semi-implicit needs M(R)");
  return semi_implicit_contraction(in.k(), *in.M_R, aux, in.h);
}

// ---------------------------------------------------------------------------
// Lyapunov function and exit probabilities.

/// f(x) = exp(K ||x||_-^2 / 16).
inline double lyapunov_function(double K, double x_norm) {
  return std::exp(K * x_norm * x_norm / 16.0);
}

struct ProbabilityBound {
  double raw = 0.0;
  double clipped = 0.0;
};

inline ProbabilityBound clip_probability(double raw) {
  return {raw, std::clamp(raw, 0.0, 1.0)};
}

/// P_x[T_R <= n] <= D n h exp(K (||x||_-^2 - R^2) / 24). The step-size regime
/// h^{-1} >= C (1+R)^rho is the caller's responsibility.
inline ProbabilityBound lyapunov_exit_bound(const BoundInputs& in, double x_norm, std::size_t n) {
  in.validate();
  const double K = in.k();
  const double raw = in.unspecified.D_exit * static_cast<double>(n) * in.h *
                     std::exp(K * (x_norm * x_norm - in.R * in.R) / 24.0);
  return clip_probability(raw);
}

/// Required C2 at a point for the one-step drift inequality
/// q_h f <= f^{1 - K h/4} e^{C2 h}, given E[f(X_1) | X_0 = x].
inline double lyapunov_drift_constant(double K, double h, double x_norm, double expected_f) {
  const double log_f = K * x_norm * x_norm / 16.0;
  return (std::log(expected_f) - (1.0 - 0.25 * K * h) * log_f) / h;
}

// ---------------------------------------------------------------------------
// Iterated and final distance bounds.

/// gamma^n w0 + diameter (exit_mu + exit_nu).
inline double iterated_wasserstein_bound(double contraction, std::size_t n, double w0,
                                         double diameter, double exit_mu, double exit_nu) {
  if (!(contraction > 0.0)) throw std::invalid_argument("iterated_wasserstein_bound: contraction must be > 0");
  if (contraction >= 1.0) {
    throw std::invalid_argument("iterated_wasserstein_bound: contraction >= 1 makes the bound vacuous");
  }
  if (!(exit_mu >= 0.0 && exit_mu <= 1.0 && exit_nu >= 0.0 && exit_nu <= 1.0)) {
    throw std::invalid_argument("iterated_wasserstein_bound: exit probabilities must lie in [0, 1]");
  }
  if (!(w0 >= 0.0 && diameter >= 0.0)) throw std::invalid_argument("iterated_wasserstein_bound: negative distance");
  return std::pow(contraction, static_cast<double>(n)) * w0 + diameter * (exit_mu + exit_nu);
}

/// (1 - K h/4)^n w0 + D R exp(-K R^2/8) n h, for initial laws supported in B_R^-.
inline double convergence_bound_main(const BoundInputs& in, std::size_t n, double w0) {
  in.validate();
  const double K = in.k();
  const double nd = static_cast<double>(n);
  return std::pow(1.0 - 0.25 * K * in.h, nd) * w0 +
         in.unspecified.D_main * in.R * std::exp(-K * in.R * in.R / 8.0) * nd * in.h;
}

/// 58 R (1 - K h/4)^n + D-bar R exp(-K R^2/33) n h.
inline double final_distance_bound(double K, double h, double R, double D_bar, std::size_t n) {
  const double nd = static_cast<double>(n);
  return 58.0 * R * std::pow(1.0 - 0.25 * K * h, nd) + D_bar * R * std::exp(-K * R * R / 33.0) * nd * h;
}

inline double final_distance_bound(const BoundInputs& in, std::size_t n) {
  in.validate();
  return final_distance_bound(in.k(), in.h, in.R, in.unspecified.D_bar, n);
}

// ---------------------------------------------------------------------------
// Step-count planner.

struct StepPlan {
  bool feasible = false;
  double R = 0.0;
  double h = 0.0;
  std::size_t n = 0;
  /// Name of the violated constraint when infeasible.
  std::string violated;
  double bound = std::numeric_limits<double>::quiet_NaN();
};

namespace plan_detail {

/// Minimal n h making the geometric term at most epsilon/2.
inline double mixing_time(double K, double R, double epsilon) {
  return 4.0 / K * std::log(116.0 * R / epsilon);
}

/// 8 D-bar K^{-1} log(116 R / eps) R exp(-K R^2/33), to be compared with eps.
inline double radius_condition(double K, double D_bar, double R, double epsilon) {
  return 8.0 * D_bar / K * std::log(116.0 * R / epsilon) * R * std::exp(-K * R * R / 33.0);
}

}  // namespace plan_detail

/// Finds the smallest R on the grid 1.1^j (j >= 0) satisfying the radius
/// condition, sets h^{-1} = ceil(C (1+R)^q) and n = ceil(mixing time / h),
/// and checks that the exit term stays below epsilon/2.
inline StepPlan step_planner(double epsilon, double K, double D_bar, double C, double q,
                             double R_max = 1e6) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("step_planner: epsilon must be > 0");
  if (!(K > 0.0 && K <= 1.0)) throw std::invalid_argument("step_planner: K must lie in (0, 1]");
  if (!(D_bar >= 0.0 && C > 0.0 && q >= 0.0)) throw std::invalid_argument("step_planner: invalid constants");

  StepPlan plan;
  plan.violated = "radius_condition";
  for (double R = 1.0; R <= R_max; R *= 1.1) {
    if (!(plan_detail::radius_condition(K, D_bar, R, epsilon) < epsilon)) continue;
    const double inv_h = std::max(1.0, std::ceil(C * std::pow(1.0 + R, q)));
    const double h = 1.0 / inv_h;
    if (!(h < 2.0)) continue;
    const double nh_min = plan_detail::mixing_time(K, R, epsilon);
    const double n_real = nh_min <= 0.0 ? 0.0 : std::ceil(nh_min / h);
    const auto n = static_cast<std::size_t>(n_real);
    const double exit_term = D_bar * R * std::exp(-K * R * R / 33.0) * static_cast<double>(n) * h;
    if (!(exit_term < 0.5 * epsilon)) {
      plan.violated = "exit_term";
      continue;
    }
    plan.feasible = true;
    plan.violated.clear();
    plan.R = R;
    plan.h = h;
    plan.n = n;
    plan.bound = final_distance_bound(K, h, R, D_bar, n);
    return plan;
  }
  return plan;
}

/// Checks the three planner constraints for a candidate (R, h, n).
struct PlanCheck {
  bool mixing = false;
  bool exit_term = false;
  bool radius = false;
};

inline PlanCheck check_plan(double epsilon, double K, double D_bar, double R, double h, std::size_t n) {
  PlanCheck c;
  c.mixing = static_cast<double>(n) * h >= plan_detail::mixing_time(K, R, epsilon);
  c.exit_term = D_bar * R * std::exp(-K * R * R / 33.0) * static_cast<double>(n) * h < 0.5 * epsilon;
  c.radius = plan_detail::radius_condition(K, D_bar, R, epsilon) < epsilon;
  return c;
}

// ---------------------------------------------------------------------------
// Hessian norm estimation.

struct HessianNorms {
  double M = 0.0;
  double N = 0.0;
};

/// M(R), N(R) by power iteration on the minus-norm operator norm of Hess U and
/// Hess V at the points of a uniform grid over B_R^- (d <= 2). Heuristic: it
/// only sees the grid.
inline HessianNorms estimate_hessian_norms(const TargetModel& model, double R, int grid_per_axis = 21,
                                           int iterations = 100) {
  if (model.d > 2) throw std::invalid_argument("estimate_hessian_norms: only d <= 2 is supported");
  if (!model.has_hessian()) throw std::logic_error("estimate_hessian_norms: model has no Hessian action");
  const std::size_t d = model.d;
  const auto w = model.norm.weights();
  std::vector<double> sq(d), isq(d);
  for (std::size_t i = 0; i < d; ++i) {
    sq[i] = std::sqrt(w[i]);
    isq[i] = 1.0 / sq[i];
  }
  // Operator A = G^{1/2} H G^{-1/2}; its spectral norm is the minus-norm operator norm of H.
  auto op_norm = [&](ConstPoint z, bool add_identity) {
    Point v(d, 1.0 / std::sqrt(static_cast<double>(d))), eta(d), hv(d), av(d), atav(d);
    auto apply_a = [&](const Point& in, Point& out, bool transpose) {
      // A^T = G^{-1/2} H G^{1/2} since H is symmetric.
      for (std::size_t i = 0; i < d; ++i) eta[i] = in[i] * (transpose ? sq[i] : isq[i]);
      model.hess_V_apply(z, eta, hv);
      for (std::size_t i = 0; i < d; ++i) {
        const double hu = hv[i] + (add_identity ? eta[i] : 0.0);
        out[i] = hu * (transpose ? isq[i] : sq[i]);
      }
    };
    double sigma2 = 0.0;
    for (int it = 0; it < iterations; ++it) {
      apply_a(v, av, false);
      apply_a(av, atav, true);
      sigma2 = std::sqrt(squared_norm(atav));
      if (sigma2 == 0.0) return 0.0;
      for (std::size_t i = 0; i < d; ++i) v[i] = atav[i] / sigma2;
    }
    return std::sqrt(sigma2);
  };

  HessianNorms out;
  Point z(d, 0.0);
  const int g = std::max(grid_per_axis, 2);
  const int g2 = d == 2 ? g : 1;
  for (int a = 0; a < g; ++a) {
    for (int b = 0; b < g2; ++b) {
      z[0] = R * (-1.0 + 2.0 * a / (g - 1)) * isq[0];
      if (d == 2) z[1] = R * (-1.0 + 2.0 * b / (g - 1)) * isq[1];
      if (!(model.norm.minus(z) < R)) continue;
      out.M = std::max(out.M, op_norm(z, true));
      out.N = std::max(out.N, op_norm(z, false));
    }
  }
  return out;
}

/// sup of ||grad U(z)||_- over a uniform grid on B_R^- (d <= 2).
inline double estimate_sup_grad_u_norm(const TargetModel& model, double R, int grid_per_axis = 41) {
  if (model.d > 2) throw std::invalid_argument("estimate_sup_grad_u_norm: only d <= 2 is supported");
  const std::size_t d = model.d;
  const auto w = model.norm.weights();
  Point z(d, 0.0);
  const int g = std::max(grid_per_axis, 2);
  const int g2 = d == 2 ? g : 1;
  double best = 0.0;
  for (int a = 0; a < g; ++a) {
    for (int b = 0; b < g2; ++b) {
      z[0] = R * (-1.0 + 2.0 * a / (g - 1)) / std::sqrt(w[0]);
      if (d == 2) z[1] = R * (-1.0 + 2.0 * b / (g - 1)) / std::sqrt(w[1]);
      if (model.norm.minus(z) > R) continue;
      best = std::max(best, model.norm.minus(grad_U(model, z)));
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Report.

struct BoundEntry {
  std::string name;
  double value = 0.0;
  /// Formula identifier, e.g. "mh_contraction.semi_implicit".
  std::string formula;
};

struct BoundReport {
  BoundInputs inputs;
  PointNorms at;
  std::vector<BoundEntry> entries;
  /// Calculators skipped because an input was missing.
  std::vector<std::string> skipped;

  const BoundEntry* find(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return &e;
    return nullptr;
  }
};

/// Evaluates every calculator whose inputs are present.
inline BoundReport evaluate_bounds(const BoundInputs& in, PointNorms at,
                                   std::optional<double> sup_grad_u_norm = std::nullopt,
                                   std::size_t n_steps = 0) {
  in.validate();
  BoundReport rep;
  rep.inputs = in;
  rep.at = at;
  auto attempt = [&](const std::string& name, const std::string& formula, auto&& fn) {
    try {
      rep.entries.push_back({name, fn(), formula});
    } catch (const std::invalid_argument& e) {
      rep.skipped.push_back(name + ": " + e.what());
    }
  };
  attempt("proposal_contraction_lipschitz", "proposal_contraction.lipschitz",
          [&] { return proposal_contraction_factor(in, ContractionMode::lipschitz); });
  attempt("proposal_contraction_convex", "proposal_contraction.convex",
          [&] { return proposal_contraction_factor(in, ContractionMode::convex); });
  attempt("rejection_bound_ou", "rejection.ou_p2zero",
          [&] { return rejection_bound(in, BoundKind::ou_p2zero, at); });
  attempt("rejection_bound_semi_implicit", "rejection.semi_implicit_explicit",
          [&] { return rejection_bound(in, BoundKind::semi_implicit_explicit, at); });
  attempt("sensitivity_bound_ou", "sensitivity.ou_p2zero",
          [&] { return acceptance_sensitivity_bound(in, BoundKind::ou_p2zero, at); });
  attempt("sensitivity_bound_semi_implicit", "sensitivity.semi_implicit_explicit",
          [&] { return acceptance_sensitivity_bound(in, BoundKind::semi_implicit_explicit, at); });
  attempt("mh_contraction_ou", "mh_contraction.ou", [&] { return mh_contraction_factor_ou(in).value; });
  if (sup_grad_u_norm) {
    attempt("mh_contraction_semi_implicit", "mh_contraction.semi_implicit", [&] {
      return mh_contraction_factor_semi_implicit(in, semi_implicit_aux(in, *sup_grad_u_norm)).value;
    });
  } else {
    rep.skipped.push_back("mh_contraction_semi_implicit: needs sup ||grad U||_- over the ball");
  }
  attempt("lyapunov_f", "lyapunov.function", [&] { return lyapunov_function(in.k(), at.x_norm); });
  attempt("exit_bound_raw", "exit.lyapunov", [&] { return lyapunov_exit_bound(in, at.x_norm, n_steps).raw; });
  attempt("exit_bound_clipped", "exit.lyapunov",
          [&] { return lyapunov_exit_bound(in, at.x_norm, n_steps).clipped; });
  attempt("convergence_bound_main", "convergence.main",
          [&] { return convergence_bound_main(in, n_steps, 2.0 * in.R); });
  attempt("final_distance_bound", "convergence.final", [&] { return final_distance_bound(in, n_steps); });
  return rep;
}

}  // namespace mhc
