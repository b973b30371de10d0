#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mhc/model.hpp"

namespace mhc {

enum class ProposalKind { ou, semi_implicit, explicit_euler };

inline std::string_view to_string(ProposalKind k) {
  switch (k) {
    case ProposalKind::ou: return "ou";
    case ProposalKind::semi_implicit: return "semi_implicit";
    case ProposalKind::explicit_euler: return "explicit_euler";
  }
  return "unknown";
}

inline ProposalKind parse_proposal_kind(std::string_view s) {
  if (s == "ou") return ProposalKind::ou;
  if (s == "semi_implicit" || s == "mala") return ProposalKind::semi_implicit;
  if (s == "explicit_euler" || s == "euler") return ProposalKind::explicit_euler;
  throw std::invalid_argument("unknown proposal kind '" + std::string(s) +
                              "' (expected ou | semi_implicit | explicit_euler)");
}

/// Proposal family and step size, h in (0, 2) for every family.
class ProposalSpec {
 public:
  ProposalSpec(ProposalKind kind, double h) : kind_(kind), h_(h) {
    if (!(h > 0.0 && h < 2.0)) {
      throw std::invalid_argument("ProposalSpec: step size h must lie in (0, 2), got " +
                                  std::to_string(h));
    }
  }

  ProposalKind kind() const { return kind_; }
  double h() const { return h_; }

  /// Per-coordinate proposal variance: h - h^2/4 for OU and semi-implicit,
  /// h for explicit Euler.
  double variance() const {
    return kind_ == ProposalKind::explicit_euler ? h_ : h_ - 0.25 * h_ * h_;
  }
  double noise_scale() const { return std::sqrt(variance()); }

 private:
  ProposalKind kind_;
  double h_;
};

namespace detail {

inline void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::domain_error(std::string(what) + ": non-finite value of V");
}

inline void check_finite(ConstPoint g, const char* what) {
  if (!all_finite(g)) throw std::domain_error(std::string(what) + ": non-finite gradient of V");
}

/// Writes the proposal mean m(x) into `out`.
inline void proposal_mean(const ProposalSpec& spec, const TargetModel& model, ConstPoint x,
                          std::span<double> out) {
  const double h = spec.h();
  const double shrink = 1.0 - 0.5 * h;
  if (spec.kind() == ProposalKind::ou) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = shrink * x[i];
    return;
  }
  model.grad_V(x, out);
  check_finite(ConstPoint(out.data(), out.size()), "propose");
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = shrink * x[i] - 0.5 * h * out[i];
}

}  // namespace detail

/// Proposal driven by a caller-supplied standard normal draw `z`.
inline Point propose(const ProposalSpec& spec, const TargetModel& model, ConstPoint x,
                     ConstPoint z) {
  require_dim(model.d, x.size(), "propose");
  require_dim(model.d, z.size(), "propose");
  Point y(model.d);
  detail::proposal_mean(spec, model, x, y);
  const double s = spec.noise_scale();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += s * z[i];
  return y;
}

/// Closed-form G(x, y) = log(mu(x)p(x,y) / (mu(y)p(y,x))) for each proposal family.
inline double log_g(const ProposalSpec& spec, const TargetModel& model, ConstPoint x,
                    ConstPoint y) {
  require_dim(model.d, x.size(), "log_g");
  require_dim(model.d, y.size(), "log_g");
  const double vx = model.V(x);
  const double vy = model.V(y);
  detail::check_finite(vx, "log_g");
  detail::check_finite(vy, "log_g");
  if (spec.kind() == ProposalKind::ou) return vy - vx;

  const Point gx = model.grad_V(x);
  const Point gy = model.grad_V(y);
  detail::check_finite(gx, "log_g");
  detail::check_finite(gy, "log_g");

  double trapezoid = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) trapezoid += (y[i] - x[i]) * (gy[i] + gx[i]);
  const double leading = (vy - vx) - 0.5 * trapezoid;

  const double h = spec.h();
  if (spec.kind() == ProposalKind::semi_implicit) {
    double cross = 0.0;
    double gy2 = 0.0;
    double gx2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      cross += (y[i] + x[i]) * (gy[i] - gx[i]);
      gy2 += gy[i] * gy[i];
      gx2 += gx[i] * gx[i];
    }
    return leading + h / (8.0 - 2.0 * h) * (cross + (gy2 - gx2));
  }

  double uy2 = 0.0;
  double ux2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    uy2 += (y[i] + gy[i]) * (y[i] + gy[i]);
    ux2 += (x[i] + gx[i]) * (x[i] + gx[i]);
  }
  return leading + h / 8.0 * (uy2 - ux2);
}

/// G(x, y) evaluated from U differences and the Gaussian proposal
/// log-densities. Independent of the closed forms in `log_g`.
inline double log_g_oracle(const ProposalSpec& spec, const TargetModel& model, ConstPoint x,
                           ConstPoint y) {
  require_dim(model.d, x.size(), "log_g_oracle");
  require_dim(model.d, y.size(), "log_g_oracle");
  const double ux = model.U(x);
  const double uy = model.U(y);
  detail::check_finite(ux, "log_g_oracle");
  detail::check_finite(uy, "log_g_oracle");

  Point mx(model.d);
  Point my(model.d);
  detail::proposal_mean(spec, model, x, mx);
  detail::proposal_mean(spec, model, y, my);
  double forward = 0.0;   // |y - m(x)|^2
  double backward = 0.0;  // |x - m(y)|^2
  for (std::size_t i = 0; i < x.size(); ++i) {
    forward += (y[i] - mx[i]) * (y[i] - mx[i]);
    backward += (x[i] - my[i]) * (x[i] - my[i]);
  }
  const double two_var = 2.0 * spec.variance();
  const double log_ratio = -forward / two_var + backward / two_var;
  return (uy - ux) + log_ratio;
}

/// alpha = exp(-max(g, 0)).
inline double acceptance(double g) { return std::exp(-std::max(g, 0.0)); }

/// Gradient in x of F(x, w) = G(x, y(x, w)) with the noise offset w held fixed.
///
/// OU: y = (1 - h/2) x + w. Semi-implicit: y = x - (h/2) grad U(x) + w.
/// The semi-implicit formula needs the Hessian action of V.
inline Point grad_x_g(const ProposalSpec& spec, const TargetModel& model, ConstPoint x,
                      ConstPoint w) {
  require_dim(model.d, x.size(), "grad_x_g");
  require_dim(model.d, w.size(), "grad_x_g");
  const std::size_t d = model.d;
  const double h = spec.h();
  const Point gx = model.grad_V(x);
  detail::check_finite(gx, "grad_x_g");

  if (spec.kind() == ProposalKind::ou) {
    Point y(d);
    for (std::size_t i = 0; i < d; ++i) y[i] = (1.0 - 0.5 * h) * x[i] + w[i];
    const Point gy = model.grad_V(y);
    detail::check_finite(gy, "grad_x_g");
    Point out(d);
    for (std::size_t i = 0; i < d; ++i) {
      out[i] = (1.0 - 0.5 * h) * (gy[i] - gx[i]) - 0.5 * h * gx[i];
    }
    return out;
  }
  if (spec.kind() == ProposalKind::explicit_euler) {
    throw std::invalid_argument("grad_x_g: only OU and semi-implicit proposals are supported");
  }
  if (!model.has_hessian()) {
    throw std::logic_error("grad_x_g: semi-implicit gradient requires the Hessian action of V");
  }

  Point y(d);
  for (std::size_t i = 0; i < d; ++i) y[i] = x[i] - 0.5 * h * (x[i] + gx[i]) + w[i];
  const Point gy = model.grad_V(y);
  detail::check_finite(gy, "grad_x_g");

  Point dy(d);
  Point s(d);  // grad V(y) - grad V(x) + grad U(y) + grad U(x)
  for (std::size_t i = 0; i < d; ++i) {
    dy[i] = y[i] - x[i];
    s[i] = 2.0 * gy[i] + y[i] + x[i];
  }

  Point hy_dy(d), hx_dy(d), hy_s(d), hx_s(d), tmp(d);
  model.hess_V_apply(y, dy, hy_dy);
  model.hess_V_apply(x, dy, hx_dy);
  model.hess_V_apply(y, s, hy_s);
  model.hess_V_apply(x, s, hx_s);

  // (I + Hess V(x)) Hess V(y) v, using symmetry of both Hessians.
  auto chain = [&](const Point& hy_v, Point& out) {
    model.hess_V_apply(x, hy_v, tmp);
    for (std::size_t i = 0; i < d; ++i) out[i] = hy_v[i] + tmp[i];
  };
  Point chain_dy(d), chain_s(d);
  chain(hy_dy, chain_dy);
  chain(hy_s, chain_s);

  const double c1 = h / 4.0;
  const double c2 = h / (8.0 - 2.0 * h);
  const double c3 = h * h / (16.0 - 4.0 * h);
  Point out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = (gy[i] - gx[i]) - 0.5 * (hy_dy[i] + hx_dy[i]) + c1 * chain_dy[i] +
             c2 * (hy_s[i] - hx_s[i]) - c3 * chain_s[i];
  }
  return out;
}

}  // namespace mhc
