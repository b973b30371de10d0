#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "mhc/norm.hpp"

namespace mhc {

/// Polynomial growth constants for the first four derivatives of V, measured
/// against the minus norm: |d^n V(x)[xi...]| <= C_n max(1,||x||_-)^{p_n} prod ||xi||_-.
struct SmoothnessConstants {
  std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};
  std::array<int, 4> p{0, 0, 0, 0};
  /// Lower curvature bound of U in the minus inner product, in (0, 1].
  std::optional<double> k_convexity;

  void validate() const {
    for (double v : c)
      if (!(v >= 0.0)) throw std::invalid_argument("SmoothnessConstants: C_n must be >= 0");
    for (int v : p)
      if (v < 0) throw std::invalid_argument("SmoothnessConstants: p_n must be >= 0");
    if (k_convexity && !(*k_convexity > 0.0 && *k_convexity <= 1.0)) {
      throw std::invalid_argument("SmoothnessConstants: K must lie in (0, 1]");
    }
  }
};

/// Target mu proportional to exp(-|x|^2/2 - V(x)).
///
/// The perturbation V is supplied as callables. `hessian_apply(x, eta, out)`
/// writes Hess V(x) * eta and may be left empty; operations needing it then
/// fail instead of falling back to finite differences.
struct TargetModel {
  using Value = std::function<double(ConstPoint)>;
  using Gradient = std::function<void(ConstPoint, std::span<double>)>;
  using HessianApply = std::function<void(ConstPoint, ConstPoint, std::span<double>)>;

  std::size_t d = 0;
  Value value;
  Gradient gradient;
  HessianApply hessian_apply;
  NormSpace norm;
  std::optional<SmoothnessConstants> constants;
  std::string name;

  bool has_hessian() const { return static_cast<bool>(hessian_apply); }

  double V(ConstPoint x) const {
    require_dim(d, x.size(), "TargetModel::V");
    return value(x);
  }

  /// U(x) = |x|^2/2 + V(x).
  double U(ConstPoint x) const { return 0.5 * squared_norm(x) + V(x); }

  void grad_V(ConstPoint x, std::span<double> out) const {
    require_dim(d, x.size(), "TargetModel::grad_V");
    require_dim(d, out.size(), "TargetModel::grad_V");
    gradient(x, out);
  }

  Point grad_V(ConstPoint x) const {
    Point out(d);
    grad_V(x, out);
    return out;
  }

  void hess_V_apply(ConstPoint x, ConstPoint eta, std::span<double> out) const {
    if (!has_hessian()) {
      throw std::logic_error("TargetModel '" + name + "': Hessian action is not available");
    }
    require_dim(d, x.size(), "TargetModel::hess_V_apply");
    require_dim(d, eta.size(), "TargetModel::hess_V_apply");
    require_dim(d, out.size(), "TargetModel::hess_V_apply");
    hessian_apply(x, eta, out);
  }
};

inline bool all_finite(ConstPoint x) {
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return true;
}

/// grad U(x) = x + grad V(x).
inline Point grad_U(const TargetModel& model, ConstPoint x) {
  Point g = model.grad_V(x);
  if (!all_finite(g)) throw std::domain_error("grad_U: non-finite gradient of V");
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += x[i];
  return g;
}

/// V identically zero in dimension d: mu is the standard normal.
inline TargetModel make_gaussian_model(std::size_t d) {
  TargetModel m;
  m.d = d;
  m.value = [](ConstPoint) { return 0.0; };
  m.gradient = [](ConstPoint, std::span<double> out) {
    for (double& v : out) v = 0.0;
  };
  m.hessian_apply = [](ConstPoint, ConstPoint, std::span<double> out) {
    for (double& v : out) v = 0.0;
  };
  m.norm = NormSpace(d);
  m.constants = SmoothnessConstants{{0, 0, 0, 0}, {0, 0, 0, 0}, 1.0};
  m.name = "gaussian";
  return m;
}

}  // namespace mhc
