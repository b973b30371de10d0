#pragma once

// Transition-path-sampling target: Schauder (Wiener-Levy) coefficients of a
// polygonal bridge path, a quadrature of phi = |grad H|^2 - Laplacian H along
// the path, and the level-weighted alpha norms.

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mhc/model.hpp"

namespace mhc {

/// Dyadic grid of 2^m + 1 nodes, ell coordinates per node and fixed endpoints.
struct TPSGeometry {
  int m = 1;
  std::size_t ell = 1;
  std::vector<double> a;
  std::vector<double> b;

  std::size_t intervals() const { return std::size_t{1} << m; }
  std::size_t nodes() const { return intervals() + 1; }
  std::size_t dim() const { return (intervals() - 1) * ell; }
  /// Position of coefficient (n, k, i).
  std::size_t coeff_index(int n, std::size_t k, std::size_t i) const {
    return (((std::size_t{1} << n) - 1) + k) * ell + i;
  }

  void validate() const {
    if (m < 1 || m > 24) throw std::invalid_argument("TPSGeometry: m must lie in [1, 24]");
    if (ell < 1) throw std::invalid_argument("TPSGeometry: ell must be >= 1");
    require_dim(ell, a.size(), "TPSGeometry endpoint a");
    require_dim(ell, b.size(), "TPSGeometry endpoint b");
  }
};

namespace tps_detail {

/// Level-n midpoint scale 2^{-n/2} g(1/2) = 2^{-n/2} / 2.
inline double level_scale(int n) { return 0.5 * std::exp2(-0.5 * n); }

/// Midpoint displacement with zero endpoints; `path` holds nodes * ell values.
inline void coeffs_to_path_linear(const TPSGeometry& g, ConstPoint x, std::span<double> path) {
  const std::size_t N = g.intervals();
  const std::size_t ell = g.ell;
  for (int n = 0; n < g.m; ++n) {
    const std::size_t step = N >> n;
    const double s = level_scale(n);
    for (std::size_t k = 0; k < (std::size_t{1} << n); ++k) {
      const std::size_t l = k * step;
      const std::size_t r = l + step;
      const std::size_t mid = l + step / 2;
      for (std::size_t i = 0; i < ell; ++i) {
        path[mid * ell + i] = 0.5 * (path[l * ell + i] + path[r * ell + i]) + s * x[g.coeff_index(n, k, i)];
      }
    }
  }
}

}  // namespace tps_detail

/// Path values y at all dyadic nodes, endpoints included. Node j, coordinate i
/// is stored at j * ell + i.
inline Point schauder_to_path(const TPSGeometry& g, ConstPoint coeffs) {
  g.validate();
  require_dim(g.dim(), coeffs.size(), "schauder_to_path");
  const std::size_t N = g.intervals();
  Point path(g.nodes() * g.ell, 0.0);
  for (std::size_t i = 0; i < g.ell; ++i) {
    path[i] = g.a[i];
    path[N * g.ell + i] = g.b[i];
  }
  tps_detail::coeffs_to_path_linear(g, coeffs, path);
  return path;
}

/// Inverse of schauder_to_path given the interior node values (nodes 1..N-1).
inline Point schauder_to_coeffs(const TPSGeometry& g, ConstPoint interior) {
  g.validate();
  require_dim(g.dim(), interior.size(), "schauder_to_coeffs");
  const std::size_t N = g.intervals();
  const std::size_t ell = g.ell;
  auto node = [&](std::size_t j, std::size_t i) {
    if (j == 0) return g.a[i];
    if (j == N) return g.b[i];
    return interior[(j - 1) * ell + i];
  };
  Point x(g.dim());
  for (int n = 0; n < g.m; ++n) {
    const std::size_t step = N >> n;
    const double inv = 1.0 / tps_detail::level_scale(n);
    for (std::size_t k = 0; k < (std::size_t{1} << n); ++k) {
      const std::size_t l = k * step;
      const std::size_t r = l + step;
      const std::size_t mid = l + step / 2;
      for (std::size_t i = 0; i < ell; ++i) {
        x[g.coeff_index(n, k, i)] = (node(mid, i) - 0.5 * (node(l, i) + node(r, i))) * inv;
      }
    }
  }
  return x;
}

/// Transpose of the linear part of schauder_to_path: maps a covector on all
/// nodes to a covector on the coefficients. Endpoint entries are ignored.
inline Point schauder_adjoint(const TPSGeometry& g, ConstPoint path_covector) {
  g.validate();
  require_dim(g.nodes() * g.ell, path_covector.size(), "schauder_adjoint");
  const std::size_t N = g.intervals();
  const std::size_t ell = g.ell;
  Point acc(path_covector.begin(), path_covector.end());
  Point x(g.dim(), 0.0);
  for (int n = g.m - 1; n >= 0; --n) {
    const std::size_t step = N >> n;
    const double s = tps_detail::level_scale(n);
    for (std::size_t k = 0; k < (std::size_t{1} << n); ++k) {
      const std::size_t l = k * step;
      const std::size_t r = l + step;
      const std::size_t mid = l + step / 2;
      for (std::size_t i = 0; i < ell; ++i) {
        const double gm = acc[mid * ell + i];
        x[g.coeff_index(n, k, i)] = s * gm;
        acc[l * ell + i] += 0.5 * gm;
        acc[r * ell + i] += 0.5 * gm;
      }
    }
  }
  return x;
}

/// Per-coordinate potential h with H(z) = sum_i h(z_i). Derivatives d1..d3
/// are required; d4 enables the Hessian action.
struct HSpec {
  std::string name = "custom";
  std::function<double(double)> d1, d2, d3, d4;

  static HSpec zero() {
    auto z = [](double) { return 0.0; };
    return {"zero", z, z, z, z};
  }
  /// h(s) = c s.
  static HSpec linear(double c = 1.0) {
    auto z = [](double) { return 0.0; };
    return {"linear", [c](double) { return c; }, z, z, z};
  }
  /// h(s) = kappa s^2 / 2.
  static HSpec quadratic(double kappa = 1.0) {
    auto z = [](double) { return 0.0; };
    return {"quadratic", [kappa](double s) { return kappa * s; }, [kappa](double) { return kappa; }, z, z};
  }
  /// h(s) = (s^2 - 1)^2 / 4.
  static HSpec double_well() {
    return {"double_well", [](double s) { return s * s * s - s; }, [](double s) { return 3.0 * s * s - 1.0; },
            [](double s) { return 6.0 * s; }, [](double) { return 6.0; }};
  }

  void validate() const {
    if (!d1 || !d2 || !d3) {
      throw std::invalid_argument("HSpec '" + name + "': derivatives of order 1..3 are required");
    }
  }

  /// phi = h'^2 - h'' and its first two derivatives, per coordinate.
  double phi(double s) const {
    const double a = d1(s);
    return a * a - d2(s);
  }
  double dphi(double s) const { return 2.0 * d1(s) * d2(s) - d3(s); }
  double ddphi(double s) const {
    const double b = d2(s);
    return 2.0 * b * b + 2.0 * d1(s) * d3(s) - d4(s);
  }
};

struct TPSModel {
  TPSGeometry geometry;
  HSpec h;
  double alpha = 0.6;
  TargetModel model;
  /// Set when alpha lies outside (1/2, 1/2 + 1/q).
  std::optional<std::string> warning;
};

/// Quadrature weight of node j: 1/2 at both endpoints, 1 inside.
inline double tps_node_weight(const TPSGeometry& g, std::size_t j) {
  return (j == 0 || j == g.intervals()) ? 0.5 : 1.0;
}

/// Level weights 2^{-2 alpha n}, repeated over (k, i).
inline std::vector<double> alpha_norm_weights(const TPSGeometry& g, double alpha) {
  std::vector<double> w(g.dim());
  for (int n = 0; n < g.m; ++n) {
    const double wn = std::exp2(-2.0 * alpha * n);
    for (std::size_t k = 0; k < (std::size_t{1} << n); ++k)
      for (std::size_t i = 0; i < g.ell; ++i) w[g.coeff_index(n, k, i)] = wn;
  }
  return w;
}

/// `q` is the integrability exponent fixing the recommended alpha window.
inline TPSModel make_tps_model(TPSGeometry geometry, HSpec h, double alpha = 0.6, double q = 8.0) {
  geometry.validate();
  h.validate();
  if (!(alpha >= 0.0)) throw std::invalid_argument("make_tps_model: alpha must be >= 0");

  TPSModel t;
  t.geometry = geometry;
  t.h = h;
  t.alpha = alpha;
  if (!(alpha > 0.5 && alpha < 0.5 + 1.0 / q)) {
    t.warning = "alpha = " + std::to_string(alpha) + " lies outside (1/2, 1/2 + 1/q) with q = " +
                std::to_string(q) + "; dimension-free constants are not expected";
  }

  auto g = std::make_shared<const TPSGeometry>(geometry);
  auto hs = std::make_shared<const HSpec>(h);
  const double scale = std::exp2(-geometry.m - 1);

  TargetModel& m = t.model;
  m.d = geometry.dim();
  m.value = [g, hs, scale](ConstPoint x) {
    const Point y = schauder_to_path(*g, x);
    double s = 0.0;
    for (std::size_t j = 0; j < g->nodes(); ++j) {
      double node = 0.0;
      for (std::size_t i = 0; i < g->ell; ++i) node += hs->phi(y[j * g->ell + i]);
      s += tps_node_weight(*g, j) * node;
    }
    return scale * s;
  };
  m.gradient = [g, hs, scale](ConstPoint x, std::span<double> out) {
    const Point y = schauder_to_path(*g, x);
    Point cov(y.size());
    for (std::size_t j = 0; j < g->nodes(); ++j)
      for (std::size_t i = 0; i < g->ell; ++i)
        cov[j * g->ell + i] = scale * tps_node_weight(*g, j) * hs->dphi(y[j * g->ell + i]);
    const Point gx = schauder_adjoint(*g, cov);
    std::copy(gx.begin(), gx.end(), out.begin());
  };
  if (h.d4) {
    m.hessian_apply = [g, hs, scale](ConstPoint x, ConstPoint eta, std::span<double> out) {
      const Point y = schauder_to_path(*g, x);
      Point e(y.size(), 0.0);
      tps_detail::coeffs_to_path_linear(*g, eta, e);
      for (std::size_t j = 0; j < g->nodes(); ++j)
        for (std::size_t i = 0; i < g->ell; ++i) {
          const std::size_t p = j * g->ell + i;
          e[p] *= scale * tps_node_weight(*g, j) * hs->ddphi(y[p]);
        }
      const Point hx = schauder_adjoint(*g, e);
      std::copy(hx.begin(), hx.end(), out.begin());
    };
  }
  m.norm = NormSpace(alpha_norm_weights(geometry, alpha));
  m.name = "tps_" + h.name;
  return t;
}

inline TPSModel make_double_well_tps(int m, double alpha = 0.6) {
  return make_tps_model(TPSGeometry{m, 1, {0.0}, {0.0}}, HSpec::double_well(), alpha);
}

/// Directional derivative of V_d evaluated node by node on the polygonal
/// paths of x and xi, without the adjoint transform. Used as a cross-check.
inline double tps_directional_derivative(const TPSModel& t, ConstPoint x, ConstPoint xi) {
  const TPSGeometry& g = t.geometry;
  require_dim(g.dim(), xi.size(), "tps_directional_derivative");
  const Point y = schauder_to_path(g, x);
  Point eta(y.size(), 0.0);
  tps_detail::coeffs_to_path_linear(g, xi, eta);
  double s = 0.0;
  for (std::size_t j = 0; j < g.nodes(); ++j)
    for (std::size_t i = 0; i < g.ell; ++i) {
      const std::size_t p = j * g.ell + i;
      s += tps_node_weight(g, j) * t.h.dphi(y[p]) * eta[p];
    }
  return std::exp2(-g.m - 1) * s;
}

}  // namespace mhc
