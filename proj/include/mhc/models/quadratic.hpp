#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mhc/bounds.hpp"
#include "mhc/model.hpp"

namespace mhc {

/// Exact constants of V(x) = (1/2) sum b_i x_i^2.
struct QuadraticConstants {
  /// 1 + min b_i, absent when not positive.
  std::optional<double> k_raw;
  /// k_raw capped at 1 for use in the bound calculators.
  std::optional<double> k_capped;
  double M = 0.0;  ///< max |1 + b_i|
  double N = 0.0;  ///< max |b_i|
  double C2 = 0.0; ///< max |b_i|
};

struct QuadraticModel {
  TargetModel model;
  std::vector<double> b;
  QuadraticConstants constants;

  /// BoundInputs with K, M, N, C1..C4 and p filled exactly; moments are the
  /// Euclidean chi moments for n = 1..4.
  BoundInputs bound_inputs(double R, double h) const {
    BoundInputs in;
    in.K = constants.k_capped;
    in.M_R = constants.M;
    in.N_R = constants.N;
    in.C = {0.0, constants.C2, 0.0, 0.0};
    in.p = {0, 0, 0, 0};
    for (int n = 1; n <= 4; ++n) in.moments[n] = euclidean_norm_moment(model.d, n);
    in.R = R;
    in.h = h;
    return in;
  }
};

inline QuadraticModel make_quadratic_model(std::vector<double> b) {
  if (b.empty()) throw std::invalid_argument("make_quadratic_model: b must be nonempty");
  for (double v : b)
    if (!std::isfinite(v)) throw std::invalid_argument("make_quadratic_model: b must be finite");

  QuadraticModel q;
  q.b = b;
  const double bmin = *std::min_element(b.begin(), b.end());
  if (1.0 + bmin > 0.0) {
    q.constants.k_raw = 1.0 + bmin;
    q.constants.k_capped = std::min(1.0, 1.0 + bmin);
  }
  for (double v : b) {
    q.constants.M = std::max(q.constants.M, std::abs(1.0 + v));
    q.constants.N = std::max(q.constants.N, std::abs(v));
  }
  q.constants.C2 = q.constants.N;

  TargetModel& m = q.model;
  m.d = b.size();
  m.value = [b](ConstPoint x) {
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += b[i] * x[i] * x[i];
    return 0.5 * s;
  };
  m.gradient = [b](ConstPoint x, std::span<double> out) {
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = b[i] * x[i];
  };
  m.hessian_apply = [b](ConstPoint, ConstPoint eta, std::span<double> out) {
    for (std::size_t i = 0; i < b.size(); ++i) out[i] = b[i] * eta[i];
  };
  m.norm = NormSpace(b.size());
  SmoothnessConstants sc;
  sc.c = {0.0, q.constants.C2, 0.0, 0.0};
  sc.k_convexity = q.constants.k_capped;
  m.constants = sc;
  m.name = "quadratic";
  return q;
}

inline QuadraticModel make_quadratic_model(std::size_t d, double b) {
  return make_quadratic_model(std::vector<double>(d, b));
}

/// Stationary variance of coordinate i: 1 / (1 + b_i).
inline double quadratic_stationary_variance(double b) {
  if (!(1.0 + b > 0.0)) throw std::invalid_argument("quadratic_stationary_variance: 1 + b must be > 0");
  return 1.0 / (1.0 + b);
}

}  // namespace mhc
