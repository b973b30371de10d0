#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mhc {

using Point = std::vector<double>;
using ConstPoint = std::span<const double>;

inline void require_dim(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " +
                                std::to_string(actual) + ")");
  }
}

/// Diagonal inner-product norm pair.
///
/// `minus` is (sum g_i x_i^2)^{1/2} with weights g_i in (0, 1], so it is
/// dominated by the Euclidean norm; `plus` is its dual,
/// (sum x_i^2 / g_i)^{1/2}, which dominates it.
class NormSpace {
 public:
  NormSpace() = default;

  /// Euclidean norm in dimension d.
  explicit NormSpace(std::size_t d) : weights_(d, 1.0) {}

  explicit NormSpace(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw std::invalid_argument("NormSpace: empty weight vector");
    for (double g : weights_) {
      if (!(g > 0.0 && g <= 1.0)) {
        throw std::invalid_argument("NormSpace: weights must lie in (0, 1]");
      }
    }
  }

  std::size_t dim() const { return weights_.size(); }
  std::span<const double> weights() const { return weights_; }

  bool is_euclidean() const {
    for (double g : weights_)
      if (g != 1.0) return false;
    return true;
  }

  double inner(ConstPoint x, ConstPoint y) const {
    require_dim(dim(), x.size(), "NormSpace::inner");
    require_dim(dim(), y.size(), "NormSpace::inner");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += weights_[i] * x[i] * y[i];
    return s;
  }

  double minus_squared(ConstPoint x) const { return inner(x, x); }
  double minus(ConstPoint x) const { return std::sqrt(minus_squared(x)); }

  double plus(ConstPoint x) const {
    require_dim(dim(), x.size(), "NormSpace::plus");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * x[i] / weights_[i];
    return std::sqrt(s);
  }

  double euclidean(ConstPoint x) const {
    require_dim(dim(), x.size(), "NormSpace::euclidean");
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
  }

  /// ||x - y||_-, without allocating.
  double minus_distance(ConstPoint x, ConstPoint y) const {
    require_dim(dim(), x.size(), "NormSpace::minus_distance");
    require_dim(dim(), y.size(), "NormSpace::minus_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = x[i] - y[i];
      s += weights_[i] * diff * diff;
    }
    return std::sqrt(s);
  }

 private:
  std::vector<double> weights_;
};

enum class NormKind { minus, plus, euclidean };

inline double norm_eval(const NormSpace& space, ConstPoint x, NormKind which) {
  switch (which) {
    case NormKind::minus: return space.minus(x);
    case NormKind::plus: return space.plus(x);
    case NormKind::euclidean: return space.euclidean(x);
  }
  throw std::invalid_argument("norm_eval: unknown norm kind");
}

inline double dot(ConstPoint x, ConstPoint y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double squared_norm(ConstPoint x) { return dot(x, x); }

}  // namespace mhc
