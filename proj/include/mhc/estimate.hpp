#pragma once

#include <cmath>
#include <cstddef>

namespace mhc {

/// Monte Carlo mean with its standard error.
struct EstimateWithError {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;

  double upper(double sigmas = 3.0) const { return value + sigmas * std_error; }
  double lower(double sigmas = 3.0) const { return value - sigmas * std_error; }
};

/// Welford accumulator. `merge` combines partial sums in a fixed order so
/// block-parallel reductions stay bit-stable.
class RunningMoments {
 public:
  void add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }

  void merge(const RunningMoments& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double n = static_cast<double>(n_ + o.n_);
    const double delta = o.mean_ - mean_;
    mean_ += delta * static_cast<double>(o.n_) / n;
    m2_ += o.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
    n_ += o.n_;
  }

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

  EstimateWithError estimate() const {
    EstimateWithError e;
    e.value = mean_;
    e.n_samples = n_;
    e.std_error = n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    return e;
  }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

}  // namespace mhc
