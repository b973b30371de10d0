#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace mhc {

/// splitmix64 finalizer, used to derive well-separated stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of the stream owned by chain/replica/block `index` of an experiment.
constexpr std::uint64_t stream_seed(std::uint64_t experiment_seed,
                                    std::uint64_t index) noexcept {
  return mix64(experiment_seed ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// A reproducible source of standard normals and open-interval uniforms.
///
/// A stream is owned by exactly one chain at a time. Independent chains get
/// disjoint streams through `RandomStream::derive`.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(mix64(seed)) {}

  static RandomStream derive(std::uint64_t experiment_seed, std::uint64_t index) {
    return RandomStream(stream_seed(experiment_seed, index));
  }

  double normal() { return normal_(engine_); }

  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal_(engine_);
  }

  /// Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double log_uniform() { return std::log(uniform()); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace mhc
