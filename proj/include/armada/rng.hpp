#pragma once

#include <cmath>
#include <cstdint>

namespace armada {

/// Counter-based splittable generator built on the splitmix64 finalizer.
/// Every draw is output = mix(key, counter++), so identical (seed, call
/// sequence) pairs give identical streams on every platform, and split()
/// derives statistically independent child streams without sharing state.
/// Distribution code is hand-rolled (not <random>) so results do not depend
/// on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix64(seed ^ kGamma)) {}

  /// Independent child stream; deterministic in (parent key, stream id).
  Rng split(std::uint64_t stream) const {
    Rng child(0);
    child.key_ = mix64(key_ + kGamma * (stream + 1));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return mix64(key_ + kGamma * ++counter_); }

  /// Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal() {
    double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mu, double sigma) { return mu + sigma * normal(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace armada
