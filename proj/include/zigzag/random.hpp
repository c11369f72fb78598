#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

namespace zigzag {

/// SplitMix64 output function. Used only for seed derivation, never as the
/// simulation stream itself.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of stream `stream` under master seed `master`.
///
/// Stream k is seeded with splitmix64(splitmix64(master) + (k + 1) * phi64),
/// where phi64 is the 64-bit golden-ratio increment. Trajectory k of a run
/// always uses stream k, so results do not depend on how trajectories are
/// scheduled across threads. Nested derivations (a check that runs its own
/// ensembles) apply the rule twice.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(master) + 0x9e3779b97f4a7c15ULL * (stream + 1));
}

/// Per-trajectory random stream: a 64-bit Mersenne twister plus the handful
/// of variates the samplers need. Satisfies UniformRandomBitGenerator so the
/// standard distributions can draw from it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(splitmix64(seed)),
                      static_cast<std::uint32_t>(splitmix64(seed) >> 32)};
    engine_.seed(seq);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard exponential, strictly positive.
  double exponential() { return -std::log(uniform()); }

  /// Exponential with the given rate; +inf when rate is zero.
  double exponential(double rate) {
    if (rate <= 0.0) return std::numeric_limits<double>::infinity();
    return exponential() / rate;
  }

  double normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace zigzag
