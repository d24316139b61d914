#pragma once

#include <array>
#include <cstdint>

namespace pursuitlab {

/// splitmix64 output function applied to a single 64-bit word.
std::uint64_t mix64(std::uint64_t z) noexcept;

/// Seed of a child stream. Fixed mixing so that any schedule over
/// (trial, cell) pairs draws identical numbers:
///   h = mix64(master + 0x9e3779b97f4a7c15)
///   h = mix64(h ^ trial_index)
///   h = mix64(h ^ (cell_index + 0xd1b54a32d192ed03))
std::uint64_t hash64(std::uint64_t master_seed, std::uint64_t trial_index,
                     std::uint64_t cell_index) noexcept;

/// xoshiro256** generator, state filled from the seed by four splitmix64
/// steps. Gaussians use the Marsaglia polar method and cache the second
/// variate of each accepted pair.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  static Rng child(std::uint64_t master_seed, std::uint64_t trial_index,
                   std::uint64_t cell_index) noexcept {
    return Rng(hash64(master_seed, trial_index, cell_index));
  }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [-1, 1).
  double uniform_symmetric() noexcept { return 2.0 * uniform() - 1.0; }
  /// Uniform integer in [0, bound), rejection-sampled, bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  double normal() noexcept;

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace pursuitlab
