#pragma once

#include <array>
#include <cstdint>

#include "conecraft/common.hpp"

namespace conecraft {

// splitmix64 step; used for seeding and for deriving independent streams
// from (master seed, task index) pairs.
std::uint64_t splitmix64(std::uint64_t& state);

// Derives a child seed from a parent seed and a label. Chaining labels gives
// per-gate / per-sample streams that are stable under reordering of other
// work.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label);

// xoshiro256** with explicit, portable seeding. All randomness in the
// project flows through this generator so identical seeds give bit-identical
// results on any platform with IEEE doubles.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  // Uniform in [0, 1) with 53 bits of precision.
  double next_double();
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n);
  // Standard normal via Box-Muller (both values used, cached).
  double next_gaussian();
  // Standard complex normal: (gaussian + i*gaussian)/sqrt(2).
  cx next_complex_gaussian();

 private:
  std::array<std::uint64_t, 4> s_;
  double cached_gaussian_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace conecraft
