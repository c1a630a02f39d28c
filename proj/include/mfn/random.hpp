// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <cstdint>
#include <cstddef>
#include <span>

namespace mfn {

/// splitmix64 step; used for seeding and for deriving child seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Combines a parent seed with a stream index into an independent child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// xoshiro256** generator seeded through splitmix64.
///
/// All distributions below are implemented here rather than through
/// <random> distributions, whose output is implementation-defined. Results
/// are therefore identical across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via the Box-Muller transform (one draw per call, the
  /// sine branch is discarded so the stream position is easy to reason about).
  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace mfn
