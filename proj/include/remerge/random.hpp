// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

#include "remerge/state.hpp"

namespace remerge {

/// Deterministic random stream. Parallel callers derive independent streams
/// with derive(seed, index); results then depend only on (seed, index), not
/// on scheduling.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : RandomStream(seed, 0) {}

  /// Splitting rule: mt19937_64 seeded from the 32-bit words of (seed, index)
  /// plus a fixed salt, via std::seed_seq.
  static RandomStream derive(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(seed, index);
  }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  RandomStream(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
        0x9e3779b9u};
    engine_.seed(seq);
  }

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Haar-distributed unitary: complex Ginibre matrix, QR decomposition, then Q
/// rescaled by the phases of R's diagonal so the distribution is exactly Haar.
Unitary haar_unitary(std::int64_t dim, RandomStream& rng);

/// Haar-random pure state over the layout (normalized Ginibre vector).
PureState random_pure_state(SystemLayout layout, RandomStream& rng);

}  // namespace remerge
