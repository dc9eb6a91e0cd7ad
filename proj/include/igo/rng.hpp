// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>

namespace igo {

using Rng = std::mt19937_64;

/// Seed for worker / case `index` of a run seeded with `master`.
/// splitmix64(master + (index + 1) * golden); the same rule is used by every
/// parallel loop in the library so results never depend on scheduling.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Uniform double in [0, 1) from the top 53 bits of one engine draw.
/// Unlike std::uniform_real_distribution the mapping is fixed, so tables
/// built from it are identical across standard libraries.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace igo
