#pragma once

#include <cstdint>
#include <random>

namespace homog {

using Rng = std::mt19937_64;

/// Independent generator for (seed, stream, substream). Streams derived from
/// different tuples are statistically independent for all practical purposes.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t substream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(substream),
                    static_cast<std::uint32_t>(substream >> 32)};
  return Rng(seq);
}

/// Uniform on [0,1).
inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

/// Uniform on (0,1].
inline double uniform_open_closed(Rng& rng) { return 1.0 - uniform01(rng); }

}  // namespace homog
