#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nmc/measure.hpp"

namespace nmc {

/// SplitMix64 step; used to whiten seeds for per-trajectory streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Uniform double in [0,1) from 53 random bits. Fixed mapping keeps
/// sequences identical across standard library implementations.
inline double canonical_double(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Master seed plus a deterministic per-trajectory stream derivation.
/// Equal (policy, parameters) runs produce bit-identical sequences no
/// matter how trajectories are scheduled across threads.
struct RngPolicy {
  std::uint64_t master_seed = 0;

  std::mt19937_64 stream(std::uint64_t index) const {
    // single-seed construction is fully specified by the standard and cheap
    // enough to afford one fresh engine per trajectory
    std::uint64_t s = master_seed ^ (0x9E3779B97F4A7C15ULL * (index + 1));
    return std::mt19937_64(splitmix64(s));
  }
};

/// Inverse-CDF draw from a probability row. Falls back to the last
/// positive-probability index if rounding pushes u past the total.
int sample_index(std::span<const double> row, double u);

/// Uniform point on the probability simplex (normalized exponentials).
MeasureVector random_simplex_point(int d, std::mt19937_64& eng);

}  // namespace nmc
