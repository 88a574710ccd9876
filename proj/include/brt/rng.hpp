#pragma once

#include <cstdint>

namespace brt {

// Counter-based uniform generator built on SplitMix64 finalizers.
// Every draw is a pure function of (seed, stream, counter), so disturbance
// streams are stable across platforms and independent of evaluation order.

inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t keyed_hash(std::uint64_t seed, std::uint64_t stream,
                                std::uint64_t counter) {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter);
}

// Uniform in [0, 1) with 53 bits of mantissa.
inline double uniform01(std::uint64_t seed, std::uint64_t stream,
                        std::uint64_t counter) {
  return static_cast<double>(keyed_hash(seed, stream, counter) >> 11) *
         0x1.0p-53;
}

}  // namespace brt
