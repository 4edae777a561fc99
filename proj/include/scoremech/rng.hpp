#pragma once

#include <cstdint>
#include <random>

namespace scoremech {

// All randomness in the library flows through mt19937_64 plus this 53-bit
// uniform, so identical seeds give identical streams on every platform
// (std::uniform_real_distribution makes no such promise).
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
  return lo + uniform01(rng) * (hi - lo);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

}  // namespace scoremech
