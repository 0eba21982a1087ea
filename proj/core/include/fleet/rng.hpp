#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fleet {

using Rng = std::mt19937_64;

// Independent named streams. Arrivals, policy sampling, minibatch shuffling
// and weight init each get their own stream so that one consumer can never
// perturb another's draws.
enum class Stream : std::uint32_t {
  kArrivals = 1,
  kPolicy = 2,
  kInit = 3,
  kShuffle = 4,
};

inline Rng make_rng(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                    std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

// SplitMix64 finaliser chain; turns (base, i, j, ...) into a well-mixed seed.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> parts) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (auto p : parts) h = mix(h ^ p);
  return h;
}

}  // namespace fleet
