#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mcc {

// All stochastic code draws from a caller-owned engine. mt19937_64 output is
// fixed by the standard; the helpers below avoid std::*_distribution so that
// sequences are identical across standard library implementations.
using Rng = std::mt19937_64;

// SplitMix64 finalizer, used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix_seed(mix_seed(mix_seed(seed) ^ a) ^ b);
}

// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on {0, ..., n-1}. Requires n > 0.
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  using u128 = unsigned __int128;
  return static_cast<std::size_t>((static_cast<u128>(rng()) * n) >> 64);
}

// Draws an index with probability proportional to weights[i]. Weights must be
// non-negative with a positive sum; zero-weight entries are never returned.
std::size_t sample_categorical(std::span<const double> weights, Rng& rng);

}  // namespace mcc
