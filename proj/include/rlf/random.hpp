#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <boost/random/normal_distribution.hpp>

namespace rlf {

/**
 * Seeding scheme.
 *
 * A trial seed is derived from the run seed and the trial index with
 * trial_seed(). Each trial then draws every random object from its own
 * sub-stream: an mt19937_64 seeded by std::seed_seq{lo32(seed), hi32(seed),
 * stream id}. Normals come from boost::random::normal_distribution (ziggurat),
 * whose output is specified by the implementation rather than the standard
 * library vendor, so draws match across platforms.
 */
enum class Stream : std::uint32_t {
  Beta = 1,
  W = 2,
  X1 = 3,
  Eps1 = 4,
  X2 = 5,
  Eps2 = 6,
  XTest = 7,
  EpsTest = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// splitmix64(splitmix64(seed0) + trial); distinct trials give distinct seeds.
inline std::uint64_t trial_seed(std::uint64_t seed0, std::uint64_t trial) {
  return splitmix64(splitmix64(seed0) + trial);
}

inline std::mt19937_64 stream_engine(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

/// Fills [first, first + n) with N(0, variance) draws in order.
inline void fill_normal(double* first, std::size_t n, double variance, std::mt19937_64& eng) {
  boost::random::normal_distribution<double> dist(0.0, std::sqrt(variance));
  for (std::size_t i = 0; i < n; ++i) first[i] = dist(eng);
}

}  // namespace rlf
