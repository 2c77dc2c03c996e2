#pragma once

// Counter-based random streams: every variate is a pure hash of
// (seed, theta_index, rep_index, lane, draw_position), so simulation output
// is bitwise reproducible for any thread count or evaluation order.
//
// Lane semantics: lane 0 is the shared common-random-numbers lane; when a
// sweep runs with independent draws per estimator, each estimator uses
// lane = ordinal(estimator) + 1. The draw position of each variate within a
// replication is fixed (0, 1 = stage-1 arm means; 2 = stage-2 mean), so
// common-random-numbers comparisons remain valid under selection.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace dtl {

struct StreamKey {
  std::uint64_t seed = 0;
  std::uint64_t theta_index = 0;
  std::uint64_t rep_index = 0;
  std::uint64_t lane = 0;
};

namespace detail {

// SplitMix64 finalizer; full-avalanche mixing of one 64-bit word.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_counter(const StreamKey& key, std::uint64_t draw) {
  std::uint64_t h = mix64(key.seed);
  h = mix64(h ^ key.theta_index);
  h = mix64(h ^ key.rep_index);
  h = mix64(h ^ key.lane);
  h = mix64(h ^ draw);
  return h;
}

}  // namespace detail

// Uniform variate in the open interval (0, 1): 53 random mantissa bits
// centered in their bucket, so 0 and 1 are never produced.
inline double uniform_at(const StreamKey& key, std::uint64_t draw) {
  const std::uint64_t h = detail::hash_counter(key, draw);
  return static_cast<double>(h >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

// Standard normal variate at a semantic draw position; consumes two hashed
// uniforms (Box-Muller, cosine branch).
inline double normal_at(const StreamKey& key, std::uint64_t position) {
  const double u1 = uniform_at(key, 2 * position);
  const double u2 = uniform_at(key, 2 * position + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace dtl
