#pragma once

#include "lcb/core.hpp"

#include <cstdint>
#include <initializer_list>
#include <random>

namespace lcb {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a stream seed from a base seed and a sequence of tags
/// (component id, round, chain index, ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t s = mix64(base);
  for (auto t : tags) s = mix64(s ^ mix64(t + 0x632be59bd9b4e019ULL));
  return s;
}

// Stream tags, so that every component owns its own generator.
namespace stream {
inline constexpr std::uint64_t kContexts = 1;
inline constexpr std::uint64_t kFeedback = 2;
inline constexpr std::uint64_t kAdversary = 3;
inline constexpr std::uint64_t kLearner = 4;
inline constexpr std::uint64_t kSampler = 5;
inline constexpr std::uint64_t kReduction = 6;
inline constexpr std::uint64_t kSimulator = 7;
inline constexpr std::uint64_t kProbe = 8;
}  // namespace stream

/// Uniform draw in the open interval (0, 1).
inline double uniform_open(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  while (x <= 0.0) x = u(rng);
  return x;
}

inline Vector gaussian_vector(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

/// Uniformly distributed direction on the unit sphere in R^n (n >= 1).
inline Vector random_unit_vector(Rng& rng, Eigen::Index n) {
  Vector v = gaussian_vector(rng, n);
  double norm = v.norm();
  while (norm < 1e-300) {
    v = gaussian_vector(rng, n);
    norm = v.norm();
  }
  return v / norm;
}

}  // namespace lcb
