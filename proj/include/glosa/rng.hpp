#ifndef GLOSA_RNG_HPP
#define GLOSA_RNG_HPP

#include <cstdint>
#include <random>

namespace glosa {

// splitmix64 finalizer; used to derive independent sub-streams from
// (seed, counter...) tuples so Monte Carlo replicates are order-independent.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return mix64(mix64(mix64(seed) ^ a) ^ b);
}

// Thin deterministic wrapper around mt19937_64. Distributions are constructed
// per call so the draw stream depends only on the engine state, not on
// distribution-object carryover.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  double normal(double mean, double stddev) {
    return std::normal_distribution<double>(mean, stddev)(eng_);
  }
  std::uint64_t next_u64() { return eng_(); }

  std::mt19937_64& engine() { return eng_; }

private:
  std::mt19937_64 eng_;
};

} // namespace glosa

#endif
