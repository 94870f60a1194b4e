#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace signpose {

// Deterministic random stream. All distributions are implemented on top of
// the raw mt19937_64 output so that a given seed produces the same values on
// every standard library / platform. Do not use std::*_distribution here:
// their output is implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform();
  // Uniform in [lo, hi).
  double uniform(double lo, double hi);
  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
  // Standard normal via Box-Muller (stateless across calls: draws two
  // uniforms every call, second value discarded).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  // Sample k distinct indices from [0, n), returned in increasing order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derived child stream; deterministic function of this stream's seed path.
  RandomStream fork(std::uint64_t tag) { return RandomStream(mix(next_u64(), tag)); }

  // Stable 64-bit mixing of (seed, tag) pairs, used to derive independent
  // substreams, e.g. per-sample corruption seeds.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);
  static std::uint64_t hash_string(std::string_view s);

 private:
  std::mt19937_64 engine_;
};

// Convenience: derive a seed for a named purpose from a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose, std::uint64_t index = 0);

}  // namespace signpose
