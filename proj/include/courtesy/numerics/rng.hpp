#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace courtesy::numerics {

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the C++ standard; every conversion to floats, bounded
// integers and permutations is done here rather than through std::*_distribution,
// whose algorithms differ between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream; the parent stream is not advanced.
  Rng fork(std::uint64_t stream_id) const { return Rng(splitmix(seed_ ^ splitmix(stream_id + 1))); }

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  // Index drawn from an unnormalized nonnegative weight vector.
  template <typename Weights>
  std::size_t categorical(const Weights& weights) {
    double total = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(weights.size()); ++i) total += weights[i];
    double target = uniform() * total;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < static_cast<std::size_t>(weights.size()); ++i) {
      if (weights[i] <= 0) continue;
      last_positive = i;
      target -= weights[i];
      if (target < 0) return i;
    }
    return last_positive;
  }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace courtesy::numerics
