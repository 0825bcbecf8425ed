#pragma once

#include <algorithm>
#include <cstdint>
#include <random>

namespace bayes_epi {

/// 64-bit mix of two words (splitmix64 finalizer over a combined key).
std::uint64_t mix_stream(std::uint64_t a, std::uint64_t b);

/// Seeded random stream. Identical (seed, stream_id) pairs produce identical
/// draw sequences; substreams derive new stream ids deterministically so
/// consumers can be reordered without changing any draw.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  RngStream substream(std::uint64_t k) const { return {seed_, mix_stream(stream_id_, k)}; }

  double uniform();
  double normal();
  double exponential(double rate);
  bool bernoulli(double p) { return uniform() < p; }

  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    std::shuffle(first, last, engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace bayes_epi
