#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace ocrsynth {

/// splitmix64 (Steele, Lea, Flood 2014). The stream is fully determined by the
/// 64-bit seed, so every language that implements the same constants
/// reproduces it bit for bit.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Top 53 bits of next_u64() scaled by 2^-53, i.e. next_u64 / 2^64 rounded
  /// down to double precision. Always in [0, 1).
  double next_float() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// next_u64() mod bound. bound must be positive.
  std::uint64_t next_below(std::uint64_t bound) { return next_u64() % bound; }

  bool bernoulli(double p) { return next_float() < p; }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

/// Seed for the index-th independent sub-stream (document, line) of `seed`:
/// the first output of splitmix64 seeded with seed XOR index.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64(seed ^ index).next_u64();
}

/// Fisher-Yates from the back: for i = n-1 .. 1 swap v[i] with v[next_below(i+1)].
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.next_below(i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace ocrsynth
