#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace xsd {

/// Philox-4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Output is a pure function of (counter, key), which
/// lets every random draw be addressed by its coordinates instead of by the
/// order in which it happens to be consumed.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Combines a master seed with a tag sequence into an independent child seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

/// Addressable draws keyed by a 64-bit seed and a four-word counter.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  /// Uniform in the open interval (0, 1), 53 bits of resolution.
  double uniform(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) const;

  /// Standard normal via Box-Muller on the two 64-bit halves of one block.
  double normal(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

/// Sequential stream over a counter-based generator. Used where draws are
/// naturally consumed in order (shuffles), still fully determined by
/// (seed, stream id).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Unbiased integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 2;
};

/// Fisher-Yates shuffle driven by a RandomStream; identical across platforms
/// (std::shuffle is not).
template <class T>
void shuffle(std::span<T> items, RandomStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace xsd
