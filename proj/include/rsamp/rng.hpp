#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace rsamp {

// xoshiro256** seeded through SplitMix64 (Blackman & Vigna). The output
// stream depends only on the 64-bit seed, never on the platform's <random>
// implementation or on system entropy. Single owner: do not share one
// instance between concurrent tasks, fork() independent streams instead.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next_u64() noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double uniform01() noexcept;
  // Uniform integer in [0, bound) by rejection; bound must be > 0.
  std::uint64_t uniform_below(std::uint64_t bound);
  // Standard normal via Box-Muller; the second variate of each pair is cached.
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform01() < p; }

  // Independent stream derived from this generator's seed and a label.
  // Does not advance *this.
  Rng fork(std::string_view label) const noexcept;

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t s_[4];
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> rng_shuffle(Rng& rng, std::size_t n);

// 64-bit FNV-1a over raw bytes.
std::uint64_t fnv1a64(std::span<const std::byte> bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

}  // namespace rsamp
