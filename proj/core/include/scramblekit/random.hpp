#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace scramblekit {

// Stable mixers used for seed derivation. Both are part of the documented
// reproducibility contract; changing them changes every generated corpus.

/// SplitMix64 finalizer. A bijection on 64-bit integers.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a over the bytes of `s`.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

enum class SeedMode { fixed, per_sentence, per_shard };

std::string_view to_string(SeedMode mode) noexcept;
std::optional<SeedMode> parse_seed_mode(std::string_view text) noexcept;

struct SeedPolicy {
  SeedMode mode = SeedMode::fixed;
  std::uint64_t global_seed = 0;
};

/// Seed used for sentence `id` of `shard`.
///
///   fixed:        global_seed
///   per-shard:    splitmix64(global_seed ^ fnv1a64(shard))
///   per-sentence: splitmix64(per_shard_seed + id)
///
/// For a fixed shard the per-sentence map id -> seed is injective, since
/// splitmix64 is a bijection and `+ id` is injective modulo 2^64.
std::uint64_t effective_seed(const SeedPolicy& policy, std::string_view shard,
                             std::uint64_t id) noexcept;

/// Seeded generator used by every randomized operation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Bounded integers and doubles are derived here rather than with
/// <random> distributions, whose algorithms vary between standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  template <class T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace scramblekit
