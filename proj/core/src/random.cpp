#include "scramblekit/random.hpp"

#include <cassert>

namespace scramblekit {

std::string_view to_string(SeedMode mode) noexcept {
  switch (mode) {
    case SeedMode::fixed: return "fixed";
    case SeedMode::per_sentence: return "per-sentence";
    case SeedMode::per_shard: return "per-shard";
  }
  return "fixed";
}

std::optional<SeedMode> parse_seed_mode(std::string_view text) noexcept {
  if (text == "fixed") return SeedMode::fixed;
  if (text == "per-sentence") return SeedMode::per_sentence;
  if (text == "per-shard") return SeedMode::per_shard;
  return std::nullopt;
}

std::uint64_t effective_seed(const SeedPolicy& policy, std::string_view shard,
                             std::uint64_t id) noexcept {
  if (policy.mode == SeedMode::fixed) return policy.global_seed;
  std::uint64_t shard_seed = splitmix64(policy.global_seed ^ fnv1a64(shard));
  if (policy.mode == SeedMode::per_shard) return shard_seed;
  return splitmix64(shard_seed + id);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  assert(bound > 0);
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x > limit);
  return x % bound;
}

}  // namespace scramblekit
