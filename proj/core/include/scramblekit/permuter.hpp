#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scramblekit/corpus.hpp"
#include "scramblekit/random.hpp"

namespace scramblekit {

struct PermuteConfig {
  int n = 1;                    // n-gram order kept contiguous; 1 = full word shuffle
  int max_retries = 100;        // rejection-sampling attempts before the constructive fallback
  bool passthrough_short = true;

  void validate() const;
};

struct WindowConfig {
  std::size_t max_tokens = 512;

  void validate() const;
};

/// True iff some rearrangement leaves no atom on a position that originally
/// held an atom with the same surface text. Holds exactly when no surface
/// text occupies more than half of the positions.
bool derangement_feasible(std::span<const Atom> atoms);

/// Output order of a derangement: result[i] is the source index placed at
/// position i. Tries up to `max_retries` uniform shuffles (accepting the
/// first with zero fixed points under surface equality) and then falls back
/// to a randomized constructive derangement, so a feasible input always
/// succeeds. Throws DerangementInfeasible when no derangement exists.
std::vector<std::size_t> derangement_order(std::span<const Atom> atoms, Rng& rng, int max_retries);

AtomSequence derange(const AtomSequence& atoms, Rng& rng, int max_retries);
AtomSequence derange(const AtomSequence& atoms, std::uint64_t seed, int max_retries);

/// Repeatedly fuses a uniformly chosen run of `n` unconjoined atoms into one
/// conjoined atom until no such run remains. Each fusion removes n-1 atoms.
AtomSequence conjoin_ngrams(std::span<const std::string> tokens, int n, Rng& rng);
AtomSequence conjoin_ngrams(std::span<const std::string> tokens, int n, std::uint64_t seed);

enum class PermuteStatus { permuted, passthrough, infeasible };

struct PermuteOutcome {
  PermuteStatus status = PermuteStatus::passthrough;
  std::string text;
  /// Source token span [first, last) of each output atom, in output order.
  std::vector<std::pair<std::size_t, std::size_t>> spans;
};

/// Conjoin (for n > 1) then derange with one generator seeded by `seed`.
/// Sentences with fewer than two atoms come back unchanged with status
/// passthrough; inputs with no derangement come back unchanged with status
/// infeasible. Never throws for data reasons.
PermuteOutcome permute_sentence_detailed(const Sentence& sentence, const PermuteConfig& cfg,
                                         std::uint64_t seed);

/// Permuted text of `sentence`. Throws DerangementInfeasible for inputs with
/// no derangement unless `cfg.passthrough_short` is set.
std::string permute_sentence(const Sentence& sentence, const PermuteConfig& cfg, std::uint64_t seed);

/// One shuffled buffer of whole sentences.
struct WindowBlock {
  std::string shard;
  std::uint64_t first_id = 0;
  std::size_t sentence_count = 0;
  std::size_t token_count = 0;
  PermuteStatus status = PermuteStatus::permuted;
  std::string text;
};

/// Accumulates whole sentences into buffers of at most `max_tokens` tokens
/// and deranges each buffer as one unit of unigrams. A sentence that would
/// overflow the buffer closes it; a sentence longer than `max_tokens` gets a
/// buffer of its own. Sentences without tokens are skipped.
///
/// Each buffer is seeded with effective_seed(policy, shard, first_id).
class WindowShuffler {
 public:
  WindowShuffler(WindowConfig cfg, SeedPolicy policy, int max_retries = 100);

  /// Returns the buffer closed by `sentence`, if any.
  std::optional<WindowBlock> push(const Sentence& sentence);
  /// Closes the pending buffer.
  std::optional<WindowBlock> finish();

 private:
  WindowBlock close();

  WindowConfig cfg_;
  SeedPolicy policy_;
  int max_retries_;
  std::vector<std::string> buffer_;
  std::string shard_;
  std::uint64_t first_id_ = 0;
  std::size_t sentences_ = 0;
};

}  // namespace scramblekit
