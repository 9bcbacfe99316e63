#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "scramblekit/corpus.hpp"
#include "scramblekit/scorer.hpp"

namespace scramblekit {

/// Pseudo-log-likelihood of one sentence: mean over positions of the log
/// probability the scorer gives the original token with that position masked.
struct PllResult {
  std::string shard;
  std::uint64_t sentence_id = 0;
  double pll = 0.0;               // mean over scored positions
  double logprob_sum = 0.0;       // sum over scored positions
  std::size_t token_count = 0;    // all positions
  std::size_t skipped_tokens = 0; // positions the scorer could not score

  std::size_t scored_tokens() const noexcept { return token_count - skipped_tokens; }
};

/// One request per position, sent as a single batch. Skipped positions are
/// left out of the mean. Throws EmptySentence or AllTokensSkipped.
PllResult pll(const Sentence& sentence, Scorer& scorer);

/// `k * m` indices drawn with replacement from [0, corpus_size).
std::vector<std::size_t> bootstrap_indices(std::size_t corpus_size, int k, int m, std::uint64_t seed);

struct BpllResult {
  /// exp(-(1/N) sum of PLL(S) over the N sampled sentences).
  double bpll = 0.0;
  /// exp(-(sum of token logprobs) / (sum of scored tokens)) over the sample.
  double bpll_token_weighted = 0.0;
  double mean_pll = 0.0;
  int k = 5;
  int m = 100;
  std::uint64_t seed = 0;
  std::size_t sample_size = 0;
};

/// Bootstrap statistics of a fixed sample; `sample` indexes into `plls`.
BpllResult bpll_from_sample(std::span<const PllResult> plls, std::span<const std::size_t> sample);

/// Bootstrap pseudo-perplexity over the non-empty sentences of `corpus`:
/// k rounds of m draws with replacement, pooled. Only drawn sentences are
/// scored, each once. Throws EmptyCorpus.
BpllResult bpll(std::span<const Sentence> corpus, Scorer& scorer, int k = 5, int m = 100,
                std::uint64_t seed = 0);

}  // namespace scramblekit
