#include "scramblekit/pll.hpp"

#include <cmath>
#include <map>

#include "scramblekit/error.hpp"
#include "scramblekit/random.hpp"

namespace scramblekit {

PllResult pll(const Sentence& sentence, Scorer& scorer) {
  const auto n = sentence.tokens.size();
  if (n == 0)
    throw Error(Errc::empty_sentence, "sentence " + std::to_string(sentence.id) + " of '" + sentence.shard + "'");

  std::vector<ScoreRequest> reqs;
  reqs.reserve(n);
  const std::string prefix = sentence.shard + ":" + std::to_string(sentence.id) + ":";
  for (std::size_t i = 0; i < n; ++i)
    reqs.push_back({prefix + std::to_string(i), sentence.tokens, i, {sentence.tokens[i]}});
  const auto resps = scorer.score_batch(reqs);

  PllResult r;
  r.shard = sentence.shard;
  r.sentence_id = sentence.id;
  r.token_count = n;
  for (const auto& resp : resps) {
    if (resp.is_skipped(0)) {
      ++r.skipped_tokens;
      continue;
    }
    r.logprob_sum += resp.logprobs.at(0);
  }
  if (r.scored_tokens() == 0)
    throw Error(Errc::all_tokens_skipped,
                "scorer skipped every token of sentence " + std::to_string(sentence.id) + " of '" + sentence.shard + "'");
  r.pll = r.logprob_sum / static_cast<double>(r.scored_tokens());
  return r;
}

std::vector<std::size_t> bootstrap_indices(std::size_t corpus_size, int k, int m, std::uint64_t seed) {
  if (corpus_size == 0) throw Error(Errc::empty_corpus, "nothing to resample");
  if (k < 1 || m < 1) throw Error(Errc::invalid_argument, "bootstrap needs k >= 1 and m >= 1");
  Rng rng(seed);
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(m));
  for (int round = 0; round < k; ++round)
    for (int i = 0; i < m; ++i) out.push_back(static_cast<std::size_t>(rng.below(corpus_size)));
  return out;
}

BpllResult bpll_from_sample(std::span<const PllResult> plls, std::span<const std::size_t> sample) {
  if (sample.empty()) throw Error(Errc::empty_corpus, "empty bootstrap sample");
  double pll_sum = 0.0;
  double logprob_sum = 0.0;
  double tokens = 0.0;
  for (auto i : sample) {
    const auto& r = plls[i];
    pll_sum += r.pll;
    logprob_sum += r.logprob_sum;
    tokens += static_cast<double>(r.scored_tokens());
  }
  BpllResult out;
  out.sample_size = sample.size();
  out.mean_pll = pll_sum / static_cast<double>(sample.size());
  out.bpll = std::exp(-out.mean_pll);
  out.bpll_token_weighted = std::exp(-logprob_sum / tokens);
  return out;
}

BpllResult bpll(std::span<const Sentence> corpus, Scorer& scorer, int k, int m, std::uint64_t seed) {
  std::vector<const Sentence*> population;
  for (const auto& s : corpus)
    if (!s.tokens.empty()) population.push_back(&s);
  if (population.empty()) throw Error(Errc::empty_corpus, "corpus has no non-empty sentences");

  const auto sample = bootstrap_indices(population.size(), k, m, seed);
  std::map<std::size_t, std::size_t> slot;
  std::vector<PllResult> plls;
  std::vector<std::size_t> remapped;
  remapped.reserve(sample.size());
  for (auto i : sample) {
    auto [it, inserted] = slot.try_emplace(i, plls.size());
    if (inserted) plls.push_back(pll(*population[i], scorer));
    remapped.push_back(it->second);
  }
  auto out = bpll_from_sample(plls, remapped);
  out.k = k;
  out.m = m;
  out.seed = seed;
  return out;
}

}  // namespace scramblekit
