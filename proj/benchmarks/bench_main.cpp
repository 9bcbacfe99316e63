#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "scramblekit/corpus.hpp"
#include "scramblekit/permuter.hpp"
#include "scramblekit/random.hpp"
#include "scramblekit/resampler.hpp"
#include "scramblekit/shuffle_metrics.hpp"

using namespace scramblekit;

namespace {

std::vector<Sentence> make_corpus(std::size_t lines, std::size_t max_len, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < lines; ++i) {
    std::vector<std::string> words;
    const auto len = 1 + rng.below(max_len);
    for (std::uint64_t k = 0; k < len; ++k) words.push_back("w" + std::to_string(rng.below(5000)));
    out.push_back(tokenize(join(words), "bench", i));
  }
  return out;
}

void BM_PermuteSentence(benchmark::State& state) {
  const auto corpus = make_corpus(1024, 40, 1);
  PermuteConfig cfg;
  cfg.n = static_cast<int>(state.range(0));
  std::size_t i = 0, tokens = 0;
  for (auto _ : state) {
    const auto& s = corpus[i++ % corpus.size()];
    benchmark::DoNotOptimize(permute_sentence_detailed(s, cfg, i));
    tokens += s.tokens.size();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(tokens));
}
BENCHMARK(BM_PermuteSentence)->DenseRange(1, 4);

void BM_WindowShuffle(benchmark::State& state) {
  const auto corpus = make_corpus(4096, 40, 2);
  std::size_t tokens = 0;
  for (const auto& s : corpus) tokens += s.tokens.size();
  for (auto _ : state) {
    WindowShuffler w({static_cast<std::size_t>(state.range(0))}, {SeedMode::per_shard, 7});
    for (const auto& s : corpus) benchmark::DoNotOptimize(w.push(s));
    benchmark::DoNotOptimize(w.finish());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(tokens * state.iterations()));
}
BENCHMARK(BM_WindowShuffle)->Arg(128)->Arg(512);

void BM_SentenceBleu(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> ref;
  for (std::size_t i = 0; i < len; ++i) ref.push_back("t" + std::to_string(i));
  const auto cand = derange(AtomSequence::singletons(ref), 3, 100).flatten();
  for (auto _ : state) benchmark::DoNotOptimize(sentence_bleu(cand, ref, 4));
}
BENCHMARK(BM_SentenceBleu)->Arg(8)->Arg(32)->Arg(128);

void BM_Resample(benchmark::State& state) {
  const auto corpus = make_corpus(4096, 40, 3);
  const auto [table, shape] = build_atom_table(corpus);
  const auto mode = state.range(0) ? ResampleMode::uniform : ResampleMode::frequency;
  for (auto _ : state) benchmark::DoNotOptimize(resample_corpus(table, shape, mode, 11));
  state.SetItemsProcessed(static_cast<std::int64_t>(shape.total_atoms() * state.iterations()));
}
BENCHMARK(BM_Resample)->Arg(0)->Arg(1);

void BM_BuildAtomTable(benchmark::State& state) {
  const auto corpus = make_corpus(4096, 40, 4);
  for (auto _ : state) benchmark::DoNotOptimize(build_atom_table(corpus));
}
BENCHMARK(BM_BuildAtomTable);

}  // namespace

BENCHMARK_MAIN();
