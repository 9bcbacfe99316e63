#include "scramblekit/permuter.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "scramblekit/error.hpp"

namespace scramblekit {
namespace {

std::vector<std::string> surface_texts(std::span<const Atom> atoms) {
  std::vector<std::string> texts;
  texts.reserve(atoms.size());
  for (const auto& a : atoms) texts.push_back(a.text());
  return texts;
}

std::size_t fixed_points(const std::vector<std::string>& texts, const std::vector<std::size_t>& order) {
  std::size_t r = 0;
  for (std::size_t i = 0; i < order.size(); ++i) r += texts[order[i]] == texts[i];
  return r;
}

// Groups positions by surface text in random order, lays the groups out
// back to back and rotates by the largest group size. No group is longer
// than the rotation or than N minus the rotation, so every position
// receives an atom from a different group.
std::vector<std::size_t> constructive_derangement(const std::vector<std::string>& texts, Rng& rng) {
  std::unordered_map<std::string_view, std::size_t> group_of;
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto [it, inserted] = group_of.try_emplace(texts[i], groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  rng.shuffle(std::span(groups));
  std::vector<std::size_t> layout;
  layout.reserve(texts.size());
  std::size_t shift = 0;
  for (auto& g : groups) {
    rng.shuffle(std::span(g));
    shift = std::max(shift, g.size());
    layout.insert(layout.end(), g.begin(), g.end());
  }
  const std::size_t n = layout.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[layout[i]] = layout[(i + shift) % n];
  return order;
}

}  // namespace

void PermuteConfig::validate() const {
  if (n < 1) throw Error(Errc::invalid_argument, "n must be >= 1");
  if (max_retries < 1) throw Error(Errc::invalid_argument, "max_retries must be >= 1");
}

void WindowConfig::validate() const {
  if (max_tokens < 1) throw Error(Errc::invalid_argument, "max_tokens must be >= 1");
}

bool derangement_feasible(std::span<const Atom> atoms) {
  if (atoms.empty()) return false;
  std::unordered_map<std::string, std::size_t> counts;
  std::size_t most = 0;
  for (const auto& a : atoms) most = std::max(most, ++counts[a.text()]);
  return 2 * most <= atoms.size();
}

std::vector<std::size_t> derangement_order(std::span<const Atom> atoms, Rng& rng, int max_retries) {
  if (atoms.empty()) throw Error(Errc::invalid_argument, "cannot derange an empty sequence");
  if (!derangement_feasible(atoms))
    throw Error(Errc::derangement_infeasible,
                "no rearrangement of " + std::to_string(atoms.size()) + " atoms moves every surface form");
  const auto texts = surface_texts(atoms);
  std::vector<std::size_t> order(atoms.size());
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    if (fixed_points(texts, order) == 0) return order;
  }
  return constructive_derangement(texts, rng);
}

AtomSequence derange(const AtomSequence& atoms, Rng& rng, int max_retries) {
  const auto order = derangement_order(atoms.atoms, rng, max_retries);
  AtomSequence out;
  out.source_len = atoms.source_len;
  out.atoms.reserve(order.size());
  for (auto i : order) out.atoms.push_back(atoms.atoms[i]);
  return out;
}

AtomSequence derange(const AtomSequence& atoms, std::uint64_t seed, int max_retries) {
  Rng rng(seed);
  return derange(atoms, rng, max_retries);
}

AtomSequence conjoin_ngrams(std::span<const std::string> tokens, int n, Rng& rng) {
  if (n < 1) throw Error(Errc::invalid_argument, "n must be >= 1");
  AtomSequence seq = AtomSequence::singletons(tokens);
  if (n == 1) return seq;
  const auto width = static_cast<std::size_t>(n);
  std::vector<std::size_t> starts;
  for (;;) {
    starts.clear();
    auto& atoms = seq.atoms;
    // Length of the run of unconjoined atoms ending at i.
    std::size_t run = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      run = atoms[i].conjoined() ? 0 : run + 1;
      if (run >= width) starts.push_back(i + 1 - width);
    }
    if (starts.empty()) break;
    const std::size_t p = starts[rng.below(starts.size())];
    std::vector<std::string> words;
    words.reserve(width);
    for (std::size_t k = p; k < p + width; ++k) words.push_back(std::move(atoms[k].words.front()));
    atoms[p] = Atom(std::move(words));
    atoms.erase(atoms.begin() + static_cast<std::ptrdiff_t>(p + 1),
                atoms.begin() + static_cast<std::ptrdiff_t>(p + width));
  }
  return seq;
}

AtomSequence conjoin_ngrams(std::span<const std::string> tokens, int n, std::uint64_t seed) {
  Rng rng(seed);
  return conjoin_ngrams(tokens, n, rng);
}

PermuteOutcome permute_sentence_detailed(const Sentence& sentence, const PermuteConfig& cfg,
                                         std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  AtomSequence seq = conjoin_ngrams(sentence.tokens, cfg.n, rng);

  std::vector<std::pair<std::size_t, std::size_t>> source;
  source.reserve(seq.size());
  std::size_t offset = 0;
  for (const auto& a : seq.atoms) {
    source.emplace_back(offset, offset + a.words.size());
    offset += a.words.size();
  }

  PermuteOutcome out;
  if (seq.size() < 2 || !derangement_feasible(seq.atoms)) {
    out.status = seq.size() < 2 ? PermuteStatus::passthrough : PermuteStatus::infeasible;
    out.text = sentence.raw;
    out.spans = std::move(source);
    return out;
  }
  const auto order = derangement_order(seq.atoms, rng, cfg.max_retries);
  out.status = PermuteStatus::permuted;
  out.spans.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i) out.text += ' ';
    out.text += seq.atoms[order[i]].text();
    out.spans.push_back(source[order[i]]);
  }
  return out;
}

std::string permute_sentence(const Sentence& sentence, const PermuteConfig& cfg, std::uint64_t seed) {
  auto outcome = permute_sentence_detailed(sentence, cfg, seed);
  if (outcome.status == PermuteStatus::infeasible && !cfg.passthrough_short)
    throw Error(Errc::derangement_infeasible,
                "sentence " + std::to_string(sentence.id) + " of '" + sentence.shard + "'");
  return std::move(outcome.text);
}

WindowShuffler::WindowShuffler(WindowConfig cfg, SeedPolicy policy, int max_retries)
    : cfg_(cfg), policy_(policy), max_retries_(max_retries) {
  cfg_.validate();
  if (max_retries_ < 1) throw Error(Errc::invalid_argument, "max_retries must be >= 1");
}

std::optional<WindowBlock> WindowShuffler::push(const Sentence& sentence) {
  if (sentence.tokens.empty()) return std::nullopt;
  std::optional<WindowBlock> closed;
  if (!buffer_.empty() &&
      (sentence.shard != shard_ || buffer_.size() + sentence.tokens.size() > cfg_.max_tokens))
    closed = close();
  if (buffer_.empty()) {
    shard_ = sentence.shard;
    first_id_ = sentence.id;
  }
  buffer_.insert(buffer_.end(), sentence.tokens.begin(), sentence.tokens.end());
  ++sentences_;
  return closed;
}

std::optional<WindowBlock> WindowShuffler::finish() {
  if (buffer_.empty()) return std::nullopt;
  return close();
}

WindowBlock WindowShuffler::close() {
  WindowBlock block;
  block.shard = shard_;
  block.first_id = first_id_;
  block.sentence_count = sentences_;
  block.token_count = buffer_.size();

  auto seq = AtomSequence::singletons(buffer_);
  if (seq.size() < 2 || !derangement_feasible(seq.atoms)) {
    block.status = seq.size() < 2 ? PermuteStatus::passthrough : PermuteStatus::infeasible;
    block.text = seq.text();
  } else {
    Rng rng(effective_seed(policy_, shard_, first_id_));
    block.status = PermuteStatus::permuted;
    block.text = derange(seq, rng, max_retries_).text();
  }
  buffer_.clear();
  sentences_ = 0;
  return block;
}

}  // namespace scramblekit
