#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scramblekit/corpus.hpp"
#include "scramblekit/random.hpp"

namespace scramblekit {

/// Atom inventory with exact occurrence counts. Ordered by atom text so
/// sampling indices are stable.
struct AtomTable {
  std::map<std::string, std::uint64_t, std::less<>> entries;
  std::uint64_t total = 0;

  void add(std::string_view atom, std::uint64_t count = 1);
  std::uint64_t count(std::string_view atom) const;
  std::size_t size() const noexcept { return entries.size(); }
  bool empty() const noexcept { return entries.empty(); }
};

/// TSV, one `atom<TAB>count` per line, sorted by atom.
void write_atom_table(std::ostream& out, const AtomTable& table);
AtomTable read_atom_table(std::istream& in);

/// Half-open token interval [begin, end).
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct EntityAnnotation {
  std::string shard;
  std::uint64_t line = 0;
  std::vector<TokenSpan> spans;
};

/// Entity spans keyed by (shard, line), read from the JSON-lines sidecar
/// `{"shard": str, "line": int, "spans": [[int,int],...]}`.
class AnnotationIndex {
 public:
  void add(EntityAnnotation annotation);
  std::span<const TokenSpan> find(std::string_view shard, std::uint64_t line) const;
  std::size_t size() const noexcept { return index_.size(); }

 private:
  std::map<std::pair<std::string, std::uint64_t>, std::vector<TokenSpan>> index_;
};

AnnotationIndex read_annotations(std::istream& in);

/// Atoms of one sentence: each entity span becomes a single atom with its
/// internal spaces, every other token is its own atom. Throws InvalidSpan
/// for empty, out-of-bounds, unsorted or overlapping spans.
std::vector<std::string> atomize(const Sentence& sentence, std::span<const TokenSpan> spans);

struct ShardShape {
  std::string shard;
  std::vector<std::uint32_t> atom_counts;  // one per line, 0 for blank lines
};

struct CorpusShape {
  std::vector<ShardShape> shards;
  std::uint64_t total_atoms() const;
  std::uint64_t line_count() const;
};

/// Streaming table/shape builder; feed sentences in corpus order.
class AtomTableBuilder {
 public:
  void add(const Sentence& sentence, std::span<const TokenSpan> spans = {});
  /// Throws EmptyCorpus when no atom was seen.
  std::pair<AtomTable, CorpusShape> finish() &&;

 private:
  AtomTable table_;
  CorpusShape shape_;
};

std::pair<AtomTable, CorpusShape> build_atom_table(std::span<const Sentence> corpus,
                                                   const AnnotationIndex* annotations = nullptr);

enum class ResampleMode { frequency, uniform };

std::string_view to_string(ResampleMode mode) noexcept;
std::optional<ResampleMode> parse_resample_mode(std::string_view text) noexcept;

/// Draws atoms i.i.d.: with probability count/total (frequency) or
/// 1/|entries| (uniform).
class AtomSampler {
 public:
  AtomSampler(const AtomTable& table, ResampleMode mode);

  std::size_t draw_index(Rng& rng) const;
  const std::string& draw(Rng& rng) const { return atoms_[draw_index(rng)]; }
  const std::string& atom(std::size_t i) const { return atoms_[i]; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double probability(std::size_t i) const;

 private:
  ResampleMode mode_;
  std::vector<std::string> atoms_;
  std::vector<std::uint64_t> cumulative_;
};

/// Seed for line `line` of `shard` in a resampled corpus.
std::uint64_t resample_line_seed(std::uint64_t seed, std::string_view shard, std::uint64_t line);

/// One output line of `atom_count` atoms joined by spaces.
std::string resample_line(const AtomSampler& sampler, std::uint32_t atom_count, std::uint64_t line_seed);

struct ResampledShard {
  std::string shard;
  std::vector<std::string> lines;
};

/// Corpus with exactly the shape of `shape`. Each line is generated from its
/// own seed, so lines can be produced independently and in any order.
std::vector<ResampledShard> resample_corpus(const AtomTable& table, const CorpusShape& shape,
                                            ResampleMode mode, std::uint64_t seed);

}  // namespace scramblekit
