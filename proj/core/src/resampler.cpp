#include "scramblekit/resampler.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

#include <nlohmann/json.hpp>

#include "scramblekit/error.hpp"

namespace scramblekit {

void AtomTable::add(std::string_view atom, std::uint64_t count) {
  if (atom.empty()) throw Error(Errc::invalid_argument, "empty atom");
  if (count == 0) return;
  auto it = entries.find(atom);
  if (it == entries.end()) it = entries.emplace(std::string(atom), 0).first;
  it->second += count;
  total += count;
}

std::uint64_t AtomTable::count(std::string_view atom) const {
  auto it = entries.find(atom);
  return it == entries.end() ? 0 : it->second;
}

void write_atom_table(std::ostream& out, const AtomTable& table) {
  for (const auto& [atom, count] : table.entries) out << atom << '\t' << count << '\n';
}

AtomTable read_atom_table(std::istream& in) {
  AtomTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0)
      throw Error(Errc::parse_error, "atom table line " + std::to_string(lineno) + ": expected atom<TAB>count");
    try {
      std::size_t used = 0;
      auto count = std::stoull(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1 || count == 0) throw std::invalid_argument("count");
      table.add(std::string_view(line).substr(0, tab), count);
    } catch (const std::logic_error&) {
      throw Error(Errc::parse_error, "atom table line " + std::to_string(lineno) + ": bad count");
    }
  }
  return table;
}

void AnnotationIndex::add(EntityAnnotation annotation) {
  auto& spans = index_[{std::move(annotation.shard), annotation.line}];
  spans.insert(spans.end(), annotation.spans.begin(), annotation.spans.end());
  std::sort(spans.begin(), spans.end(),
            [](const TokenSpan& a, const TokenSpan& b) { return a.begin < b.begin; });
}

std::span<const TokenSpan> AnnotationIndex::find(std::string_view shard, std::uint64_t line) const {
  auto it = index_.find({std::string(shard), line});
  if (it == index_.end()) return {};
  return it->second;
}

AnnotationIndex read_annotations(std::istream& in) {
  AnnotationIndex index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      EntityAnnotation a;
      a.shard = j.at("shard").get<std::string>();
      a.line = j.at("line").get<std::uint64_t>();
      for (const auto& s : j.at("spans")) {
        if (!s.is_array() || s.size() != 2)
          throw Error(Errc::parse_error, "span must be [start, end]");
        a.spans.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
      }
      index.add(std::move(a));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse_error, "annotation line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return index;
}

std::vector<std::string> atomize(const Sentence& sentence, std::span<const TokenSpan> spans) {
  const auto& tokens = sentence.tokens;
  std::vector<std::string> atoms;
  atoms.reserve(tokens.size());
  std::size_t pos = 0;
  for (const auto& span : spans) {
    if (span.begin >= span.end || span.end > tokens.size() || span.begin < pos)
      throw Error(Errc::invalid_span, "span [" + std::to_string(span.begin) + "," +
                                          std::to_string(span.end) + ") in line " +
                                          std::to_string(sentence.id) + " of '" + sentence.shard +
                                          "' with " + std::to_string(tokens.size()) + " tokens");
    for (; pos < span.begin; ++pos) atoms.push_back(tokens[pos]);
    atoms.push_back(join(std::span(tokens).subspan(span.begin, span.end - span.begin)));
    pos = span.end;
  }
  for (; pos < tokens.size(); ++pos) atoms.push_back(tokens[pos]);
  return atoms;
}

std::uint64_t CorpusShape::total_atoms() const {
  std::uint64_t n = 0;
  for (const auto& s : shards)
    for (auto c : s.atom_counts) n += c;
  return n;
}

std::uint64_t CorpusShape::line_count() const {
  std::uint64_t n = 0;
  for (const auto& s : shards) n += s.atom_counts.size();
  return n;
}

void AtomTableBuilder::add(const Sentence& sentence, std::span<const TokenSpan> spans) {
  auto atoms = atomize(sentence, spans);
  if (shape_.shards.empty() || shape_.shards.back().shard != sentence.shard)
    shape_.shards.push_back({sentence.shard, {}});
  shape_.shards.back().atom_counts.push_back(static_cast<std::uint32_t>(atoms.size()));
  for (const auto& a : atoms) table_.add(a);
}

std::pair<AtomTable, CorpusShape> AtomTableBuilder::finish() && {
  if (table_.total == 0) throw Error(Errc::empty_corpus, "corpus contains no tokens");
  return {std::move(table_), std::move(shape_)};
}

std::pair<AtomTable, CorpusShape> build_atom_table(std::span<const Sentence> corpus,
                                                   const AnnotationIndex* annotations) {
  AtomTableBuilder builder;
  for (const auto& s : corpus)
    builder.add(s, annotations ? annotations->find(s.shard, s.id) : std::span<const TokenSpan>{});
  return std::move(builder).finish();
}

std::string_view to_string(ResampleMode mode) noexcept {
  return mode == ResampleMode::frequency ? "frequency" : "uniform";
}

std::optional<ResampleMode> parse_resample_mode(std::string_view text) noexcept {
  if (text == "frequency") return ResampleMode::frequency;
  if (text == "uniform") return ResampleMode::uniform;
  return std::nullopt;
}

AtomSampler::AtomSampler(const AtomTable& table, ResampleMode mode) : mode_(mode) {
  if (table.empty()) throw Error(Errc::invalid_argument, "atom table is empty");
  atoms_.reserve(table.size());
  cumulative_.reserve(table.size());
  std::uint64_t acc = 0;
  for (const auto& [atom, count] : table.entries) {
    atoms_.push_back(atom);
    acc += count;
    cumulative_.push_back(acc);
  }
}

std::size_t AtomSampler::draw_index(Rng& rng) const {
  if (mode_ == ResampleMode::uniform) return static_cast<std::size_t>(rng.below(atoms_.size()));
  const auto r = rng.below(cumulative_.back());
  return static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), r) -
                                  cumulative_.begin());
}

double AtomSampler::probability(std::size_t i) const {
  if (mode_ == ResampleMode::uniform) return 1.0 / static_cast<double>(atoms_.size());
  const auto lo = i == 0 ? 0 : cumulative_[i - 1];
  return static_cast<double>(cumulative_[i] - lo) / static_cast<double>(cumulative_.back());
}

std::uint64_t resample_line_seed(std::uint64_t seed, std::string_view shard, std::uint64_t line) {
  return effective_seed({SeedMode::per_sentence, seed}, shard, line);
}

std::string resample_line(const AtomSampler& sampler, std::uint32_t atom_count, std::uint64_t line_seed) {
  Rng rng(line_seed);
  std::string out;
  for (std::uint32_t i = 0; i < atom_count; ++i) {
    if (i) out += ' ';
    out += sampler.draw(rng);
  }
  return out;
}

std::vector<ResampledShard> resample_corpus(const AtomTable& table, const CorpusShape& shape,
                                            ResampleMode mode, std::uint64_t seed) {
  AtomSampler sampler(table, mode);
  std::vector<ResampledShard> out;
  out.reserve(shape.shards.size());
  for (const auto& s : shape.shards) {
    ResampledShard shard{s.shard, {}};
    shard.lines.reserve(s.atom_counts.size());
    for (std::size_t i = 0; i < s.atom_counts.size(); ++i)
      shard.lines.push_back(resample_line(sampler, s.atom_counts[i], resample_line_seed(seed, s.shard, i)));
    out.push_back(std::move(shard));
  }
  return out;
}

}  // namespace scramblekit
