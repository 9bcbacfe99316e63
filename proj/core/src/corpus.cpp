#include "scramblekit/corpus.hpp"

#include <algorithm>

#include "scramblekit/error.hpp"

namespace scramblekit {
namespace {

constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

}  // namespace

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view sep) {
  std::string out;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size() + sep.size();
  out.reserve(total);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

Sentence tokenize(std::string_view line, std::string_view shard, std::uint64_t id) {
  Sentence s;
  s.id = id;
  s.shard = std::string(shard);
  s.tokens = split_whitespace(line);
  s.raw = std::string(line);
  return s;
}

AtomSequence AtomSequence::singletons(std::span<const std::string> tokens) {
  AtomSequence seq;
  seq.atoms.reserve(tokens.size());
  for (const auto& t : tokens) seq.atoms.emplace_back(t);
  seq.source_len = tokens.size();
  return seq;
}

std::vector<std::string> AtomSequence::flatten() const {
  std::vector<std::string> out;
  out.reserve(source_len);
  for (const auto& a : atoms) out.insert(out.end(), a.words.begin(), a.words.end());
  return out;
}

std::string AtomSequence::text() const {
  std::string out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (i) out += ' ';
    out += atoms[i].text();
  }
  return out;
}

std::vector<ShardFile> list_shards(const std::filesystem::path& corpus) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_directory(corpus, ec)) {
    std::vector<ShardFile> shards;
    for (const auto& entry : fs::directory_iterator(corpus)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt")
        shards.push_back({entry.path().filename().string(), entry.path()});
    }
    std::sort(shards.begin(), shards.end(),
              [](const ShardFile& a, const ShardFile& b) { return a.shard < b.shard; });
    if (shards.empty()) throw Error(Errc::io_error, "no *.txt shards in " + corpus.string());
    return shards;
  }
  if (!fs::is_regular_file(corpus, ec))
    throw Error(Errc::io_error, "cannot read corpus " + corpus.string());
  return {{corpus.filename().string(), corpus}};
}

ShardReader::ShardReader(const ShardFile& shard)
    : shard_(shard.shard), in_(shard.path, std::ios::binary) {
  if (!in_) throw Error(Errc::io_error, "cannot open " + shard.path.string());
}

std::optional<Sentence> ShardReader::next() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  return tokenize(line, shard_, line_++);
}

std::vector<Sentence> read_shard(const ShardFile& shard) {
  ShardReader reader(shard);
  std::vector<Sentence> out;
  while (auto s = reader.next()) out.push_back(std::move(*s));
  return out;
}

}  // namespace scramblekit
