#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace scramblekit {

/// One line of a shard, split on whitespace.
struct Sentence {
  std::uint64_t id = 0;  // zero-based line number within the shard
  std::string shard;
  std::vector<std::string> tokens;
  std::string raw;
};

/// Splits `line` into maximal runs of non-whitespace bytes (space, \t, \n,
/// \v, \f, \r). `raw` keeps the line verbatim.
Sentence tokenize(std::string_view line, std::string_view shard = {}, std::uint64_t id = 0);

std::vector<std::string> split_whitespace(std::string_view text);
std::string join(std::span<const std::string> parts, std::string_view sep = " ");

/// The shuffling unit: a single word, or a conjoined span of words.
struct Atom {
  std::vector<std::string> words;

  Atom() = default;
  explicit Atom(std::string word) { words.push_back(std::move(word)); }
  explicit Atom(std::vector<std::string> ws) : words(std::move(ws)) {}

  bool conjoined() const noexcept { return words.size() > 1; }
  /// Surface text; words joined by single spaces.
  std::string text() const { return join(words); }

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct AtomSequence {
  std::vector<Atom> atoms;
  std::size_t source_len = 0;

  static AtomSequence singletons(std::span<const std::string> tokens);

  std::size_t size() const noexcept { return atoms.size(); }
  bool empty() const noexcept { return atoms.empty(); }
  std::vector<std::string> flatten() const;
  std::string text() const;
};

/// Shards of a corpus path: the file itself, or every regular *.txt file
/// of a directory sorted by file name. The shard id is the file name.
struct ShardFile {
  std::string shard;
  std::filesystem::path path;
};

std::vector<ShardFile> list_shards(const std::filesystem::path& corpus);

/// Streams a shard line by line. LF terminated; a final line without LF is
/// still returned. Memory is bounded by the longest line.
class ShardReader {
 public:
  explicit ShardReader(const ShardFile& shard);

  std::optional<Sentence> next();
  const std::string& shard() const noexcept { return shard_; }

 private:
  std::string shard_;
  std::ifstream in_;
  std::uint64_t line_ = 0;
};

/// Reads a whole shard into memory.
std::vector<Sentence> read_shard(const ShardFile& shard);

}  // namespace scramblekit
