#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "scramblekit/corpus.hpp"

namespace scramblekit::cli {

/// Output file that only appears at its final path on commit(). Data goes
/// to a sibling temporary which is removed if the object dies uncommitted.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path target);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;
  ~AtomicFile();

  std::ostream& stream() { return out_; }
  void commit();
  const std::filesystem::path& target() const noexcept { return target_; }

 private:
  std::filesystem::path target_;
  std::filesystem::path temp_;
  std::ofstream out_;
  bool committed_ = false;
};

void write_file_atomic(const std::filesystem::path& target, const std::string& contents);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Input shard paired with the output path that mirrors it.
struct ShardJob {
  ShardFile input;
  std::filesystem::path output;
};

/// A file input maps to the file `out`; a directory input maps each shard
/// to `out/<shard>`, creating the directory.
std::vector<ShardJob> map_shards(const std::filesystem::path& in, const std::filesystem::path& out);

/// Calls fn(i) for i in [0, count) on up to `jobs` threads. The first
/// exception thrown is rethrown after all threads have stopped.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& fn);

/// Sentences per chunk in chunked parallel processing.
inline constexpr std::size_t kChunkLines = 4096;

}  // namespace scramblekit::cli
