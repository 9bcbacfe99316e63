#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scramblekit/stats.hpp"

namespace scramblekit {

inline constexpr int kMaxBleuOrder = 4;

/// Clipped n-gram matches and candidate n-gram totals for orders 1..max_n.
struct NgramPrecisions {
  std::array<std::uint64_t, kMaxBleuOrder> matches{};
  std::array<std::uint64_t, kMaxBleuOrder> totals{};
  std::size_t candidate_len = 0;
  std::size_t reference_len = 0;

  /// Cumulative BLEU over orders 1..max_n: brevity penalty times the
  /// geometric mean of the precisions, 0 if any precision is 0 or undefined.
  double bleu(int max_n) const;
};

NgramPrecisions ngram_precisions(std::span<const std::string> candidate,
                                 std::span<const std::string> reference, int max_n);

/// Unsmoothed sentence BLEU with uniform weights. Throws EmptyReference.
double sentence_bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                     int max_n);

struct OrderStats {
  int order = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct BleuReport {
  std::vector<OrderStats> orders;
  std::size_t sample_size = 0;
};

/// Streaming mean/std of sentence BLEU for several cumulative orders.
class BleuAccumulator {
 public:
  explicit BleuAccumulator(std::vector<int> orders = {2, 3, 4});

  /// Both sides are whitespace tokenized.
  void add(std::string_view candidate, std::string_view reference);
  void add(std::span<const std::string> candidate, std::span<const std::string> reference);
  void merge(const BleuAccumulator& other);

  BleuReport report() const;

 private:
  std::vector<int> orders_;
  std::vector<RunningStats> stats_;
};

/// `sample_size` distinct indices from [0, line_count), ascending.
std::vector<std::size_t> sample_without_replacement(std::size_t line_count, std::size_t sample_size,
                                                    std::uint64_t seed);

/// Sentence BLEU of `shuffled[i]` against `original[i]` over a seeded sample
/// of aligned lines. Throws Misaligned when the line counts differ.
BleuReport corpus_shuffle_report(std::span<const std::string> original,
                                 std::span<const std::string> shuffled, std::size_t sample_size,
                                 std::uint64_t seed, std::vector<int> orders = {2, 3, 4});

enum class DeltaMode { as_written, table_consistent };

std::string_view to_string(DeltaMode mode) noexcept;
std::optional<DeltaMode> parse_delta_mode(std::string_view text) noexcept;

/// Accuracies in percent.
struct DeltaInput {
  double a_or = 0.0;    // naturally pre-trained model
  double a_d = 0.0;     // perturbed model
  double a_rand = 0.0;  // random baseline
  DeltaMode mode = DeltaMode::table_consistent;
};

/// Relative accuracy gap scaled by 100.
///   as-written:       100 (a_or - a_d) / (a_or - a_rand)
///   table-consistent: 100 (a_or - a_d) / a_or
double relative_difference(const DeltaInput& in);

}  // namespace scramblekit
