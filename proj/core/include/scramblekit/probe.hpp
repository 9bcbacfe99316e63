#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scramblekit/scorer.hpp"

namespace scramblekit {

enum class NumberClass { singular, plural };

/// Minimal pair: `good` and `bad` compete for tokens[mask_index].
struct Stimulus {
  std::string id;
  std::vector<std::string> tokens;
  std::size_t mask_index = 0;
  std::string good;
  std::string bad;
  std::string condition;
  std::optional<NumberClass> number_class;

  /// Throws InvalidMaskIndex or ParseError (good == bad, empty fields).
  void validate() const;
};

/// One stimulus per line:
/// {"id":str,"tokens":[str...],"mask_index":int,"good":str,"bad":str,
///  "condition":str,"number_class":"S"|"P"?}
std::string encode_stimulus(const Stimulus& s);
Stimulus decode_stimulus(std::string_view line);

/// Parses and validates a JSON-lines stream; blank lines are ignored.
/// Throws ParseError, InvalidMaskIndex or DuplicateId.
std::vector<Stimulus> read_stimuli(std::istream& in);
std::vector<Stimulus> load_stimuli(const std::filesystem::path& path);

/// Converts TSV rows `sentence<TAB>mask_index<TAB>good<TAB>bad<TAB>condition[<TAB>S|P]`
/// to stimulus JSON lines. A first row starting with `sentence` is a header.
/// Ids are the 1-based row numbers. Returns the number of stimuli written.
std::size_t convert_tsv(std::istream& in, std::ostream& out);

/// Upsamples both number classes of every condition, with replacement, to
/// 100 * ceil(S / 100) items each, S being the singular count. A singular
/// count already on a multiple of 100 is kept unless `strict_next`, which
/// moves it to the next multiple. If the plural class is larger than that
/// target, the target rises to the multiple of 100 covering it, so no item
/// is ever dropped. Originals are kept, copies get ids `<id>~<k>`, and the
/// result is shuffled with `seed`.
std::vector<Stimulus> balance_stimuli(std::span<const Stimulus> stimuli, std::uint64_t seed,
                                      bool strict_next = false);

/// Balancing target for one condition.
std::size_t balance_target(std::size_t singular, std::size_t plural, bool strict_next = false);

struct ConditionResult {
  std::string condition;
  std::size_t item_count = 0;
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  std::size_t skipped = 0;
  std::optional<double> accuracy;        // percent of evaluated items
  std::optional<double> mean_prob_diff;  // 100 * mean(P(good) - P(bad)) over evaluated items
};

struct ProbeReport {
  std::vector<ConditionResult> conditions;  // sorted by condition label
  ConditionResult overall;                  // pooled over all items
  /// Mean and population std of per-condition values, over conditions
  /// with at least one evaluated item.
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double prob_diff_mean = 0.0;
  double prob_diff_std = 0.0;
  std::uint64_t seed = 0;
  bool balanced = false;
};

/// Scores [good, bad] at each stimulus's mask. An item is correct when
/// logprob(good) > logprob(bad); ties and items with a skipped candidate
/// count as skipped. Items are processed in id order, so the report does
/// not depend on input order. Throws AllSkipped if nothing was evaluated.
ProbeReport run_probe(std::span<const Stimulus> stimuli, Scorer& scorer, bool balance, std::uint64_t seed,
                      bool strict_next = false);

}  // namespace scramblekit
